#pragma once

// Vacuum Wightman function of a free scalar field in 3+1 Minkowski space for
// two static points, G(dt, r) = <0|phi(t, x) phi(t', x')|0> with dt = t - t',
// r = |x - x'|, and the i*epsilon prescription dt -> dt - i*epsilon.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "udleak/bessel.hpp"
#include "udleak/errors.hpp"
#include "udleak/model.hpp"
#include "udleak/quadrature.hpp"

namespace udleak {

inline constexpr double kRegulatorFloor = 1e-8;

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

/// Momentum-space data of the field: E_p and the radial measure p^2 / E_p.
struct ModeKernel {
  double mass = 0.0;
  double c = 1.0;

  double energy(double p) const {
    const double mc2 = mass * c * c;
    return std::sqrt(p * p * c * c + mc2 * mc2);
  }

  /// p^2 / E_p; finite at p = 0 when mass = 0.
  double measure(double p) const {
    if (mass == 0.0) return p / c;
    return p * p / energy(p);
  }
};

struct PositionKernel {
  double mass = 0.0;
  double c = 1.0;
  double epsilon = 1e-3;
};

namespace detail {

inline void check_regulator(double eps) {
  if (!(eps >= kRegulatorFloor)) {
    std::ostringstream os;
    os << "regulator epsilon = " << eps << " is below the floor " << kRegulatorFloor;
    throw RegulatorTooSmall(os.str());
  }
}

/// G for dt >= 0.
inline std::complex<double> wightman_forward(const PositionKernel& k, double dt, double r) {
  using C = std::complex<double>;
  const double c = k.c;
  const C tau(dt, -k.epsilon);
  if (k.mass == 0.0) {
    return -1.0 / (4.0 * M_PI * M_PI * c * (c * c * tau * tau - r * r));
  }
  const double rest = k.mass * c * c;  // M in G1 = M K1(M z) / (4 pi^2 z)
  const double big_r = r / c;
  const C z = std::sqrt(big_r * big_r - tau * tau);
  return rest * bessel_k1(rest * z) / (4.0 * M_PI * M_PI * z) / (c * c * c);
}

}  // namespace detail

/// Closed-form Wightman function. Massless: -1/(4 pi^2 c ((c(dt - i eps))^2 - r^2));
/// massive: the K1 form. value(-dt, r) is the exact conjugate of value(dt, r).
inline std::complex<double> wightman_position(const PositionKernel& k, double dt, double r) {
  detail::check_regulator(k.epsilon);
  if (dt < 0.0) return std::conj(detail::wightman_forward(k, -dt, r));
  return detail::wightman_forward(k, dt, r);
}

/// Direct radial mode sum (1/4pi^2) int p^2/E sinc(p r) e^{-i E (dt - i eps)} dp.
/// Slow; used as an oracle for wightman_position.
inline QuadResult<std::complex<double>> wightman_mode_sum(const PositionKernel& k, double dt,
                                                          double r, double rel_tol = 1e-9) {
  detail::check_regulator(k.epsilon);
  const ModeKernel mk{k.mass, k.c};
  // e^{-E eps} < 1e-16 beyond this momentum.
  const double p_hi = 40.0 / (k.epsilon * k.c);
  auto f = [&](double p) {
    const double e = mk.energy(p);
    return mk.measure(p) * sinc(p * r) * std::exp(std::complex<double>(-e * k.epsilon, -e * dt)) /
           (4.0 * M_PI * M_PI);
  };
  AdaptiveOptions opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = rel_tol;
  opt.max_subdivisions = 200000;
  std::vector<double> breaks;
  for (int j = 1; j < 64; ++j) breaks.push_back(p_hi * j / 64.0);
  return integrate<std::complex<double>>(f, 0.0, p_hi, opt, breaks);
}

/// Fourier transform int chi(tau) e^{i omega tau} dtau of the switching
/// function. Gaussian only: sigma sqrt(2 pi) exp(-sigma^2 omega^2 / 2).
inline std::complex<double> switching_fourier(const SwitchingSpec& s, double omega) {
  if (s.kind != SwitchingKind::gaussian)
    throw UnsupportedSwitching("eternal switching has no finite Fourier transform");
  return s.sigma * std::sqrt(2.0 * M_PI) * std::exp(-0.5 * s.sigma * s.sigma * omega * omega);
}

}  // namespace udleak
