#pragma once

// Two-detector density matrix to second order in the couplings.
//
// Layout (index 2 i_A + i_B, level 0 = excited):
//
//   | a1  0   0   a2 |     slot 0 = e_A e_B, 1 = e_A g_B,
//   | 0   b1  b2  0  |     slot 2 = g_A e_B, 3 = g_A g_B
//   | 0   c1  c2  0  |
//   | d1  0   0   d2 |
//
// so the initial state alpha|gg> + gamma|ee> puts gamma^2 at a1 and alpha^2 at d2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "udleak/errors.hpp"
#include "udleak/integrals.hpp"
#include "udleak/linalg.hpp"
#include "udleak/model.hpp"

namespace udleak {

/// The eight X-state entries.
struct XElements {
  cplx a1, a2, b1, b2, c1, c2, d1, d2;

  ComplexMatrix4 matrix() const {
    ComplexMatrix4 m;
    m(0, 0) = a1;
    m(0, 3) = a2;
    m(1, 1) = b1;
    m(1, 2) = b2;
    m(2, 1) = c1;
    m(2, 2) = c2;
    m(3, 0) = d1;
    m(3, 3) = d2;
    return m;
  }

  static XElements from(const ComplexMatrix4& m) {
    return {m(0, 0), m(0, 3), m(1, 1), m(1, 2), m(2, 1), m(2, 2), m(3, 0), m(3, 3)};
  }
};

/// Zeroth-order entries of alpha|gg> + gamma|ee>.
inline XElements initial_elements(const InitialState& s) {
  const double a = s.alpha, g = s.gamma;
  return {g * g, g * a, 0.0, 0.0, 0.0, 0.0, a * g, a * a};
}

/// O(C^2) coefficients of the entries for real alpha, gamma; zeta is xi_AB,
/// M, Y and xi enter through their real parts.
inline XElements correction_elements(const InitialState& s, const DetectorPairConfig& pair,
                                     const IntegralSet& I) {
  const double a = s.alpha, g = s.gamma;
  const double ca2 = pair.coupling_a * pair.coupling_a;
  const double cb2 = pair.coupling_b * pair.coupling_b;
  const double cab = pair.coupling_a * pair.coupling_b;
  const cplx zeta = I.xi_ab.coeff;
  const cplx y = I.y_ab.coeff;
  const cplx ma = I.m_re_a.coeff, mb = I.m_re_b.coeff;
  const cplx p_ab = std::conj(I.p_ab_star.coeff);
  const cplx p_ab_star = I.p_ab_star.coeff;
  const cplx pp = I.p_ab_prime.coeff;
  const cplx pbp = I.p_bar_ab_prime.coeff;
  const cplx x = I.x_ab.coeff;
  XElements e;
  e.a1 = -g * g * (ca2 * I.p_dd_a.coeff + cb2 * I.p_dd_b.coeff) -
         a * g * cab * (std::conj(zeta) + zeta);
  e.a2 = -a * a * cab * zeta - g * g * cab * std::conj(y) - a * g * (ca2 * ma + cb2 * mb);
  e.b1 = a * a * ca2 * I.p_a.coeff + g * g * cb2 * I.p_dd_b.coeff +
         a * g * cab * (pp + std::conj(pp));
  e.b2 = a * g * ca2 * I.p_bar_prime_a.coeff + a * a * cab * p_ab + g * g * cab * std::conj(x) +
         g * a * cb2 * I.p_bar_b.coeff;
  e.c1 = a * g * ca2 * I.p_bar_a.coeff + a * g * cb2 * I.p_bar_prime_b.coeff + g * g * cab * x +
         a * a * cab * p_ab_star;
  e.c2 = g * g * ca2 * I.p_dd_a.coeff + a * a * cb2 * I.p_b.coeff +
         g * a * cab * (pbp + std::conj(pbp));
  e.d1 = -a * g * (ca2 * std::conj(ma) + cb2 * std::conj(mb)) - g * g * cab * y -
         a * a * cab * std::conj(zeta);
  e.d2 = -a * a * (ca2 * I.p_a.coeff + cb2 * I.p_b.coeff) - cab * a * g * (y + std::conj(y));
  return e;
}

/// Entries at a given value of delta(0): initial + t * correction.
inline XElements elements_at(const InitialState& s, const DetectorPairConfig& pair,
                             const IntegralSet& I, double t = 1.0) {
  const XElements z = initial_elements(s);
  const XElements c = correction_elements(s, pair, I);
  return {z.a1 + t * c.a1, z.a2 + t * c.a2, z.b1 + t * c.b1, z.b2 + t * c.b2,
          z.c1 + t * c.c1, z.c2 + t * c.c2, z.d1 + t * c.d1, z.d2 + t * c.d2};
}

/// max |C^2 coeff| over all entries, C_A C_B for cross terms.
inline double raw_perturbative_indicator(const DetectorPairConfig& pair, const IntegralSet& I) {
  const double ca2 = pair.coupling_a * pair.coupling_a;
  const double cb2 = pair.coupling_b * pair.coupling_b;
  const double cab = pair.coupling_a * pair.coupling_b;
  double worst = 0.0;
  for (auto e : kAllEntries) {
    double w = cab;
    switch (e) {
      case IntegralEntry::p_a:
      case IntegralEntry::p_dd_a:
      case IntegralEntry::p_bar_a:
      case IntegralEntry::p_bar_prime_a:
      case IntegralEntry::m_re_a: w = ca2; break;
      case IntegralEntry::p_b:
      case IntegralEntry::p_dd_b:
      case IntegralEntry::p_bar_b:
      case IntegralEntry::p_bar_prime_b:
      case IntegralEntry::m_re_b: w = cb2; break;
      default: break;
    }
    worst = std::max(worst, w * std::abs(I[e].coeff));
  }
  return worst;
}

inline constexpr double kPerturbativeWarn = 0.1;
inline constexpr double kPerturbativeFail = 1.0;

struct DensityDiagnostics {
  double hermiticity_residual = 0.0;
  double trace_residual = 0.0;
  double min_eigenvalue = 0.0;
  /// max |C^2 coeff|; divided by 2 pi when the corrections carry delta(0).
  double perturbative_indicator = 0.0;
  double raw_perturbative_indicator = 0.0;
  bool perturbative_ok() const { return perturbative_indicator <= kPerturbativeWarn; }
};

/// rho = base + delta(0)^p * correction. With p = 0 the matrix is finite;
/// with p = 1 `matrix()` is the stripped matrix (delta(0) -> 1).
class DensityMatrix4 {
 public:
  DensityMatrix4(ComplexMatrix4 base, ComplexMatrix4 correction, int delta0_power)
      : base_(base), correction_(correction), delta0_power_(delta0_power) {
    refresh(0.0);
  }

  const ComplexMatrix4& base() const noexcept { return base_; }
  const ComplexMatrix4& correction() const noexcept { return correction_; }
  int delta0_power() const noexcept { return delta0_power_; }
  const DensityDiagnostics& diagnostics() const noexcept { return diag_; }

  ComplexMatrix4 matrix() const { return base_ + correction_; }

  /// Finite matrix with delta(0) replaced by t.
  DensityMatrix4 at_delta0(double t) const {
    if (delta0_power_ == 0) return *this;
    DensityMatrix4 out(base_, correction_ * t, 0);
    out.diag_.raw_perturbative_indicator = diag_.raw_perturbative_indicator * t;
    out.diag_.perturbative_indicator = diag_.raw_perturbative_indicator * t;
    return out;
  }

  XElements elements() const { return XElements::from(matrix()); }

 private:
  friend DensityMatrix4 evolved_density(const InitialState&, const DetectorPairConfig&,
                                        const IntegralSet&);

  void refresh(double raw_indicator) {
    const ComplexMatrix4 m = matrix();
    diag_.hermiticity_residual = m.hermiticity_residual();
    diag_.trace_residual = std::abs(m.trace() - 1.0);
    diag_.raw_perturbative_indicator = raw_indicator;
    diag_.perturbative_indicator =
        delta0_power_ == 1 ? raw_indicator / (2.0 * M_PI) : raw_indicator;
    try {
      diag_.min_eigenvalue =
          hermitian_eigenvalues(m, std::max(1e-10, 1e-12 * m.max_abs()))[0];
    } catch (const Error&) {
      diag_.min_eigenvalue = NAN;
    }
  }

  ComplexMatrix4 base_;
  ComplexMatrix4 correction_;
  int delta0_power_ = 0;
  DensityDiagnostics diag_;
};

inline DensityMatrix4 initial_density(const InitialState& s) {
  return DensityMatrix4(initial_elements(s).matrix(), ComplexMatrix4{}, 0);
}

/// Second-order evolved matrix. Every non-zero entry of `ints` must carry the
/// delta(0) power of its mode (1 eternal, 0 gaussian).
inline DensityMatrix4 evolved_density(const InitialState& s, const DetectorPairConfig& pair,
                                      const IntegralSet& ints) {
  const int power = ints.mode == SwitchingKind::eternal ? 1 : 0;
  for (auto e : kAllEntries) {
    const RegulatedValue& v = ints[e];
    if (v.coeff != cplx{} && v.delta0_power != power) {
      std::ostringstream os;
      os << "entry " << to_string(e) << " has delta(0) power " << v.delta0_power << " but "
         << to_string(ints.mode) << " switching implies " << power;
      throw ModeMismatch(os.str());
    }
  }
  DensityMatrix4 rho(initial_elements(s).matrix(), correction_elements(s, pair, ints).matrix(),
                     power);
  rho.refresh(raw_perturbative_indicator(pair, ints));
  return rho;
}

/// As above, also checking that `ints` was produced for the scenario's switching.
inline DensityMatrix4 evolved_density(const ValidatedScenario& s, const IntegralSet& ints) {
  if (ints.mode != s.switching().kind) {
    throw ModeMismatch(std::string("integrals computed for ") + to_string(ints.mode) +
                       " switching, scenario uses " + to_string(s.switching().kind));
  }
  return evolved_density(s.state(), s.pair(), ints);
}

}  // namespace udleak
