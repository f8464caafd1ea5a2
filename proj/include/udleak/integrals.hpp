#pragma once

// Second-order correlation integrals of two static detectors.
//
// Every double time integral I = int int dtau dtau' chi(tau) chi(tau') f(tau, tau')
// is carried as a RegulatedValue. Eternal switching produces a factor delta(0)
// with delta(0) = (1/2pi) int dT over the sum variable T = tau + tau'; it is
// kept symbolically as delta0_power = 1 and never multiplied out.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "udleak/errors.hpp"
#include "udleak/model.hpp"
#include "udleak/quadrature.hpp"
#include "udleak/wightman.hpp"

namespace udleak {

struct RegulatedValue {
  std::complex<double> coeff{};
  int delta0_power = 0;
  double error = 0.0;  ///< estimated absolute error of coeff
};

/// coeff / (2 pi): the per-unit-time rate of a delta(0)-proportional value.
inline std::complex<double> rate(const RegulatedValue& v) {
  if (v.delta0_power != 1)
    throw NotDistributional("rate() needs a value proportional to delta(0)");
  return v.coeff / (2.0 * M_PI);
}

enum class IntegralEntry {
  p_a, p_b, p_dd_a, p_dd_b, p_bar_a, p_bar_b, p_bar_prime_a, p_bar_prime_b,
  m_re_a, m_re_b, p_ab_star, p_ab_prime, p_bar_ab_prime, x_ab, y_ab, xi_ab
};

inline constexpr std::array<IntegralEntry, 16> kAllEntries{
    IntegralEntry::p_a,           IntegralEntry::p_b,           IntegralEntry::p_dd_a,
    IntegralEntry::p_dd_b,        IntegralEntry::p_bar_a,       IntegralEntry::p_bar_b,
    IntegralEntry::p_bar_prime_a, IntegralEntry::p_bar_prime_b, IntegralEntry::m_re_a,
    IntegralEntry::m_re_b,        IntegralEntry::p_ab_star,     IntegralEntry::p_ab_prime,
    IntegralEntry::p_bar_ab_prime, IntegralEntry::x_ab,         IntegralEntry::y_ab,
    IntegralEntry::xi_ab};

inline const char* to_string(IntegralEntry e) {
  switch (e) {
    case IntegralEntry::p_a: return "p_a";
    case IntegralEntry::p_b: return "p_b";
    case IntegralEntry::p_dd_a: return "p_dd_a";
    case IntegralEntry::p_dd_b: return "p_dd_b";
    case IntegralEntry::p_bar_a: return "p_bar_a";
    case IntegralEntry::p_bar_b: return "p_bar_b";
    case IntegralEntry::p_bar_prime_a: return "p_bar_prime_a";
    case IntegralEntry::p_bar_prime_b: return "p_bar_prime_b";
    case IntegralEntry::m_re_a: return "m_re_a";
    case IntegralEntry::m_re_b: return "m_re_b";
    case IntegralEntry::p_ab_star: return "p_ab_star";
    case IntegralEntry::p_ab_prime: return "p_ab_prime";
    case IntegralEntry::p_bar_ab_prime: return "p_bar_ab_prime";
    case IntegralEntry::x_ab: return "x_ab";
    case IntegralEntry::y_ab: return "y_ab";
    case IntegralEntry::xi_ab: return "xi_ab";
  }
  return "?";
}

/// The correlation integrals. m_re_*, y_ab and xi_ab hold real parts only;
/// their imaginary parts are principal-value pieces that diverge with the
/// regulator and do not enter any entanglement measure.
struct IntegralSet {
  SwitchingKind mode = SwitchingKind::eternal;
  RegulatedValue p_a, p_b;
  RegulatedValue p_dd_a, p_dd_b;
  RegulatedValue p_bar_a, p_bar_b;
  RegulatedValue p_bar_prime_a, p_bar_prime_b;
  RegulatedValue m_re_a, m_re_b;
  RegulatedValue p_ab_star;       ///< P*_AB; P_AB is its conjugate
  RegulatedValue p_ab_prime;      ///< P'_AB
  RegulatedValue p_bar_ab_prime;  ///< Pbar'_AB
  RegulatedValue x_ab;
  RegulatedValue y_ab;
  RegulatedValue xi_ab;

  RegulatedValue& operator[](IntegralEntry e) { return const_cast<RegulatedValue&>(std::as_const(*this)[e]); }

  const RegulatedValue& operator[](IntegralEntry e) const {
    switch (e) {
      case IntegralEntry::p_a: return p_a;
      case IntegralEntry::p_b: return p_b;
      case IntegralEntry::p_dd_a: return p_dd_a;
      case IntegralEntry::p_dd_b: return p_dd_b;
      case IntegralEntry::p_bar_a: return p_bar_a;
      case IntegralEntry::p_bar_b: return p_bar_b;
      case IntegralEntry::p_bar_prime_a: return p_bar_prime_a;
      case IntegralEntry::p_bar_prime_b: return p_bar_prime_b;
      case IntegralEntry::m_re_a: return m_re_a;
      case IntegralEntry::m_re_b: return m_re_b;
      case IntegralEntry::p_ab_star: return p_ab_star;
      case IntegralEntry::p_ab_prime: return p_ab_prime;
      case IntegralEntry::p_bar_ab_prime: return p_bar_ab_prime;
      case IntegralEntry::x_ab: return x_ab;
      case IntegralEntry::y_ab: return y_ab;
      case IntegralEntry::xi_ab: return xi_ab;
    }
    return p_a;
  }

  double max_error() const {
    double worst = 0.0;
    for (auto e : kAllEntries) worst = std::max(worst, (*this)[e].error);
    return worst;
  }

  /// Largest |coeff| over all entries.
  double max_abs() const {
    double worst = 0.0;
    for (auto e : kAllEntries) worst = std::max(worst, std::abs((*this)[e].coeff));
    return worst;
  }
};

struct QuadratureSettings {
  double tol = 1e-8;                         ///< absolute, per entry
  double p_max = 0.0;                        ///< 0 selects 10 max(delta_e, 1/sigma) / c
  std::vector<double> epsilons{4e-3, 2e-3, 1e-3, 5e-4};  ///< regulators extrapolated to 0
  double window = 0.0;                       ///< time cutoff for Y, xi; 0 selects 14 sigma
  int max_subdivisions = 4000;
};

inline void validate_settings(const QuadratureSettings& q) {
  std::vector<std::string> bad;
  if (!(q.tol > 0.0)) bad.emplace_back("quad_tol");
  if (!(q.p_max >= 0.0) || !std::isfinite(q.p_max)) bad.emplace_back("p_max");
  if (q.epsilons.empty()) bad.emplace_back("epsilon");
  if (!(q.window >= 0.0)) bad.emplace_back("window");
  if (!bad.empty()) throw ConfigError(bad, "invalid quadrature settings: " + bad.front());
  for (double e : q.epsilons) detail::check_regulator(e);
}

// ---------------------------------------------------------------- eternal

/// Closed forms for chi = 1. Only P'', Re M and X survive, all proportional
/// to delta(0); everything else is exactly zero. Zero at and below threshold.
inline IntegralSet eternal_integral_set(const ValidatedScenario& s) {
  if (s.switching().kind != SwitchingKind::eternal)
    throw UnsupportedSwitching("eternal_integral_set needs eternal switching");
  IntegralSet out;
  out.mode = SwitchingKind::eternal;
  const double c3 = s.c() * s.c() * s.c();
  const double root = s.on_shell_root();
  const double p_dd = root / (2.0 * c3);
  const double m_re = root / (4.0 * c3);
  const double x = p_dd * sinc(root * s.pair().distance / s.c());
  out.p_dd_a = out.p_dd_b = {p_dd, 1, 0.0};
  out.m_re_a = out.m_re_b = {m_re, 1, 0.0};
  out.x_ab = {x, 1, 0.0};
  return out;
}

// --------------------------------------------------------------- gaussian

namespace detail {

inline double default_p_max(const ValidatedScenario& s) {
  return 10.0 * std::max(s.delta_e(), 1.0 / s.switching().sigma) / s.c();
}

/// (1/4 pi^2) int_0^pmax p^2/E w(p) F(E) dp with a break at the resonant momentum.
template <class F>
QuadResult<double> radial_integral(const ValidatedScenario& s, double p_max, double d,
                                   const QuadratureSettings& q, F&& weight) {
  const ModeKernel mk{s.mass(), s.c()};
  auto f = [&](double p) {
    const double e = mk.energy(p);
    return mk.measure(p) * sinc(p * d) * weight(e) / (4.0 * M_PI * M_PI);
  };
  AdaptiveOptions opt;
  opt.abs_tol = q.tol * 1e-2;
  opt.rel_tol = 1e-12;
  opt.max_subdivisions = q.max_subdivisions;
  std::vector<double> breaks;
  if (s.channel_open()) breaks.push_back(s.resonant_momentum());
  return integrate<double>(f, 0.0, p_max, opt, breaks);
}

/// Massless Wightman function with the same regulator, the subtraction term
/// for the light-cone singularity.
inline std::complex<double> massless_kernel(double c, double eps, double s, double r) {
  const std::complex<double> tau(s, -eps);
  return -1.0 / (4.0 * M_PI * M_PI * c * (c * c * tau * tau - r * r));
}

/// int_0^S of massless_kernel ds, in closed form.
inline std::complex<double> massless_kernel_integral(double c, double eps, double big_s,
                                                     double r) {
  using C = std::complex<double>;
  const C t0(0.0, -eps), t1(big_s, -eps);
  if (r == 0.0) return (1.0 / t1 - 1.0 / t0) / (4.0 * M_PI * M_PI * c * c * c);
  auto prim = [&](C t) { return std::log(c * t - r) - std::log(c * t + r); };
  return -(prim(t1) - prim(t0)) / (8.0 * M_PI * M_PI * c * c * r);
}

/// Re int_0^S exp(-s^2 / 4 sigma^2) G_eps(s, d) ds.
inline QuadResult<double> time_ordered_profile(const ValidatedScenario& s, double eps,
                                               double big_s, const QuadratureSettings& q,
                                               double abs_tol) {
  const double sigma = s.switching().sigma;
  const double c = s.c();
  const double d = s.pair().distance;
  const double s0 = d / c;
  const PositionKernel k{s.mass(), c, eps};
  auto w = [&](double t) { return std::exp(-t * t / (4.0 * sigma * sigma)); };
  const double w0 = w(s0);
  auto f = [&](double t) {
    return w(t) * wightman_position(k, t, d).real() - w0 * massless_kernel(c, eps, t, d).real();
  };
  std::vector<double> breaks{s0};
  for (double k_eps : {1.0, 10.0, 100.0, 1000.0}) {
    breaks.push_back(s0 + k_eps * eps);
    breaks.push_back(s0 - k_eps * eps);
    breaks.push_back(k_eps * eps);
  }
  AdaptiveOptions opt;
  opt.abs_tol = abs_tol;
  opt.rel_tol = 1e-13;
  opt.max_subdivisions = q.max_subdivisions;
  auto r = integrate<double>(f, 0.0, big_s, opt, breaks);
  r.value += w0 * massless_kernel_integral(c, eps, big_s, d).real();
  return r;
}

inline double neville_at_zero(const double* x, const double* y, std::size_t n) {
  std::vector<double> p(y, y + n);
  for (std::size_t level = 1; level < n; ++level)
    for (std::size_t i = 0; i + level < n; ++i)
      p[i] = (x[i + level] * p[i] - x[i] * p[i + 1]) / (x[i + level] - x[i]);
  return p[0];
}

/// Polynomial extrapolation of (x_i, y_i) to x = 0, x descending. Returns the
/// value and its distance to the estimate without the largest x.
inline std::pair<double, double> extrapolate_to_zero(const std::vector<double>& x,
                                                     const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double full = neville_at_zero(x.data(), y.data(), n);
  if (n == 1) return {full, 0.0};
  const double lower = neville_at_zero(x.data() + 1, y.data() + 1, n - 1);
  return {full, std::abs(full - lower)};
}

}  // namespace detail

/// Re Y_AB (= Re xi_AB for even chi) for Gaussian switching, from the
/// position-space kernel: after the exact sum-variable integral,
/// Y = 2 sigma sqrt(pi) exp(-dE^2 sigma^2) int_0^inf exp(-s^2/4sigma^2) G(s, d) ds.
/// Evaluated at each regulator in q.epsilons and extrapolated to zero.
inline RegulatedValue gaussian_time_ordered(const ValidatedScenario& s,
                                            const QuadratureSettings& q) {
  const double sigma = s.switching().sigma;
  const double pref =
      2.0 * sigma * std::sqrt(M_PI) * std::exp(-s.delta_e() * s.delta_e() * sigma * sigma);
  const double s0 = s.pair().distance / s.c();
  const double big_s = q.window > 0.0 ? q.window : std::max(14.0 * sigma, s0 + 14.0 * sigma);
  std::vector<double> eps = q.epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<double> vals;
  double quad_err = 0.0;
  bool ok = true;
  const double inner_tol = pref > 0.0 ? 1e-2 * q.tol / pref : 1e-12;
  for (double e : eps) {
    auto r = detail::time_ordered_profile(s, e, big_s, q, std::min(inner_tol, 1e-8));
    ok = ok && r.converged;
    vals.push_back(pref * r.value);
    quad_err = std::max(quad_err, pref * r.error);
  }
  if (!ok) throw QuadratureNonConvergence("y_ab", "time-ordered profile integral did not converge");
  const auto [value, extrap_err] = detail::extrapolate_to_zero(eps, vals);
  return {value, 0, quad_err + extrap_err};
}

/// All entries for Gaussian switching. Non-time-ordered entries factorise per
/// mode into products of switching_fourier values; Re M uses Re M = (P + P'')/2.
inline IntegralSet gaussian_integral_set(const ValidatedScenario& s,
                                         const QuadratureSettings& q = {}) {
  if (s.switching().kind != SwitchingKind::gaussian)
    throw UnsupportedSwitching("gaussian_integral_set needs gaussian switching");
  validate_settings(q);
  const double de = s.delta_e();
  const double d = s.pair().distance;
  const double p_max = q.p_max > 0.0 ? q.p_max : detail::default_p_max(s);
  const SwitchingSpec& sw = s.switching();
  auto chi = [&](double w) { return switching_fourier(sw, w).real(); };

  IntegralSet out;
  out.mode = SwitchingKind::gaussian;
  std::string worst_entry;
  double worst_err = 0.0;
  bool failed = false;
  auto run = [&](IntegralEntry e, double dist, auto weight) {
    auto r = detail::radial_integral(s, p_max, dist, q, weight);
    if (!r.converged || r.error > q.tol) {
      failed = true;
      if (r.error >= worst_err) worst_entry = to_string(e);
    }
    worst_err = std::max(worst_err, r.error);
    out[e] = {r.value, 0, r.error};
  };

  run(IntegralEntry::p_a, 0.0, [&](double e) { return chi(de + e) * chi(de + e); });
  run(IntegralEntry::p_dd_a, 0.0, [&](double e) { return chi(e - de) * chi(e - de); });
  run(IntegralEntry::p_bar_a, 0.0, [&](double e) { return chi(e - de) * chi(e + de); });
  run(IntegralEntry::p_ab_star, d, [&](double e) { return chi(de + e) * chi(de + e); });
  run(IntegralEntry::p_ab_prime, d, [&](double e) { return chi(de + e) * chi(de - e); });
  run(IntegralEntry::x_ab, d, [&](double e) { return chi(e - de) * chi(e - de); });
  if (failed) {
    throw QuadratureNonConvergence(worst_entry, "momentum quadrature missed tolerance for " +
                                                    worst_entry);
  }
  out.p_b = out.p_a;
  out.p_dd_b = out.p_dd_a;
  out.p_bar_b = out.p_bar_a;
  out.p_bar_prime_a = out.p_bar_prime_b = {std::conj(out.p_bar_a.coeff), 0, out.p_bar_a.error};
  out.p_bar_ab_prime = out.p_ab_prime;
  const double m_re = 0.5 * (out.p_a.coeff.real() + out.p_dd_a.coeff.real());
  out.m_re_a = out.m_re_b = {m_re, 0, 0.5 * (out.p_a.error + out.p_dd_a.error)};

  out.y_ab = gaussian_time_ordered(s, q);
  if (!(out.y_ab.error <= q.tol)) {
    std::ostringstream os;
    os << "time-ordered cross term error " << out.y_ab.error << " exceeds tolerance " << q.tol;
    throw QuadratureNonConvergence("y_ab", os.str());
  }
  out.xi_ab = out.y_ab;
  return out;
}

/// eternal_integral_set or gaussian_integral_set according to the scenario.
inline IntegralSet integral_set(const ValidatedScenario& s, const QuadratureSettings& q = {}) {
  if (s.switching().kind == SwitchingKind::eternal) return eternal_integral_set(s);
  return gaussian_integral_set(s, q);
}

// ----------------------------------------------------------------- oracle

struct OracleSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;  ///< on the final value; inner levels scale from it
  int max_subdivisions = 2000;
};

namespace detail {

struct OracleShape {
  bool cross = false;         ///< kernel carries sinc(p d)
  bool time_ordered = false;  ///< theta(tau - tau') restriction or |tau - tau'|
  bool real_part = false;     ///< take the real part per mode
};

inline OracleShape oracle_shape(IntegralEntry e) {
  switch (e) {
    case IntegralEntry::m_re_a:
    case IntegralEntry::m_re_b: return {false, true, true};
    case IntegralEntry::p_ab_star:
    case IntegralEntry::p_ab_prime:
    case IntegralEntry::p_bar_ab_prime:
    case IntegralEntry::x_ab: return {true, false, false};
    case IntegralEntry::y_ab:
    case IntegralEntry::xi_ab: return {true, true, true};
    default: return {false, false, false};
  }
}

/// Integrand per mode of energy E, without the radial measure. tau is the
/// first (unprimed) time, tau' the second; for cross terms tau = tau_A and
/// tau' = tau_B'.
inline std::complex<double> oracle_integrand(IntegralEntry e, double de, double en, double tau,
                                             double taup) {
  using C = std::complex<double>;
  auto ex = [](double phase) { return std::exp(C(0.0, phase)); };
  const double diff = tau - taup;
  const double sum = tau + taup;
  switch (e) {
    case IntegralEntry::p_a:
    case IntegralEntry::p_b:  // G(x', x): e^{-iE(tau' - tau)}
      return ex(de * diff) * ex(-en * (taup - tau));
    case IntegralEntry::p_dd_a:
    case IntegralEntry::p_dd_b: return ex(-de * diff) * ex(-en * (taup - tau));
    case IntegralEntry::p_bar_a:
    case IntegralEntry::p_bar_b: return ex(-de * sum) * ex(-en * (taup - tau));
    case IntegralEntry::p_bar_prime_a:
    case IntegralEntry::p_bar_prime_b: return ex(de * sum) * ex(-en * (taup - tau));
    case IntegralEntry::m_re_a:
    case IntegralEntry::m_re_b:  // theta(tau - tau') (G(x', x) + G(x, x'))
      if (diff < 0.0) return 0.0;
      return ex(de * diff) * (ex(-en * (taup - tau)) + ex(-en * diff));
    case IntegralEntry::p_ab_star:  // G(x_A, x_B')
      return ex(de * (taup - tau)) * ex(-en * diff);
    case IntegralEntry::p_ab_prime: return ex(-de * sum) * ex(-en * diff);
    case IntegralEntry::p_bar_ab_prime:  // G(x_B', x_A)
      return ex(-de * sum) * ex(-en * (taup - tau));
    case IntegralEntry::x_ab: return ex(de * (taup - tau)) * ex(-en * (taup - tau));
    case IntegralEntry::y_ab:  // iG_F: e^{-iE|tau - tau'|}
      return ex(-de * sum) * ex(-en * std::abs(diff));
    case IntegralEntry::xi_ab: return ex(de * sum) * ex(-en * std::abs(diff));
  }
  return 0.0;
}

inline QuadResult<std::complex<double>> oracle_once(IntegralEntry entry,
                                                    const ValidatedScenario& s, double window,
                                                    double p_max, double eps,
                                                    const OracleSettings& o) {
  using C = std::complex<double>;
  const OracleShape shape = oracle_shape(entry);
  const ModeKernel mk{s.mass(), s.c()};
  const double de = s.delta_e();
  const double d = s.pair().distance;
  const SwitchingSpec sw = s.switching();
  const double span = 2.0 * window;
  const bool half_line = shape.time_ordered && !shape.cross;  // theta(s) for M
  bool ok = true;

  auto time_part = [&](double en) -> C {
    auto over_t = [&](double sv) -> C {
      const double t_max = span - std::abs(sv);
      auto g = [&](double tv) -> C {
        const double tau = 0.5 * (tv + sv);
        const double taup = 0.5 * (tv - sv);
        return sw.profile(tau) * sw.profile(taup) * oracle_integrand(entry, de, en, tau, taup);
      };
      AdaptiveOptions opt;
      opt.abs_tol = o.abs_tol * 1e-2;
      opt.rel_tol = o.rel_tol * 1e-1;
      opt.max_subdivisions = o.max_subdivisions;
      auto r = integrate<C>(g, -t_max, t_max, opt, {0.0});
      ok = ok && r.converged;
      return r.value;
    };
    AdaptiveOptions opt;
    opt.abs_tol = o.abs_tol * 1e-1;
    opt.rel_tol = o.rel_tol;
    opt.max_subdivisions = o.max_subdivisions;
    auto r = half_line ? integrate<C>(over_t, 0.0, span, opt)
                       : integrate<C>(over_t, -span, span, opt, {0.0});
    ok = ok && r.converged;
    return 0.5 * r.value;  // dtau dtau' = dT ds / 2
  };

  auto radial = [&](double p) -> C {
    const double en = mk.energy(p);
    const double meas = mk.measure(p) * (shape.cross ? sinc(p * d) : 1.0) *
                        std::exp(-en * eps) / (4.0 * M_PI * M_PI);
    C v = meas * time_part(en);
    if (shape.real_part) v = v.real();
    return v;
  };
  AdaptiveOptions opt;
  opt.abs_tol = o.abs_tol;
  opt.rel_tol = o.rel_tol;
  opt.max_subdivisions = o.max_subdivisions;
  std::vector<double> breaks;
  if (s.channel_open() && s.resonant_momentum() < p_max) breaks.push_back(s.resonant_momentum());
  auto r = integrate<C>(radial, 0.0, p_max, opt, breaks);
  r.converged = r.converged && ok;
  return r;
}

}  // namespace detail

/// Brute-force evaluation of one entry straight from its defining double time
/// integral: radial momentum outermost, then the time difference, then the
/// time sum, each adaptive. Times are confined to [-window, window] and momenta
/// to [0, p_max]. eps > 0 damps each mode by exp(-E eps) and the result is
/// extrapolated from eps and eps/2 to zero; eps = 0 applies no damping.
inline QuadResult<std::complex<double>> oracle_quadrature(IntegralEntry entry,
                                                          const ValidatedScenario& s,
                                                          double window, double p_max,
                                                          double eps,
                                                          const OracleSettings& o = {}) {
  if (!(window > 0.0) || !(p_max > 0.0) || !(eps >= 0.0)) {
    std::vector<std::string> bad;
    if (!(window > 0.0)) bad.emplace_back("window");
    if (!(p_max > 0.0)) bad.emplace_back("p_max");
    if (!(eps >= 0.0)) bad.emplace_back("epsilon");
    throw ConfigError(bad, "oracle_quadrature needs window > 0, p_max > 0, epsilon >= 0");
  }
  auto fail_if = [&](const QuadResult<std::complex<double>>& r) {
    if (!r.converged)
      throw QuadratureNonConvergence(to_string(entry), "oracle quadrature did not converge");
  };
  auto r1 = detail::oracle_once(entry, s, window, p_max, eps, o);
  fail_if(r1);
  if (eps == 0.0) return r1;
  auto r2 = detail::oracle_once(entry, s, window, p_max, 0.5 * eps, o);
  fail_if(r2);
  QuadResult<std::complex<double>> out;
  out.value = 2.0 * r2.value - r1.value;
  out.error = 2.0 * r2.error + r1.error + std::abs(r2.value - r1.value);
  out.evaluations = r1.evaluations + r2.evaluations;
  return out;
}

}  // namespace udleak
