#pragma once

// Negativity and concurrence of the evolved pair, in closed form and from the
// numeric 4x4 pipeline, and the per-unit-time leakage rates for eternal
// switching.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <optional>
#include <vector>

#include "udleak/density.hpp"
#include "udleak/errors.hpp"
#include "udleak/integrals.hpp"
#include "udleak/linalg.hpp"
#include "udleak/model.hpp"

namespace udleak {

inline constexpr double kMatrixTol = 1e-10;

enum class Provenance { closed_form, numeric };

inline const char* to_string(Provenance p) {
  return p == Provenance::closed_form ? "closed_form" : "numeric";
}

struct EigenList {
  std::array<double, 4> values{};
  Provenance provenance = Provenance::numeric;
};

namespace detail {

inline void require_finite(const DensityMatrix4& rho, const char* what) {
  if (rho.delta0_power() != 0) {
    throw ModeMismatch(std::string(what) +
                       " needs a finite matrix; use at_delta0() on eternal results");
  }
}

}  // namespace detail

struct NegativityResult {
  double negativity = 0.0;
  std::array<double, 4> eigenvalues{};  ///< of rho^{T_B}, ascending
};

/// Sum of |negative eigenvalues| of the partial transpose.
inline NegativityResult negativity_numeric(const ComplexMatrix4& rho) {
  NegativityResult out;
  out.eigenvalues = hermitian_eigenvalues(partial_transpose_b(rho), kMatrixTol);
  for (double l : out.eigenvalues)
    if (l < 0.0) out.negativity -= l;
  return out;
}

inline NegativityResult negativity_numeric(const DensityMatrix4& rho) {
  detail::require_finite(rho, "negativity_numeric");
  return negativity_numeric(rho.matrix());
}

struct ConcurrenceResult {
  double concurrence = 0.0;
  std::array<double, 4> lambdas{};  ///< descending
};

inline double wootters_combination(const std::array<double, 4>& l) {
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

inline ConcurrenceResult concurrence_numeric(const ComplexMatrix4& rho) {
  ConcurrenceResult out;
  out.lambdas = wootters_lambdas(rho, kMatrixTol);
  out.concurrence = wootters_combination(out.lambdas);
  return out;
}

inline ConcurrenceResult concurrence_numeric(const DensityMatrix4& rho) {
  detail::require_finite(rho, "concurrence_numeric");
  return concurrence_numeric(rho.matrix());
}

// ------------------------------------------------------------ closed forms

/// PT eigenvalues lambda_1..4. lambda_1,2 come from the {b1, c2} block,
/// lambda_3,4 from the {a1, d2} block. The sign of the square root in
/// lambda_1,2 follows sign(alpha gamma), so lambda_2 is the negative one for
/// equal signs and lambda_1 for opposite signs; lambda_3 is the root nearer a1.
struct PtEigenvalues {
  std::array<double, 4> exact{};     ///< 2x2 block formulas
  std::array<double, 4> expanded{};  ///< first order in C^2
  int negative_index = 1;            ///< 0 for lambda_1, 1 for lambda_2
};

inline PtEigenvalues pt_eigenvalues_closed(const XElements& x, const InitialState& st,
                                           const DetectorPairConfig& pair,
                                           const IntegralSet& I) {
  PtEigenvalues out;
  const double sgn = st.alpha * st.gamma < 0.0 ? -1.0 : 1.0;
  out.negative_index = sgn < 0.0 ? 0 : 1;

  const double b1 = x.b1.real(), c2 = x.c2.real();
  const double r12 = std::sqrt((b1 - c2) * (b1 - c2) + 4.0 * (x.a2 * x.d1).real());
  out.exact[0] = 0.5 * (b1 + c2 + sgn * r12);
  out.exact[1] = 0.5 * (b1 + c2 - sgn * r12);

  const double a1 = x.a1.real(), d2 = x.d2.real();
  const double s34 = a1 >= d2 ? 1.0 : -1.0;
  const double r34 = std::sqrt((a1 - d2) * (a1 - d2) + 4.0 * (x.b2 * x.c1).real());
  out.exact[2] = 0.5 * (a1 + d2 + s34 * r34);
  out.exact[3] = 0.5 * (a1 + d2 - s34 * r34);

  const double a = st.alpha, g = st.gamma;
  const double ca2 = pair.coupling_a * pair.coupling_a;
  const double cb2 = pair.coupling_b * pair.coupling_b;
  const double cab = pair.coupling_a * pair.coupling_b;
  const double shift =
      (a * a * cab * I.xi_ab.coeff + g * g * cab * I.y_ab.coeff +
       a * g * (ca2 * I.m_re_a.coeff + cb2 * I.m_re_b.coeff))
          .real();
  const double centre = 0.5 * (b1 + c2);
  out.expanded[0] = centre + (a * g - shift);
  out.expanded[1] = centre - (a * g - shift);
  out.expanded[2] = a1;
  out.expanded[3] = d2;
  return out;
}

inline PtEigenvalues pt_eigenvalues_closed(const InitialState& st, const DetectorPairConfig& pair,
                                           const IntegralSet& I, double delta0 = 1.0) {
  return pt_eigenvalues_closed(elements_at(st, pair, I, delta0), st, pair, I);
}

/// Negativity from the exact block eigenvalues.
inline double negativity_closed(const PtEigenvalues& l) {
  double n = 0.0;
  for (double v : l.exact)
    if (v < 0.0) n -= v;
  return n;
}

struct ConcurrenceClosed {
  double concurrence = 0.0;          ///< from `expanded`
  std::array<double, 4> expanded{};  ///< lambda'_1..4 to first order in C^2
  std::array<double, 4> exact{};     ///< block formulas, descending
};

namespace detail {

/// sqrt of the 2x2-block eigenvalues of rho rho~ for an X-state block with
/// diagonal (p, q) and off-diagonals (u, v):
/// sqrt(((|u|^2 + |v|^2 + 2pq) +- sqrt((|u|^2 - |v|^2)^2 + 4pq(|u|^2 + |v|^2 + 2 Re(uv)))) / 2).
inline std::pair<double, double> wootters_block(double p, double q, cplx u, cplx v) {
  const double nu = std::norm(u), nv = std::norm(v);
  const double pq = p * q;
  const double disc = (nu - nv) * (nu - nv) + 4.0 * pq * (nu + nv + 2.0 * (u * v).real());
  const double root = std::sqrt(std::max(0.0, disc));
  const double hi = 0.5 * (nu + nv + 2.0 * pq + root);
  const double lo = 0.5 * (nu + nv + 2.0 * pq - root);
  return {std::sqrt(std::max(0.0, hi)), std::sqrt(std::max(0.0, lo))};
}

}  // namespace detail

/// lambda'_1 = 2|alpha gamma| (1 - sum C^2 Re M / 2 - sum C^2 P'' / 4), lambda'_2 = 0,
/// lambda'_3,4 = C_A C_B gamma^2 (sqrt(P''_A P''_B) +- |X_AB|). The expansion
/// keeps only P'', Re M and X, which are the only survivors for eternal
/// switching.
inline ConcurrenceClosed concurrence_closed(const InitialState& st, const DetectorPairConfig& pair,
                                            const IntegralSet& I, double delta0 = 1.0) {
  const double ca2 = pair.coupling_a * pair.coupling_a;
  const double cb2 = pair.coupling_b * pair.coupling_b;
  const double cab = pair.coupling_a * pair.coupling_b;
  const double pa = I.p_dd_a.coeff.real() * delta0;
  const double pb = I.p_dd_b.coeff.real() * delta0;
  const double ma = I.m_re_a.coeff.real() * delta0;
  const double mb = I.m_re_b.coeff.real() * delta0;
  const double x = std::abs(I.x_ab.coeff) * delta0;
  const double geo = std::sqrt(std::max(0.0, pa * pb));
  const double slack = 1e-12 * std::max(1.0, geo) + (I.x_ab.error + I.p_dd_a.error) * delta0;
  if (x > geo + slack) {
    std::ostringstream os;
    os << "|X_AB| = " << x << " exceeds sqrt(P''_A P''_B) = " << geo;
    throw BranchViolation(os.str());
  }
  const double xc = std::min(x, geo);
  const double g2 = st.gamma * st.gamma;
  ConcurrenceClosed out;
  out.expanded[0] = 2.0 * st.abs_alpha_gamma() *
                    (1.0 - 0.5 * (ca2 * ma + cb2 * mb) - 0.25 * (ca2 * pa + cb2 * pb));
  out.expanded[1] = 0.0;
  out.expanded[2] = cab * g2 * (geo + xc);
  out.expanded[3] = cab * g2 * (geo - xc);
  out.concurrence = wootters_combination(out.expanded);

  const XElements e = elements_at(st, pair, I, delta0);
  const auto [l1, l2] = detail::wootters_block(e.a1.real(), e.d2.real(), e.a2, e.d1);
  const auto [l3, l4] = detail::wootters_block(e.b1.real(), e.c2.real(), e.b2, e.c1);
  out.exact = {l1, l2, l3, l4};
  std::sort(out.exact.begin(), out.exact.end(), std::greater<>());
  return out;
}

// ------------------------------------------------------------------ rates

struct LeakageRates {
  double negativity_rate = 0.0;   ///< d(-N)/dt, per unit time
  double concurrence_rate = 0.0;  ///< d(-C)/dt, per unit time
};

namespace detail {

inline void require_eternal(const IntegralSet& I, const char* what) {
  if (I.mode != SwitchingKind::eternal)
    throw NotDistributional(std::string(what) + " needs eternal switching integrals");
}

}  // namespace detail

/// Closed-form rates from the first-order shifts of the negative PT eigenvalue
/// and of the Wootters combination, each divided by 2 pi:
///   dN = gamma^2 (C_A^2 P''_A + C_B^2 P''_B) / 2 + |alpha gamma| (C_A^2 M_A + C_B^2 M_B)
///   dC = |alpha gamma| (sum C^2 M + sum C^2 P'' / 2) + 2 C_A C_B gamma^2 sqrt(P''_A P''_B)
/// Both vanish for a product state, whose measures are already zero.
inline LeakageRates leakage_rates(const InitialState& st, const DetectorPairConfig& pair,
                                  const IntegralSet& I) {
  detail::require_eternal(I, "leakage_rates");
  LeakageRates out;
  const double ag = st.abs_alpha_gamma();
  if (ag == 0.0) return out;
  const double ca2 = pair.coupling_a * pair.coupling_a;
  const double cb2 = pair.coupling_b * pair.coupling_b;
  const double cab = pair.coupling_a * pair.coupling_b;
  const double g2 = st.gamma * st.gamma;
  const double pa = I.p_dd_a.coeff.real(), pb = I.p_dd_b.coeff.real();
  const double ma = I.m_re_a.coeff.real(), mb = I.m_re_b.coeff.real();
  const double dn = 0.5 * g2 * (ca2 * pa + cb2 * pb) + ag * (ca2 * ma + cb2 * mb);
  const double dc =
      ag * ((ca2 * ma + cb2 * mb) + 0.5 * (ca2 * pa + cb2 * pb)) + 2.0 * cab * g2 * std::sqrt(pa * pb);
  out.negativity_rate = dn / (2.0 * M_PI);
  out.concurrence_rate = dc / (2.0 * M_PI);
  return out;
}

namespace detail {

/// One-sided derivative at 0 of f by Richardson extrapolation of forward
/// differences with steps h0 / 2^k, k < levels.
template <class F>
double richardson_derivative(F&& f, double h0, int levels = 5) {
  const double f0 = f(0.0);
  std::vector<std::vector<double>> r(levels, std::vector<double>(levels, 0.0));
  double h = h0;
  for (int k = 0; k < levels; ++k, h *= 0.5) {
    r[k][0] = (f(h) - f0) / h;
    double pow2 = 1.0;
    for (int j = 1; j <= k; ++j) {
      pow2 *= 2.0;
      r[k][j] = r[k][j - 1] + (r[k][j - 1] - r[k - 1][j - 1]) / (pow2 - 1.0);
    }
  }
  return r[levels - 1][levels - 1];
}

}  // namespace detail

/// Rates from the numeric pipeline: N and C of the stripped matrix
/// rho(t) = rho_0 + t * correction, differentiated at t = 0.
inline LeakageRates leakage_rates_numeric(const InitialState& st, const DetectorPairConfig& pair,
                                          const IntegralSet& I) {
  detail::require_eternal(I, "leakage_rates_numeric");
  const DensityMatrix4 rho = evolved_density(st, pair, I);
  const double raw = rho.diagnostics().raw_perturbative_indicator;
  const double h0 = 1e-3 / (raw > 0.0 ? raw : 1.0);
  auto n_of = [&](double t) { return negativity_numeric(rho.at_delta0(t)).negativity; };
  auto c_of = [&](double t) { return concurrence_numeric(rho.at_delta0(t)).concurrence; };
  LeakageRates out;
  out.negativity_rate = -detail::richardson_derivative(n_of, h0) / (2.0 * M_PI);
  out.concurrence_rate = -detail::richardson_derivative(c_of, h0) / (2.0 * M_PI);
  return out;
}

// ----------------------------------------------------------------- report

struct EntanglementReport {
  double initial_negativity = 0.0;
  double initial_concurrence = 0.0;
  EigenList pt_closed{{}, Provenance::closed_form};
  EigenList pt_numeric{{}, Provenance::numeric};
  EigenList wootters_closed{{}, Provenance::closed_form};
  EigenList wootters_numeric{{}, Provenance::numeric};
  int negative_index = 1;
  std::optional<double> negativity;        ///< gaussian only
  std::optional<double> concurrence;       ///< gaussian only
  std::optional<double> negativity_rate;   ///< eternal only
  std::optional<double> concurrence_rate;  ///< eternal only
  bool shielded = false;
  double agreement = 0.0;              ///< max closed-form vs numeric discrepancy
  double negativity_agreement = 0.0;   ///< rate or measure, closed vs numeric
  double concurrence_agreement = 0.0;  ///< rate or measure, closed vs numeric
  DensityDiagnostics diagnostics;
  bool perturbative_ok = true;
};

/// Full analysis of one scenario given its integrals. Eigenvalue lists refer to
/// the stripped matrix (delta(0) -> 1) in eternal mode.
inline EntanglementReport analyze(const ValidatedScenario& s, const IntegralSet& I) {
  const InitialState& st = s.state();
  const DetectorPairConfig& pair = s.pair();
  const DensityMatrix4 rho = evolved_density(s, I);
  const DensityMatrix4 finite = rho.at_delta0(1.0);

  EntanglementReport rep;
  rep.initial_negativity = st.abs_alpha_gamma();
  rep.initial_concurrence = 2.0 * st.abs_alpha_gamma();
  rep.shielded = pair.coupling_a == 0.0 || pair.coupling_b == 0.0;
  rep.diagnostics = rho.diagnostics();
  rep.perturbative_ok = rep.diagnostics.perturbative_ok();

  const PtEigenvalues pt = pt_eigenvalues_closed(st, pair, I);
  rep.pt_closed.values = pt.exact;
  rep.negative_index = pt.negative_index;
  const NegativityResult nn = negativity_numeric(finite);
  rep.pt_numeric.values = nn.eigenvalues;

  const ConcurrenceClosed cc = concurrence_closed(st, pair, I);
  rep.wootters_closed.values = cc.exact;
  const ConcurrenceResult cn = concurrence_numeric(finite);
  rep.wootters_numeric.values = cn.lambdas;

  if (I.mode == SwitchingKind::eternal) {
    const LeakageRates closed = leakage_rates(st, pair, I);
    const LeakageRates numeric = leakage_rates_numeric(st, pair, I);
    rep.negativity_rate = closed.negativity_rate;
    rep.concurrence_rate = closed.concurrence_rate;
    rep.negativity_agreement = std::abs(closed.negativity_rate - numeric.negativity_rate);
    rep.concurrence_agreement = std::abs(closed.concurrence_rate - numeric.concurrence_rate);
  } else {
    const double n_closed = negativity_closed(pt);
    const double c_closed = wootters_combination(cc.exact);
    rep.negativity = std::max(0.0, nn.negativity);
    rep.concurrence = std::max(0.0, cn.concurrence);
    rep.negativity_agreement = std::abs(n_closed - nn.negativity);
    rep.concurrence_agreement = std::abs(c_closed - cn.concurrence);
  }
  rep.agreement = std::max(rep.negativity_agreement, rep.concurrence_agreement);
  return rep;
}

}  // namespace udleak
