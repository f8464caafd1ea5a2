// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "udleak/udleak.hpp"

using namespace udleak;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("[%s] %d %s: %s; %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), dt, budget_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

ValidatedScenario eternal(double de, double m, double d, double ca, double cb,
                          InitialState st = InitialState::bell(), double c = 1.0) {
  return validate_config({de, ca, cb, d}, {m}, st, SwitchingSpec::eternal(), {c});
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// 27-point grid shared by the negativity and concurrence pipelines.
std::vector<ValidatedScenario> grid(int gamma_sign) {
  std::vector<ValidatedScenario> out;
  for (double de : {0.5, 1.0, 2.0})
    for (double m : {0.0, 0.3, 0.45})
      for (double d : {0.0, 1.0, 4.0})
        out.push_back(eternal(de, m, d, 0.01, 0.01,
                              InitialState::from_alpha(1.0 / std::sqrt(2.0), gamma_sign)));
  return out;
}

Outcome eternal_closed_forms() {
  struct Row { double de, m, p_dd, m_re; };
  const Row rows[] = {{1, 0, 0.5, 0.25}, {2, 1, std::sqrt(3.0) / 2, std::sqrt(3.0) / 4}, {1, 1, 0, 0}};
  double worst = 0.0;
  for (const Row& r : rows) {
    const IntegralSet I = eternal_integral_set(eternal(r.de, r.m, 0.0, 0.1, 0.1));
    worst = std::max({worst, std::abs(I.p_dd_a.coeff.real() - r.p_dd),
                      std::abs(I.m_re_a.coeff.real() - r.m_re)});
  }
  return {worst <= 1e-14, "max |error| " + fmt(worst) + " (tol 1e-14)"};
}

Outcome oracle_slopes() {
  struct Point { double de, m, d; };
  const Point points[] = {{1.0, 0.0, 0.5}, {2.0, 1.0, 1.0}, {1.5, 0.5, 1.5}};
  const double sigmas[] = {8.0, 16.0, 32.0};
  const IntegralEntry entries[] = {IntegralEntry::p_dd_a, IntegralEntry::m_re_a,
                                   IntegralEntry::x_ab};
  double worst = 0.0;
  for (const Point& pt : points) {
    const IntegralSet ref = eternal_integral_set(eternal(pt.de, pt.m, pt.d, 0.1, 0.1));
    for (IntegralEntry e : entries) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (double sigma : sigmas) {
        const auto s = validate_config({pt.de, 0.1, 0.1, pt.d}, {pt.m}, InitialState::bell(),
                                       SwitchingSpec::gaussian(sigma));
        OracleSettings o;
        o.abs_tol = 1e-4 * sigma;
        o.rel_tol = 1e-5;
        const auto q = oracle_quadrature(e, s, 5.0 * sigma, pt.de + 6.0 / sigma, 0.0, o);
        const double y = q.value.real();
        sx += sigma, sy += y, sxx += sigma * sigma, sxy += sigma * y;
      }
      const double n = 3.0;
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      const double fit = std::sqrt(M_PI) * slope;
      const double want = ref[e].coeff.real();
      worst = std::max(worst, std::abs(fit - want) / std::abs(want));
    }
  }
  return {worst <= 0.02, "max relative slope error " + fmt(worst) + " (tol 0.02)"};
}

Outcome negativity_pipeline() {
  double worst = 0.0;
  bool sign_ok = true;
  for (int sign : {+1, -1}) {
    for (const auto& s : grid(sign)) {
      const IntegralSet I = eternal_integral_set(s);
      const auto closed = pt_eigenvalues_closed(s.state(), s.pair(), I);
      const auto num = negativity_numeric(evolved_density(s, I).at_delta0(1.0));
      std::array<double, 4> exact = closed.exact;
      std::sort(exact.begin(), exact.end());
      for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(exact[i] - num.eigenvalues[i]));
      // Inner block to first order: the negative and its partner.
      const int neg = closed.negative_index, pos = 1 - neg;
      worst = std::max(worst, std::abs(closed.expanded[neg] - num.eigenvalues[0]));
      worst = std::max(worst, std::abs(negativity_closed(closed) - num.negativity));
      std::array<double, 4> rest = {num.eigenvalues[1], num.eigenvalues[2], num.eigenvalues[3]};
      double nearest = INFINITY;
      for (int i = 0; i < 3; ++i) nearest = std::min(nearest, std::abs(closed.expanded[pos] - rest[i]));
      worst = std::max(worst, nearest);
      sign_ok = sign_ok && neg == (sign > 0 ? 1 : 0) && closed.exact[neg] < 0.0 &&
                closed.exact[pos] > 0.0;
    }
  }
  return {worst <= 1e-8 && sign_ok, "54 points (both gamma signs), max |closed - numeric| " +
                                        fmt(worst) + " (tol 1e-8), sign rule " +
                                        (sign_ok ? "holds" : "violated")};
}

Outcome concurrence_pipeline() {
  double worst = 0.0;
  for (const auto& s : grid(+1)) {
    const IntegralSet I = eternal_integral_set(s);
    const auto cc = concurrence_closed(s.state(), s.pair(), I);
    const auto cn = concurrence_numeric(evolved_density(s, I).at_delta0(1.0));
    std::array<double, 4> expanded = cc.expanded;
    std::sort(expanded.begin(), expanded.end(), std::greater<>());
    for (int i = 0; i < 4; ++i)
      worst = std::max({worst, std::abs(expanded[i] - cn.lambdas[i]),
                        std::abs(cc.exact[i] - cn.lambdas[i])});
  }
  const auto bell = eternal(1.0, 0.0, 1.0, 0.1, 0.1);
  const IntegralSet I = eternal_integral_set(bell);
  const double deficit = 1.0 - concurrence_closed(bell.state(), bell.pair(), I).concurrence;
  const double numeric =
      2.0 * M_PI * leakage_rates_numeric(bell.state(), bell.pair(), I).concurrence_rate;
  const bool ok = worst <= 1e-6 && std::abs(deficit - 0.01) <= 1e-12 &&
                  std::abs(numeric - 0.01) <= 1e-10;
  return {ok, "max |lambda' closed - numeric| " + fmt(worst) + " (tol 1e-6); deficit " +
                  fmt(deficit) + " (|err| " + fmt(std::abs(deficit - 0.01)) +
                  ", tol 1e-12), numeric-derivative deficit |err| " +
                  fmt(std::abs(numeric - 0.01))};
}

Outcome leakage_rates_bell() {
  const auto s = eternal(1.0, 0.0, 1.0, 0.1, 0.1);
  const IntegralSet I = eternal_integral_set(s);
  const auto c = leakage_rates(s.state(), s.pair(), I);
  const auto n = leakage_rates_numeric(s.state(), s.pair(), I);
  const double paths = std::max(std::abs(c.negativity_rate - n.negativity_rate),
                                std::abs(c.concurrence_rate - n.concurrence_rate));
  // Reference values carry six significant digits.
  const double vs_ref = std::max(std::abs(c.negativity_rate - 7.95775e-4),
                                 std::abs(c.concurrence_rate - 1.59155e-3) / 2.0);
  const bool ok = paths <= 1e-10 && vs_ref <= 5e-10;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "dN/dt %.6e, dC/dt %.6e; |closed - numeric| %.2e (tol 1e-10); |closed - "
                "reference| within rounding: %s",
                c.negativity_rate, c.concurrence_rate, paths, vs_ref <= 5e-10 ? "yes" : "no");
  return {ok, buf};
}

Outcome shielding() {
  const auto both = eternal(1.0, 0.0, 1.0, 0.1, 0.1);
  const auto one = eternal(1.0, 0.0, 1.0, 0.1, 0.0);
  const double r = leakage_rates(one.state(), one.pair(), eternal_integral_set(one)).negativity_rate /
                   leakage_rates(both.state(), both.pair(), eternal_integral_set(both)).negativity_rate;
  return {std::abs(r - 0.5) <= 1e-12, "ratio " + fmt(r) + ", |ratio - 0.5| " +
                                          fmt(std::abs(r - 0.5)) + " (tol 1e-12)"};
}

Outcome structural_invariants() {
  std::mt19937_64 rng(7);
  auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  constexpr int kDraws = 300;
  int bad = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double de = u(0.2, 3.0), c = u(0.5, 2.0), m = u(0.0, 0.95) * de / (c * c);
    const double ca = u(0.0, 0.15), cb = u(0.0, 0.15);
    const InitialState st = InitialState::from_alpha(u(-1.0, 1.0), u(0, 1) < 0.5 ? -1 : 1);
    const auto s = eternal(de, m, u(0.0, 5.0), ca, cb, st, c);
    const IntegralSet I = eternal_integral_set(s);
    const DensityMatrix4 rho = evolved_density(s, I).at_delta0(1.0);
    const auto& dg = rho.diagnostics();
    bool ok = dg.hermiticity_residual == 0.0 && dg.trace_residual <= 1e-15 &&
              is_x_shaped(rho.matrix()) &&
              std::abs(I.x_ab.coeff) <=
                  std::sqrt(I.p_dd_a.coeff.real() * I.p_dd_b.coeff.real()) + 1e-15;
    const auto r0 = leakage_rates(s.state(), s.pair(), I);
    const auto far = eternal(de, m, u(5.0, 50.0), ca, cb, st, c);
    const auto r1 = leakage_rates(far.state(), far.pair(), eternal_integral_set(far));
    ok = ok && std::abs(r0.negativity_rate - r1.negativity_rate) <= 1e-14 &&
         std::abs(r0.concurrence_rate - r1.concurrence_rate) <= 1e-14;
    const double threshold = de / (c * c);
    const auto heavier = eternal(de, m + u(0.01, 1.0) * (threshold - m), 1.0, ca, cb, st, c);
    const auto at = eternal(de, threshold, 1.0, ca, cb, st, c);
    const auto rh = leakage_rates(heavier.state(), heavier.pair(), eternal_integral_set(heavier));
    const auto rt = leakage_rates(at.state(), at.pair(), eternal_integral_set(at));
    const bool entangled = st.abs_alpha_gamma() > 1e-3 && ca + cb > 1e-3;
    ok = ok && (!entangled || rh.negativity_rate < r0.negativity_rate) &&
         rh.negativity_rate <= r0.negativity_rate && rt.negativity_rate == 0.0 &&
         rt.concurrence_rate == 0.0;
    if (!ok) ++bad;
  }
  return {bad == 0, std::to_string(kDraws) + " random scenarios, " + std::to_string(bad) +
                        " violations"};
}

Outcome gaussian_mode() {
  struct Point { double de, m, d, sigma; };
  const Point points[] = {{1.0, 0.0, 1.0, 1.0}, {2.0, 0.8, 0.0, 1.5}, {1.5, 0.4, 2.0, 0.7}};
  bool ok = true;
  double worst_ratio = 0.0;
  for (const Point& pt : points) {
    const auto s = validate_config({pt.de, 0.1, 0.1, pt.d}, {pt.m}, InitialState::bell(),
                                   SwitchingSpec::gaussian(pt.sigma));
    const IntegralSet I = gaussian_integral_set(s);
    const auto rep = analyze(s, I);
    ok = ok && I.p_a.coeff.real() > 0.0 && I.p_b.coeff.real() > 0.0;
    ok = ok && rep.negativity && *rep.negativity < s.state().abs_alpha_gamma();
    const auto m = oracle_quadrature(IntegralEntry::m_re_a, s, 7.0 * pt.sigma,
                                     (pt.de + 12.0 / pt.sigma) / s.c(), 0.0);
    const double combined = m.error + I.p_a.error + I.p_dd_a.error;
    const double gap = std::abs(m.value.real() - 0.5 * (I.p_a.coeff.real() + I.p_dd_a.coeff.real()));
    worst_ratio = std::max(worst_ratio, gap / combined);
  }
  ok = ok && worst_ratio <= 1.0;
  return {ok, "P_j > 0 and N < |alpha gamma| at 3 points; Re M identity gap / combined error " +
                  fmt(worst_ratio) + " (tol 1)"};
}

}  // namespace

int main() {
  criterion(1, "eternal closed forms", 1, eternal_closed_forms);
  criterion(2, "oracle slope consistency", 60, oracle_slopes);
  criterion(3, "negativity pipeline", 10, negativity_pipeline);
  criterion(4, "concurrence pipeline", 10, concurrence_pipeline);
  criterion(5, "leakage rates", 10, leakage_rates_bell);
  criterion(6, "shielding", 1, shielding);
  criterion(7, "structural invariants", 60, structural_invariants);
  criterion(8, "gaussian mode", 120, gaussian_mode);
  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
