#pragma once

// Globally adaptive Gauss-Kronrod 7-15 quadrature for real- or complex-valued
// integrands on finite intervals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <type_traits>
#include <vector>

namespace udleak {

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  bool converged = true;
  int evaluations = 0;
};

struct AdaptiveOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& z) { return std::abs(z); }

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

/// One G7K15 panel with the QUADPACK error heuristic.
template <class T, class F>
Segment<T> gk15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(centre);
  T resg = fc * kWg[3];
  T resk = fc * kWgk[7];
  double resabs = magnitude(resk);
  T fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = f(centre - dx);
    fv2[j] = f(centre + dx);
    const T sum = fv1[j] + fv2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (magnitude(fv1[j]) + magnitude(fv2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const T reskh = resk * 0.5;
  double resasc = kWgk[7] * magnitude(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (magnitude(fv1[j] - reskh) + magnitude(fv2[j] - reskh));

  const double ah = std::abs(half);
  const T result = resk * half;
  resabs *= ah;
  resasc *= ah;
  double err = magnitude((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * resabs, err);
  return {a, b, result, err};
}

}  // namespace detail

/// Integrates f over [a, b], splitting first at each of `breaks` that lies
/// strictly inside. Bisects the worst panel until the summed error estimate
/// drops below max(abs_tol, rel_tol * |value|).
template <class T, class F>
QuadResult<T> integrate(F&& f, double a, double b, const AdaptiveOptions& opt = {},
                        const std::vector<double>& breaks = {}) {
  QuadResult<T> out;
  if (a == b) return out;
  std::vector<double> cuts{a};
  std::vector<double> sorted = breaks;
  std::sort(sorted.begin(), sorted.end());
  for (double x : sorted)
    if (x > std::min(a, b) && x < std::max(a, b) && x != cuts.back()) cuts.push_back(x);
  if (b < a) std::reverse(cuts.begin() + 1, cuts.end());
  cuts.push_back(b);

  std::priority_queue<detail::Segment<T>> heap;
  T total{};
  double err = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    auto s = detail::gk15<T>(f, cuts[k], cuts[k + 1]);
    total += s.value;
    err += s.error;
    heap.push(s);
    out.evaluations += 15;
  }
  int splits = 0;
  while (err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total))) {
    if (splits >= opt.max_subdivisions) {
      out.converged = false;
      break;
    }
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid == worst.a || mid == worst.b) {
      out.converged = false;
      break;
    }
    heap.pop();
    auto left = detail::gk15<T>(f, worst.a, mid);
    auto right = detail::gk15<T>(f, mid, worst.b);
    out.evaluations += 30;
    ++splits;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Final sum taken from the panels, not the running total.
  T fresh{};
  double fresh_err = 0.0;
  while (!heap.empty()) {
    fresh += heap.top().value;
    fresh_err += heap.top().error;
    heap.pop();
  }
  out.value = fresh;
  out.error = fresh_err;
  return out;
}

}  // namespace udleak
