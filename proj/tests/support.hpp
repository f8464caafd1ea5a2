#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "udleak/linalg.hpp"

namespace udleak::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline ComplexMatrix4 random_matrix(double scale = 1.0) {
  ComplexMatrix4 m;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) m(r, c) = {uniform(-scale, scale), uniform(-scale, scale)};
  return m;
}

inline ComplexMatrix4 random_hermitian(double scale = 1.0) {
  const ComplexMatrix4 a = random_matrix(scale);
  return (a + a.adjoint()) * cplx(0.5);
}

/// A A^H / tr, full rank with probability one.
inline ComplexMatrix4 random_state() {
  const ComplexMatrix4 a = random_matrix();
  const ComplexMatrix4 p = a * a.adjoint();
  return p * cplx(1.0 / p.trace().real());
}

using lcplx = std::complex<long double>;

/// Coefficients c0..c3 of det(x I - m) = x^4 + c3 x^3 + c2 x^2 + c1 x + c0,
/// by Faddeev-LeVerrier in extended precision.
inline std::array<lcplx, 4> characteristic_polynomial(const ComplexMatrix4& m) {
  using Mat = std::array<std::array<lcplx, 4>, 4>;
  Mat a{}, mk{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a[r][c] = lcplx(m(r, c).real(), m(r, c).imag());
  std::array<lcplx, 5> coef{};
  coef[4] = 1.0L;
  Mat prev{};
  for (int i = 0; i < 4; ++i) prev[i][i] = 1.0L;  // M_0 = I
  for (int k = 1; k <= 4; ++k) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        lcplx s = 0.0L;
        for (int j = 0; j < 4; ++j) s += a[r][j] * prev[j][c];
        mk[r][c] = s;
      }
    lcplx tr = 0.0L;
    for (int i = 0; i < 4; ++i) tr += mk[i][i];
    coef[4 - k] = -tr / static_cast<long double>(k);
    prev = mk;
    for (int i = 0; i < 4; ++i) prev[i][i] += coef[4 - k];
  }
  return {coef[0], coef[1], coef[2], coef[3]};
}

/// Roots of the monic quartic by Durand-Kerner iteration.
inline std::array<lcplx, 4> quartic_roots(const std::array<lcplx, 4>& c) {
  auto p = [&](lcplx x) { return (((x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]; };
  long double bound = 1.0L;
  for (const auto& v : c) bound = std::max(bound, 1.0L + std::abs(v));
  std::array<lcplx, 4> z;
  const lcplx seed(0.4L, 0.9L);
  lcplx w = 1.0L;
  for (auto& zi : z) {
    zi = w * bound * 0.5L;
    w *= seed;
  }
  for (int it = 0; it < 2000; ++it) {
    long double change = 0.0L;
    for (int i = 0; i < 4; ++i) {
      lcplx den = 1.0L;
      for (int j = 0; j < 4; ++j)
        if (j != i) den *= z[i] - z[j];
      const lcplx step = p(z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-30L * bound) break;
  }
  return z;
}

/// Eigenvalues of m from its characteristic polynomial.
inline std::array<lcplx, 4> eigenvalues_by_polynomial(const ComplexMatrix4& m) {
  return quartic_roots(characteristic_polynomial(m));
}

}  // namespace udleak::testing
