#pragma once

// Modified Bessel functions K0 and K1 of complex argument, Re z >= 0, z != 0.
// Power series for |z| <= 2, Steed/Temme continued fraction otherwise.

#include <cmath>
#include <complex>
#include <utility>

#include "udleak/errors.hpp"

namespace udleak {

namespace detail {

inline constexpr double kEulerGamma = 0.577215664901532860606512090082402;

inline std::pair<std::complex<double>, std::complex<double>> bessel_k01_series(
    std::complex<double> z) {
  using C = std::complex<double>;
  const C q = 0.25 * z * z;
  const C lg = std::log(0.5 * z);
  C i0 = 0.0, i1 = 0.0, s0 = 0.0, s1 = 0.0;
  C t0 = 1.0;  // q^k / (k!)^2
  C t1 = 1.0;  // q^k / (k! (k+1)!)
  double harmonic = 0.0;               // H_k
  double psi1 = -kEulerGamma;          // psi(k+1)
  double psi2 = 1.0 - kEulerGamma;     // psi(k+2)
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      t0 *= q / double(k * k);
      t1 *= q / double(k * (k + 1));
      harmonic += 1.0 / k;
      psi1 += 1.0 / k;
      psi2 += 1.0 / (k + 1);
    }
    i0 += t0;
    i1 += t1;
    s0 += harmonic * t0;
    s1 += (psi1 + psi2) * t1;
    if (std::abs(t0) < 1e-18 * std::abs(i0) && std::abs(t1) < 1e-18 * std::abs(i1)) break;
  }
  i1 *= 0.5 * z;
  const C k0 = -(lg + kEulerGamma) * i0 + s0;
  const C k1 = 1.0 / z + lg * i1 - 0.25 * z * s1;
  return {k0, k1};
}

inline std::pair<std::complex<double>, std::complex<double>> bessel_k01_cf(
    std::complex<double> x) {
  using C = std::complex<double>;
  constexpr int kMaxIter = 200000;
  C b = 2.0 * (1.0 + x);
  C d = 1.0 / b;
  C h = d;
  C delh = d;
  C q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  C q = a1, c = a1;
  double a = -a1;
  C s = 1.0 + q * delh;
  bool done = false;
  for (int i = 2; i <= kMaxIter; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / double(i);
    const C qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const C dels = q * delh;
    s += dels;
    if (std::abs(dels) < 1e-17 * std::abs(s) && std::abs(delh) < 1e-17 * std::abs(h)) {
      done = true;
      break;
    }
  }
  if (!done) throw NoConvergence("Bessel K continued fraction did not converge");
  h *= a1;
  const C k0 = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x) / s;
  const C k1 = k0 * (x + 0.5 - h) / x;
  return {k0, k1};
}

}  // namespace detail

/// (K0(z), K1(z)) for Re z >= 0, z != 0.
inline std::pair<std::complex<double>, std::complex<double>> bessel_k01(std::complex<double> z) {
  if (std::abs(z) <= 2.0) return detail::bessel_k01_series(z);
  return detail::bessel_k01_cf(z);
}

inline std::complex<double> bessel_k1(std::complex<double> z) { return bessel_k01(z).second; }
inline std::complex<double> bessel_k0(std::complex<double> z) { return bessel_k01(z).first; }

}  // namespace udleak
