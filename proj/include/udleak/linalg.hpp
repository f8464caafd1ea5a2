#pragma once

// 4x4 complex matrix kernel for two-qubit density matrices.
//
// Index convention: row/column k = 2 * i_A + i_B, with i = 0 the excited and
// i = 1 the ground level of each detector, i.e. the order (ee, eg, ge, gg).
// Nothing in this file depends on which level is called 0; partial transpose
// and the spin flip are invariant under relabelling both qubits.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <sstream>

#include "udleak/errors.hpp"

namespace udleak {

using cplx = std::complex<double>;

class ComplexMatrix4 {
 public:
  static constexpr std::size_t N = 4;

  constexpr ComplexMatrix4() = default;

  static ComplexMatrix4 identity() {
    ComplexMatrix4 m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix4 diagonal(const std::array<double, 4>& d) {
    ComplexMatrix4 m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  cplx& operator()(std::size_t r, std::size_t c) { return e_[r * N + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return e_[r * N + c]; }

  const std::array<cplx, 16>& entries() const noexcept { return e_; }

  ComplexMatrix4 adjoint() const {
    ComplexMatrix4 out;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c) out(r, c) = std::conj((*this)(c, r));
    return out;
  }

  ComplexMatrix4 conjugate() const {
    ComplexMatrix4 out;
    for (std::size_t k = 0; k < 16; ++k) out.e_[k] = std::conj(e_[k]);
    return out;
  }

  cplx trace() const { return e_[0] + e_[5] + e_[10] + e_[15]; }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : e_) s += std::norm(z);
    return std::sqrt(s);
  }

  /// Largest |m_ij - conj(m_ji)|.
  double hermiticity_residual() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = r; c < N; ++c)
        worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
    return worst;
  }

  double max_abs() const {
    double worst = 0.0;
    for (const auto& z : e_) worst = std::max(worst, std::abs(z));
    return worst;
  }

  ComplexMatrix4& operator+=(const ComplexMatrix4& o) {
    for (std::size_t k = 0; k < 16; ++k) e_[k] += o.e_[k];
    return *this;
  }
  ComplexMatrix4& operator-=(const ComplexMatrix4& o) {
    for (std::size_t k = 0; k < 16; ++k) e_[k] -= o.e_[k];
    return *this;
  }
  ComplexMatrix4& operator*=(cplx s) {
    for (auto& z : e_) z *= s;
    return *this;
  }

  friend ComplexMatrix4 operator+(ComplexMatrix4 a, const ComplexMatrix4& b) { return a += b; }
  friend ComplexMatrix4 operator-(ComplexMatrix4 a, const ComplexMatrix4& b) { return a -= b; }
  friend ComplexMatrix4 operator*(ComplexMatrix4 a, cplx s) { return a *= s; }
  friend ComplexMatrix4 operator*(cplx s, ComplexMatrix4 a) { return a *= s; }

  friend ComplexMatrix4 operator*(const ComplexMatrix4& a, const ComplexMatrix4& b) {
    ComplexMatrix4 out;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < N; ++k) s += a(r, k) * b(k, c);
        out(r, c) = s;
      }
    return out;
  }

  friend bool operator==(const ComplexMatrix4&, const ComplexMatrix4&) = default;

 private:
  std::array<cplx, 16> e_{};
};

inline std::ostream& operator<<(std::ostream& os, const ComplexMatrix4& m) {
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) os << (c ? " " : "") << m(r, c);
    os << '\n';
  }
  return os;
}

/// True when only the diagonal and anti-diagonal are non-zero.
inline bool is_x_shaped(const ComplexMatrix4& m) {
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      if (r != c && r + c != 3 && m(r, c) != cplx{}) return false;
  return true;
}

namespace detail {

inline void require_hermitian(const ComplexMatrix4& m, double tol) {
  const double res = m.hermiticity_residual();
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "matrix is not Hermitian: residual " << res << " exceeds tolerance " << tol;
    throw NotHermitian(os.str());
  }
}

}  // namespace detail

struct HermitianEigensystem {
  std::array<double, 4> values{};  ///< ascending
  ComplexMatrix4 vectors;          ///< column k is the eigenvector of values[k]
};

inline constexpr int kJacobiMaxSweeps = 50;

/// Cyclic complex Jacobi. Stops when the off-diagonal Frobenius norm drops to
/// 1e-14 of the input norm. Pairs whose entry is exactly zero are never
/// rotated, so block structure (e.g. X-shape) survives exactly and each block
/// is resolved to its own relative precision.
inline HermitianEigensystem hermitian_eigensystem(const ComplexMatrix4& m, double tol) {
  detail::require_hermitian(m, tol);

  ComplexMatrix4 a = m;
  for (std::size_t r = 0; r < 4; ++r) {
    a(r, r) = a(r, r).real();
    for (std::size_t c = r + 1; c < 4; ++c) {
      const cplx avg = 0.5 * (m(r, c) + std::conj(m(c, r)));
      a(r, c) = avg;
      a(c, r) = std::conj(avg);
    }
  }
  ComplexMatrix4 v = ComplexMatrix4::identity();

  const double scale = a.frobenius_norm();
  auto off_norm = [&a] {
    double s = 0.0;
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c)
        if (r != c) s += std::norm(a(r, c));
    return std::sqrt(s);
  };

  bool converged = scale == 0.0;
  for (int sweep = 0; !converged && sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_norm() <= 1e-14 * scale) {
      converged = true;
      break;
    }
    if (sweep == kJacobiMaxSweeps) break;
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t q = p + 1; q < 4; ++q) {
        const cplx z = a(p, q);
        const double mag = std::abs(z);
        if (mag == 0.0) continue;
        const cplx ph = z / mag;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        // U = diag phase * real rotation; U_pp = c, U_pq = s,
        // U_qp = -s conj(ph), U_qq = c conj(ph). Apply A <- U^H A U.
        const cplx uqp = -sn * std::conj(ph);
        const cplx uqq = cs * std::conj(ph);
        for (std::size_t k = 0; k < 4; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * cs + akq * uqp;
          a(k, q) = akp * sn + akq * uqq;
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = vkp * cs + vkq * uqp;
          v(k, q) = vkp * sn + vkq * uqq;
        }
        for (std::size_t k = 0; k < 4; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = cs * apk + std::conj(uqp) * aqk;
          a(q, k) = sn * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
  }
  if (!converged) {
    throw NoConvergence("Jacobi eigensolver did not converge within 50 sweeps");
  }

  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&a](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigensystem out;
  for (std::size_t k = 0; k < 4; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < 4; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

/// Four real eigenvalues in ascending order.
inline std::array<double, 4> hermitian_eigenvalues(const ComplexMatrix4& m, double tol) {
  return hermitian_eigensystem(m, tol).values;
}

/// Transpose of the second qubit's indices: ((iA,iB),(jA,jB)) -> ((iA,jB),(jA,iB)).
inline ComplexMatrix4 partial_transpose_b(const ComplexMatrix4& rho) {
  ComplexMatrix4 out;
  for (std::size_t ia = 0; ia < 2; ++ia)
    for (std::size_t ib = 0; ib < 2; ++ib)
      for (std::size_t ja = 0; ja < 2; ++ja)
        for (std::size_t jb = 0; jb < 2; ++jb)
          out(2 * ia + jb, 2 * ja + ib) = rho(2 * ia + ib, 2 * ja + jb);
  return out;
}

/// sigma_y (x) sigma_y: anti-diagonal (-1, 1, 1, -1).
inline ComplexMatrix4 sigma_yy() {
  ComplexMatrix4 m;
  m(0, 3) = -1.0;
  m(1, 2) = 1.0;
  m(2, 1) = 1.0;
  m(3, 0) = -1.0;
  return m;
}

/// (sigma_y x sigma_y) rho* (sigma_y x sigma_y).
inline ComplexMatrix4 spin_flip(const ComplexMatrix4& rho) {
  const ComplexMatrix4 y = sigma_yy();
  return y * rho.conjugate() * y;
}

/// rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y). Its eigenvalues are the
/// squared Wootters lambdas; kept as a cross-check for wootters_lambdas.
inline ComplexMatrix4 wootters_product(const ComplexMatrix4& rho) { return rho * spin_flip(rho); }

/// V diag(sqrt(max(lambda, 0))) V^H, with eigenvalues at or below
/// `clamp_threshold` treated as zero.
inline ComplexMatrix4 psd_sqrt(const HermitianEigensystem& es, double clamp_threshold) {
  ComplexMatrix4 out;
  std::array<double, 4> root{};
  for (std::size_t k = 0; k < 4; ++k)
    root[k] = es.values[k] > clamp_threshold ? std::sqrt(es.values[k]) : 0.0;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) {
        if (root[k] == 0.0) continue;
        s += es.vectors(r, k) * root[k] * std::conj(es.vectors(c, k));
      }
      out(r, c) = s;
    }
  return out;
}

/// Wootters lambdas (descending): eigenvalues of sqrt(sqrt(rho) rho~ sqrt(rho)).
/// Eigenvalues of rho at or below 1e-12 * trace are clamped to zero first and
/// the spin flip acts on the clamped matrix. With S = sqrt(rho) Y sqrt(rho)*
/// the target matrix is S S^H; when S is Hermitian (real rho) its lambdas are
/// |eig(S)|, which avoids square roots of rounding noise.
inline std::array<double, 4> wootters_lambdas(const ComplexMatrix4& rho, double tol) {
  detail::require_hermitian(rho, tol);
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > 1e-8) {
    std::ostringstream os;
    os << "density matrix trace " << tr << " differs from 1 by more than 1e-8";
    throw NotNormalized(os.str());
  }
  const HermitianEigensystem es = hermitian_eigensystem(rho, tol);
  const ComplexMatrix4 root = psd_sqrt(es, 1e-12 * tr.real());
  const ComplexMatrix4 s = root * sigma_yy() * root.conjugate();
  const double scale = std::max(1.0, s.max_abs());
  std::array<double, 4> out{};
  if (s.hermiticity_residual() <= 1e-13 * scale) {
    const std::array<double, 4> mu = hermitian_eigenvalues(s, 1e-13 * scale);
    for (std::size_t k = 0; k < 4; ++k) out[k] = std::abs(mu[k]);
  } else {
    const ComplexMatrix4 r = s * s.adjoint();
    const std::array<double, 4> mu =
        hermitian_eigenvalues(r, 1e-12 * std::max(1.0, r.max_abs()));
    for (std::size_t k = 0; k < 4; ++k) out[k] = std::sqrt(std::max(0.0, mu[k]));
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace udleak
