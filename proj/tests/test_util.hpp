#pragma once

// Shared test-only helpers and independent oracles. These deliberately avoid
// the library's own factorizations so they can stand as cross-checks.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "atreg/linalg.hpp"

namespace atreg_test {

using atreg::Matrix;
using atreg::Vector;

inline Vector random_vector(std::size_t n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) M(i, j) = dist(gen);
  return M;
}

/// Plain Gaussian elimination with partial pivoting, used as the
/// normal-equation oracle. Independent of atreg::solve_dense.
inline Vector gauss_solve(Matrix A, Vector b) {
  const std::size_t n = A.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A(i, k) / A(k, k);
      for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= A(k, j) * x[j];
    x[k] = s / A(k, k);
  }
  return x;
}

/// Eigenvalues of a symmetric matrix by the classical two-sided Jacobi
/// iteration, descending. Independent of atreg::svd.
inline Vector sym_eigenvalues(Matrix S) {
  const std::size_t n = S.rows();
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += S(i, j) * S(i, j);
  const double tol = 1e-15 * std::sqrt(frob);

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += S(i, j) * S(i, j);
    if (std::sqrt(off) <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(S(p, q)) <= tol / n) continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = S(k, p);
          const double skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = S(p, k);
          const double sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
      }
    }
  }
  Vector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = S(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

inline Matrix transpose_times(const Matrix& A, const Matrix& B) {
  // A^T * B without forming the transpose.
  Matrix C(A.cols(), B.cols());
  for (std::size_t k = 0; k < A.rows(); ++k)
    for (std::size_t i = 0; i < A.cols(); ++i) {
      const double a = A(k, i);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < B.cols(); ++j) C(i, j) += a * B(k, j);
    }
  return C;
}

/// Orthonormalize the columns of a random tall matrix (modified Gram-Schmidt),
/// returned as a list of column vectors.
inline std::vector<Vector> random_orthonormal(std::size_t n, std::size_t m, std::uint32_t seed) {
  std::vector<Vector> cols;
  for (std::size_t j = 0; j < m; ++j) {
    Vector v = random_vector(n, seed + static_cast<std::uint32_t>(j));
    for (const Vector& u : cols) atreg::axpy(-atreg::dot(u, v), u, v);
    for (const Vector& u : cols) atreg::axpy(-atreg::dot(u, v), u, v);
    const double nv = atreg::norm(v);
    for (double& x : v) x /= nv;
    cols.push_back(std::move(v));
  }
  return cols;
}

}  // namespace atreg_test
