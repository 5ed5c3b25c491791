#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "atreg/errors.hpp"

namespace atreg {

using Vector = std::vector<double>;

inline bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(const Vector& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

/// y += alpha * x
inline void axpy(double alpha, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw DimensionMismatch("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vector scaled(const Vector& v, double alpha) {
  Vector out(v);
  for (double& x : out) x *= alpha;
  return out;
}

inline Vector subtract(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("subtract: length mismatch");
  Vector out(a);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

/// Dense real matrix, row-major storage.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw InvalidSize("Matrix: dimensions must be positive");
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) throw InvalidSize("Matrix: dimensions must be positive");
    if (data_.size() != rows * cols)
      throw DimensionMismatch("Matrix: entry count does not match rows*cols");
    if (!all_finite(data_)) throw NumericalFailure("Matrix: non-finite entry");
  }

  static Matrix identity(std::size_t n) {
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const noexcept { return data_; }
  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  double frobenius_norm() const {
    return std::sqrt(std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Vector matvec(const Matrix& M, const Vector& x) {
  if (x.size() != M.cols()) throw DimensionMismatch("matvec: dimension mismatch");
  Vector y(M.rows(), 0.0);
  for (std::size_t i = 0; i < M.rows(); ++i) {
    const double* row = M.row_ptr(i);
    double s = 0.0;
    for (std::size_t j = 0; j < M.cols(); ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

inline Matrix matmul(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.rows()) throw DimensionMismatch("matmul: dimension mismatch");
  Matrix C(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double a = A(i, k);
      if (a == 0.0) continue;
      const double* brow = B.row_ptr(k);
      double* crow = C.row_ptr(i);
      for (std::size_t j = 0; j < B.cols(); ++j) crow[j] += a * brow[j];
    }
  }
  return C;
}

namespace detail {
/// Relative threshold used to declare a QR/LU factor rank deficient or
/// singular: 1e-12 times the largest factor diagonal magnitude.
inline constexpr double kRankTolerance = 1e-12;
}  // namespace detail

/// Minimum-norm-residual solve of an overdetermined system: returns the y that
/// minimizes ||M y - rhs|| for a p x q matrix with p >= q. Householder QR, the
/// normal equations are never formed.
///
/// Throws RankDeficient (carrying the detected rank) when a diagonal of R
/// falls below 1e-12 times the largest diagonal magnitude.
inline Vector lstsq(const Matrix& M, const Vector& rhs) {
  const std::size_t p = M.rows();
  const std::size_t q = M.cols();
  if (p < q) throw DimensionMismatch("lstsq: system must have rows >= cols");
  if (rhs.size() != p) throw DimensionMismatch("lstsq: rhs length mismatch");
  if (!all_finite(rhs)) throw NumericalFailure("lstsq: non-finite rhs");

  Matrix R = M;
  Vector qtb = rhs;
  Vector v(p, 0.0);
  Vector s(q, 0.0);

  for (std::size_t k = 0; k < q; ++k) {
    double col_norm2 = 0.0;
    for (std::size_t i = k; i < p; ++i) col_norm2 += R(i, k) * R(i, k);
    const double col_norm = std::sqrt(col_norm2);
    if (col_norm == 0.0) {
      R(k, k) = 0.0;
      continue;  // zero column tail, caught by the rank check below
    }

    const double alpha = (R(k, k) >= 0.0) ? -col_norm : col_norm;
    v[k] = R(k, k) - alpha;
    double vtv = v[k] * v[k];
    for (std::size_t i = k + 1; i < p; ++i) {
      v[i] = R(i, k);
      vtv += v[i] * v[i];
    }
    const double beta = 2.0 / vtv;

    // Reflect the trailing columns: two row-major sweeps.
    std::fill(s.begin() + static_cast<std::ptrdiff_t>(k) + 1, s.end(), 0.0);
    for (std::size_t i = k; i < p; ++i) {
      const double vi = v[i];
      const double* row = R.row_ptr(i);
      for (std::size_t j = k + 1; j < q; ++j) s[j] += vi * row[j];
    }
    for (std::size_t j = k + 1; j < q; ++j) s[j] *= beta;
    for (std::size_t i = k; i < p; ++i) {
      const double vi = v[i];
      double* row = R.row_ptr(i);
      for (std::size_t j = k + 1; j < q; ++j) row[j] -= vi * s[j];
    }

    double sb = 0.0;
    for (std::size_t i = k; i < p; ++i) sb += v[i] * qtb[i];
    sb *= beta;
    for (std::size_t i = k; i < p; ++i) qtb[i] -= sb * v[i];

    R(k, k) = alpha;
    for (std::size_t i = k + 1; i < p; ++i) R(i, k) = 0.0;
  }

  double max_diag = 0.0;
  for (std::size_t k = 0; k < q; ++k) max_diag = std::max(max_diag, std::abs(R(k, k)));
  const double tol = detail::kRankTolerance * max_diag;
  std::size_t rank = 0;
  for (std::size_t k = 0; k < q; ++k)
    if (std::abs(R(k, k)) > tol) ++rank;
  if (rank < q)
    throw RankDeficient(rank, "lstsq: rank-deficient matrix (rank " + std::to_string(rank) +
                                  " of " + std::to_string(q) + ")");

  Vector y(q, 0.0);
  for (std::size_t kk = q; kk-- > 0;) {
    double sum = qtb[kk];
    const double* row = R.row_ptr(kk);
    for (std::size_t j = kk + 1; j < q; ++j) sum -= row[j] * y[j];
    y[kk] = sum / row[kk];
  }
  return y;
}

/// Solve a square dense system by LU with partial pivoting. Throws Singular
/// when a pivot falls below 1e-12 times the largest entry magnitude of M.
inline Vector solve_dense(const Matrix& M, const Vector& rhs) {
  const std::size_t n = M.rows();
  if (M.cols() != n) throw DimensionMismatch("solve_dense: matrix must be square");
  if (rhs.size() != n) throw DimensionMismatch("solve_dense: rhs length mismatch");

  Matrix A = M;
  Vector x = rhs;
  const double scale = A.max_abs();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double piv_val = std::abs(A(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(A(i, k)) > piv_val) {
        piv_val = std::abs(A(i, k));
        piv = i;
      }
    }
    if (piv_val <= detail::kRankTolerance * scale)
      throw Singular("solve_dense: pivot below tolerance at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
      std::swap(x[k], x[piv]);
    }
    const double pivot = A(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = A(i, k) / pivot;
      if (f == 0.0) continue;
      double* rowi = A.row_ptr(i);
      const double* rowk = A.row_ptr(k);
      for (std::size_t j = k + 1; j < n; ++j) rowi[j] -= f * rowk[j];
      rowi[k] = 0.0;
      x[i] -= f * x[k];
    }
  }

  for (std::size_t kk = n; kk-- > 0;) {
    double sum = x[kk];
    const double* row = A.row_ptr(kk);
    for (std::size_t j = kk + 1; j < n; ++j) sum -= row[j] * x[j];
    x[kk] = sum / row[kk];
  }
  return x;
}

/// Thin singular value decomposition M = U diag(s) V^T with s descending.
/// For a p x q input with p >= q, U is p x q and V is q x q; a wide input is
/// handled by transposition. Columns of U belonging to zero singular values
/// are left as zero.
struct SvdResult {
  Matrix U;
  Vector s;
  Matrix V;
};

/// One-sided Jacobi SVD. Chosen for its high relative accuracy on the tiny
/// singular values these diagnostics care about; intended for desk-scale
/// matrices. Throws NumericalFailure if the sweeps fail to converge.
inline SvdResult svd(const Matrix& M, bool want_vectors = true) {
  const bool transposed = M.rows() < M.cols();
  const Matrix B0 = transposed ? M.transposed() : M;
  const std::size_t p = B0.rows();
  const std::size_t q = B0.cols();

  // Work on contiguous columns.
  std::vector<Vector> col(q, Vector(p));
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t i = 0; i < p; ++i) col[j][i] = B0(i, j);

  std::vector<Vector> vcol;
  if (want_vectors) {
    vcol.assign(q, Vector(q, 0.0));
    for (std::size_t j = 0; j < q; ++j) vcol[j][j] = 1.0;
  }

  constexpr double eps = 1e-15;
  constexpr int max_sweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        const double aii = dot(col[i], col[i]);
        const double ajj = dot(col[j], col[j]);
        const double aij = dot(col[i], col[j]);
        if (aii == 0.0 || ajj == 0.0) continue;
        if (std::abs(aij) <= eps * std::sqrt(aii * ajj)) continue;
        converged = false;

        const double zeta = (ajj - aii) / (2.0 * aij);
        const double sign = (zeta >= 0.0) ? 1.0 : -1.0;
        const double t = sign / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;

        for (std::size_t k = 0; k < p; ++k) {
          const double tmp = col[i][k];
          col[i][k] = c * tmp - s * col[j][k];
          col[j][k] = s * tmp + c * col[j][k];
        }
        if (want_vectors) {
          for (std::size_t k = 0; k < q; ++k) {
            const double tmp = vcol[i][k];
            vcol[i][k] = c * tmp - s * vcol[j][k];
            vcol[j][k] = s * tmp + c * vcol[j][k];
          }
        }
      }
    }
  }
  if (!converged) throw NumericalFailure("svd: Jacobi sweeps did not converge");

  Vector sv(q);
  for (std::size_t j = 0; j < q; ++j) sv[j] = norm(col[j]);

  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&sv](std::size_t a, std::size_t b) { return sv[a] > sv[b]; });

  SvdResult out;
  out.s.resize(q);
  for (std::size_t j = 0; j < q; ++j) out.s[j] = sv[order[j]];

  if (want_vectors) {
    Matrix U(p, q);
    Matrix V(q, q);
    for (std::size_t j = 0; j < q; ++j) {
      const std::size_t src = order[j];
      if (sv[src] > 0.0)
        for (std::size_t i = 0; i < p; ++i) U(i, j) = col[src][i] / sv[src];
      for (std::size_t i = 0; i < q; ++i) V(i, j) = vcol[src][i];
    }
    if (transposed) {
      out.U = std::move(V);
      out.V = std::move(U);
    } else {
      out.U = std::move(U);
      out.V = std::move(V);
    }
  }
  return out;
}

/// Singular values of any finite matrix, descending and nonnegative,
/// min(rows, cols) of them.
inline Vector singular_values(const Matrix& M) { return svd(M, /*want_vectors=*/false).s; }

}  // namespace atreg
