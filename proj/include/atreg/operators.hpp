#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>

#include "atreg/linalg.hpp"

namespace atreg {

/// Largest dimension for which operators are materialized densely on request.
inline constexpr std::size_t kMaxDenseDim = 4096;

/// Matrix-free linear map with fixed input/output dimensions and an optional
/// dense materialization. Immutable after construction; apply is re-entrant.
class LinearOperator {
 public:
  using ApplyFn = std::function<Vector(const Vector&)>;

  LinearOperator(std::size_t dim_out, std::size_t dim_in, ApplyFn apply,
                 std::shared_ptr<const Matrix> dense = nullptr)
      : dim_out_(dim_out), dim_in_(dim_in), apply_(std::move(apply)), dense_(std::move(dense)) {
    if (dim_in_ == 0 || dim_out_ == 0)
      throw InvalidSize("LinearOperator: dimensions must be positive");
  }

  std::size_t dim_in() const noexcept { return dim_in_; }
  std::size_t dim_out() const noexcept { return dim_out_; }

  Vector apply(const Vector& x) const {
    if (x.size() != dim_in_) throw DimensionMismatch("LinearOperator::apply: length mismatch");
    return apply_(x);
  }

  bool has_dense() const noexcept { return dense_ != nullptr; }

  const Matrix& dense() const {
    if (!dense_) throw SizeLimit("LinearOperator: no dense materialization available");
    return *dense_;
  }

 private:
  std::size_t dim_out_;
  std::size_t dim_in_;
  ApplyFn apply_;
  std::shared_ptr<const Matrix> dense_;
};

/// Wrap a square dense matrix as an operator; apply(x) = Mx.
inline LinearOperator dense_operator(Matrix M) {
  if (M.rows() != M.cols()) throw DimensionMismatch("dense_operator: matrix must be square");
  auto shared = std::make_shared<const Matrix>(std::move(M));
  const std::size_t n = shared->rows();
  return LinearOperator(
      n, n, [shared](const Vector& x) { return matvec(*shared, x); }, shared);
}

/// Square regularization operator. The finite-difference kinds annihilate the
/// expected null spaces (d1: constants, d2: affine sequences, grad2d: constant
/// images) and are padded with trailing zero rows so the matrix is square.
/// apply works stencil-wise without materialization; dense() materializes on
/// demand, subject to the size cap.
class RegOperator {
 public:
  enum class Kind { identity, d1, d2, grad2d, custom };

  static RegOperator identity(std::size_t dim) {
    if (dim == 0) throw InvalidSize("identity: dimension must be positive");
    return RegOperator(Kind::identity, dim, dim, nullptr);
  }

  static RegOperator custom(Matrix M) {
    if (M.rows() != M.cols()) throw DimensionMismatch("RegOperator::custom: matrix must be square");
    auto shared = std::make_shared<const Matrix>(std::move(M));
    return RegOperator(Kind::custom, shared->rows(), shared->rows(), shared);
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  /// Image side length for grad2d (dim = side^2); equals dim otherwise.
  std::size_t side() const noexcept { return side_; }

  Vector apply(const Vector& x) const {
    if (x.size() != dim_) throw DimensionMismatch("RegOperator::apply: length mismatch");
    switch (kind_) {
      case Kind::identity:
        return x;
      case Kind::d1: {
        Vector y(dim_, 0.0);
        for (std::size_t i = 0; i + 1 < dim_; ++i) y[i] = x[i] - x[i + 1];
        return y;
      }
      case Kind::d2: {
        Vector y(dim_, 0.0);
        for (std::size_t i = 0; i + 2 < dim_; ++i) y[i] = x[i] - 2.0 * x[i + 1] + x[i + 2];
        return y;
      }
      case Kind::grad2d: {
        const std::size_t n = side_;
        Vector y(dim_, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            const double xij = x[i * n + j];
            if (i + 1 < n) v += xij - x[(i + 1) * n + j];
            if (j + 1 < n) v += xij - x[i * n + j + 1];
            y[i * n + j] = v;
          }
        }
        return y;
      }
      case Kind::custom:
        return matvec(*custom_, x);
    }
    throw NumericalFailure("RegOperator::apply: unreachable");
  }

  Matrix dense(std::size_t max_dim = kMaxDenseDim) const {
    if (dim_ > max_dim)
      throw SizeLimit("RegOperator::dense: dimension " + std::to_string(dim_) +
                      " exceeds cap " + std::to_string(max_dim));
    switch (kind_) {
      case Kind::identity:
        return Matrix::identity(dim_);
      case Kind::d1: {
        Matrix L(dim_, dim_);
        for (std::size_t i = 0; i + 1 < dim_; ++i) {
          L(i, i) = 1.0;
          L(i, i + 1) = -1.0;
        }
        return L;
      }
      case Kind::d2: {
        Matrix L(dim_, dim_);
        for (std::size_t i = 0; i + 2 < dim_; ++i) {
          L(i, i) = 1.0;
          L(i, i + 1) = -2.0;
          L(i, i + 2) = 1.0;
        }
        return L;
      }
      case Kind::grad2d: {
        // Kronecker sum I (x) D1 + D1 (x) I built entry-wise.
        const std::size_t n = side_;
        Matrix L(dim_, dim_);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t r = i * n + j;
            double diag = 0.0;
            if (i + 1 < n) {
              diag += 1.0;
              L(r, (i + 1) * n + j) = -1.0;
            }
            if (j + 1 < n) {
              diag += 1.0;
              L(r, i * n + j + 1) = -1.0;
            }
            L(r, r) = diag;
          }
        }
        return L;
      }
      case Kind::custom:
        return *custom_;
    }
    throw NumericalFailure("RegOperator::dense: unreachable");
  }

 private:
  friend RegOperator deriv1(std::size_t);
  friend RegOperator deriv2(std::size_t);
  friend RegOperator grad2d(std::size_t);

  RegOperator(Kind kind, std::size_t dim, std::size_t side, std::shared_ptr<const Matrix> custom)
      : kind_(kind), dim_(dim), side_(side), custom_(std::move(custom)) {}

  Kind kind_;
  std::size_t dim_;
  std::size_t side_;
  std::shared_ptr<const Matrix> custom_;
};

/// First-difference operator with rows (1, -1) and one trailing zero row.
inline RegOperator deriv1(std::size_t n) {
  if (n < 2) throw InvalidSize("deriv1: n must be at least 2");
  return RegOperator(RegOperator::Kind::d1, n, n, nullptr);
}

/// Second-difference operator with rows (1, -2, 1) and two trailing zero rows.
inline RegOperator deriv2(std::size_t n) {
  if (n < 3) throw InvalidSize("deriv2: n must be at least 3");
  return RegOperator(RegOperator::Kind::d2, n, n, nullptr);
}

/// Two-dimensional smoothing operator for n x n images,
/// L = I (x) D1 + D1 (x) I of dimension n^2.
inline RegOperator grad2d(std::size_t n) {
  if (n < 2) throw InvalidSize("grad2d: n must be at least 2");
  if (n > (std::size_t{1} << 20)) throw SizeLimit("grad2d: n too large");
  return RegOperator(RegOperator::Kind::grad2d, n * n, n, nullptr);
}

/// Separable Gaussian blur on n x n images: apply(vec(X)) = vec(T X T) with a
/// symmetric banded Toeplitz factor T. The operator matrix is T (x) T.
struct KroneckerBlurOperator {
  std::size_t n = 0;
  std::size_t band = 0;
  double sigma = 0.0;
  Matrix T;

  std::size_t dim() const noexcept { return n * n; }

  Vector apply(const Vector& x) const {
    if (x.size() != n * n) throw DimensionMismatch("blur apply: length mismatch");
    // Y = T X, then Y T; T is banded so sums run over |i-j| < band.
    const std::size_t b = band;
    Matrix Y(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k0 = (i + 1 > b) ? i + 1 - b : 0;
      const std::size_t k1 = std::min(n, i + b);
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = k0; k < k1; ++k) s += T(i, k) * x[k * n + j];
        Y(i, j) = s;
      }
    }
    Vector y(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k0 = (j + 1 > b) ? j + 1 - b : 0;
        const std::size_t k1 = std::min(n, j + b);
        double s = 0.0;
        for (std::size_t k = k0; k < k1; ++k) s += Y(i, k) * T(k, j);
        y[i * n + j] = s;
      }
    }
    return y;
  }

  /// Explicit T (x) T, for oracle-style checks at small n.
  Matrix dense(std::size_t max_dim = kMaxDenseDim) const {
    const std::size_t N = n * n;
    if (N > max_dim) throw SizeLimit("blur dense: dimension exceeds cap");
    Matrix A(N, N);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const double tik = T(i, k);
          if (tik == 0.0) continue;
          for (std::size_t l = 0; l < n; ++l) A(i * n + j, k * n + l) = tik * T(j, l);
        }
    return A;
  }

  LinearOperator to_operator() const {
    auto self = std::make_shared<const KroneckerBlurOperator>(*this);
    return LinearOperator(dim(), dim(), [self](const Vector& x) { return self->apply(x); });
  }
};

/// Build the blur factor T with first-row entries
/// t_k = exp(-k^2 / (2 sigma^2)) / (sigma sqrt(2 pi)) for k < band, 0 beyond.
inline KroneckerBlurOperator blur_operator(std::size_t n, std::size_t band, double sigma) {
  if (band < 1 || band > n) throw InvalidSize("blur_operator: band must satisfy 1 <= band <= n");
  if (!(sigma > 0.0)) throw InvalidSize("blur_operator: sigma must be positive");

  constexpr double two_pi = 6.283185307179586476925286766559;
  const double scale = 1.0 / (sigma * std::sqrt(two_pi));
  std::vector<double> t(band);
  for (std::size_t k = 0; k < band; ++k) {
    const double kk = static_cast<double>(k);
    t[k] = scale * std::exp(-kk * kk / (2.0 * sigma * sigma));
  }

  KroneckerBlurOperator op;
  op.n = n;
  op.band = band;
  op.sigma = sigma;
  op.T = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t d = (i > j) ? i - j : j - i;
      if (d < band) op.T(i, j) = t[d];
    }
  return op;
}

}  // namespace atreg
