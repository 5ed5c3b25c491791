#include <gtest/gtest.h>

#include <cmath>

#include "atreg/linalg.hpp"
#include "test_util.hpp"

using namespace atreg;
using atreg_test::gauss_solve;
using atreg_test::random_matrix;
using atreg_test::random_vector;
using atreg_test::sym_eigenvalues;
using atreg_test::transpose_times;

namespace {

double residual_norm(const Matrix& M, const Vector& y, const Vector& rhs) {
  Vector r = matvec(M, y);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= rhs[i];
  return norm(r);
}

}  // namespace

TEST(Lstsq, IdentityReturnsRhs) {
  const Vector y = lstsq(Matrix::identity(3), {1.0, 2.0, 3.0});
  EXPECT_NEAR(y[0], 1.0, 1e-14);
  EXPECT_NEAR(y[1], 2.0, 1e-14);
  EXPECT_NEAR(y[2], 3.0, 1e-14);
}

TEST(Lstsq, AnalyticMean) {
  const Matrix M(2, 1, {1.0, 1.0});
  const Vector y = lstsq(M, {1.0, 3.0});
  ASSERT_EQ(y.size(), 1u);
  EXPECT_NEAR(y[0], 2.0, 1e-14);
}

TEST(Lstsq, MatchesNormalEquationOracle) {
  const Matrix M = random_matrix(6, 3, 41);
  const Vector rhs = random_vector(6, 42);
  const Vector y = lstsq(M, rhs);

  // Oracle: solve M^T M y = M^T rhs with test-local elimination.
  const Matrix mtm = transpose_times(M, M);
  Vector mtb(3, 0.0);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 3; ++j) mtb[j] += M(i, j) * rhs[i];
  const Vector y_ref = gauss_solve(mtm, mtb);

  for (std::size_t j = 0; j < 3; ++j)
    EXPECT_NEAR(y[j], y_ref[j], 1e-10 * std::max(1.0, std::abs(y_ref[j])));
}

TEST(Lstsq, MinimalityUnderPerturbations) {
  const Matrix M = random_matrix(7, 4, 7);
  const Vector rhs = random_vector(7, 8);
  const Vector y = lstsq(M, rhs);
  const double base = residual_norm(M, y, rhs);
  for (std::uint32_t k = 0; k < 20; ++k) {
    Vector yp = y;
    const Vector delta = random_vector(4, 100 + k);
    for (std::size_t j = 0; j < 4; ++j) yp[j] += 0.1 * delta[j];
    EXPECT_GE(residual_norm(M, yp, rhs), base - 1e-12);
  }
}

TEST(Lstsq, ResidualOrthogonalToRange) {
  const Matrix M = random_matrix(8, 5, 55);
  const Vector rhs = random_vector(8, 56);
  const Vector y = lstsq(M, rhs);
  Vector r = matvec(M, y);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= rhs[i];
  Vector mtr(5, 0.0);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 5; ++j) mtr[j] += M(i, j) * r[i];
  EXPECT_LE(norm(mtr), 1e-8 * M.frobenius_norm() * norm(rhs));
}

TEST(Lstsq, RankDeficientThrowsWithDetectedRank) {
  // Two identical columns: rank 1 of 2.
  const Matrix M(4, 2, {1, 1, 2, 2, 3, 3, 4, 4});
  try {
    lstsq(M, {1.0, 2.0, 3.0, 4.0});
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient& e) {
    EXPECT_EQ(e.detected_rank(), 1u);
  }
}

TEST(Lstsq, UnderdeterminedRejected) {
  EXPECT_THROW(lstsq(random_matrix(3, 5, 1), random_vector(3, 2)), DimensionMismatch);
}

TEST(SolveDense, IdentityAndDiagonal) {
  const Vector x = solve_dense(Matrix::identity(3), {4.0, 5.0, 6.0});
  EXPECT_NEAR(x[1], 5.0, 1e-15);
  const Matrix D(2, 2, {2, 0, 0, 4});
  const Vector y = solve_dense(D, {2.0, 4.0});
  EXPECT_NEAR(y[0], 1.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0, 1e-15);
}

TEST(SolveDense, RandomWellConditionedResidual) {
  Matrix M = random_matrix(5, 5, 11);
  for (std::size_t i = 0; i < 5; ++i) M(i, i) += 4.0;  // diagonally dominant
  const Vector rhs = random_vector(5, 12);
  const Vector x = solve_dense(M, rhs);
  EXPECT_LE(residual_norm(M, x, rhs), 1e-12 * norm(rhs));
}

TEST(SolveDense, SingularThrows) {
  const Matrix M(2, 2, {1, 2, 2, 4});
  EXPECT_THROW(solve_dense(M, {1.0, 2.0}), Singular);
}

TEST(SingularValues, DiagonalAndPermutation) {
  const Vector s1 = singular_values(Matrix(2, 2, {3, 0, 0, 1}));
  EXPECT_NEAR(s1[0], 3.0, 1e-14);
  EXPECT_NEAR(s1[1], 1.0, 1e-14);
  const Vector s2 = singular_values(Matrix(2, 2, {0, 1, 1, 0}));
  EXPECT_NEAR(s2[0], 1.0, 1e-14);
  EXPECT_NEAR(s2[1], 1.0, 1e-14);
}

TEST(SingularValues, SquaresMatchEigenOracle) {
  const Matrix M = random_matrix(6, 4, 77);
  const Vector s = singular_values(M);
  ASSERT_EQ(s.size(), 4u);
  const Vector ev = sym_eigenvalues(transpose_times(M, M));
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(s[j] * s[j], ev[j], 1e-8);
}

TEST(SingularValues, DescendingAndTransposeInvariant) {
  const Matrix M = random_matrix(7, 5, 99);
  const Vector s = singular_values(M);
  for (std::size_t j = 1; j < s.size(); ++j) EXPECT_LE(s[j], s[j - 1]);
  const Vector st = singular_values(M.transposed());
  ASSERT_EQ(st.size(), s.size());
  for (std::size_t j = 0; j < s.size(); ++j) EXPECT_NEAR(s[j], st[j], 1e-10);
}

TEST(Svd, ReconstructsThinFactorization) {
  const Matrix M = random_matrix(6, 4, 123);
  const SvdResult f = svd(M);
  // Check M V = U diag(s) column by column.
  for (std::size_t j = 0; j < 4; ++j) {
    Vector vj(4);
    for (std::size_t i = 0; i < 4; ++i) vj[i] = f.V(i, j);
    Vector mv(6, 0.0);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t k = 0; k < 4; ++k) mv[i] += M(i, k) * vj[k];
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(mv[i], f.U(i, j) * f.s[j], 1e-10);
  }
}

TEST(Matrix, ValidatesConstruction) {
  EXPECT_THROW(Matrix(0, 3), InvalidSize);
  EXPECT_THROW(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionMismatch);
  EXPECT_THROW(Matrix(1, 2, {1.0, std::nan("")}), NumericalFailure);
}
