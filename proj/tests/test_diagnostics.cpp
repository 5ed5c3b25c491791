#include <gtest/gtest.h>

#include <cmath>

#include "atreg/diagnostics.hpp"
#include "atreg/problems.hpp"
#include "test_util.hpp"

using namespace atreg;
using atreg_test::random_matrix;
using atreg_test::random_vector;

TEST(FomResidual, TrivialValues) {
  EXPECT_DOUBLE_EQ(fom_residual_norm(Matrix::identity(3), 0.0, {1.0, 0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(fom_residual_norm(Matrix::identity(1), 0.5, {1.0}), 0.5);
}

TEST(FomResidual, UpperBoundsGmresResidualOnFoxgood) {
  const TestProblem p = gen_foxgood(64);
  ArnoldiState st = arnoldi_init(p.A, p.b_ex);
  for (int m = 1; m <= 10; ++m) {
    arnoldi_step(st, p.A);
    const double r = gmres_residual_norm(st.hessenberg(), st.rhs_projected());
    Vector c(static_cast<std::size_t>(m), 0.0);
    c[0] = st.b_norm();
    const double rho = fom_residual_norm(st.hessenberg_square(), st.subdiag().back(), c);
    EXPECT_GE(rho, r - 1e-12) << "m=" << m;
    if (st.breakdown()) break;
  }
}

TEST(PeakPlateau, IdentityEvaluations) {
  // Consistent triple: 1/r_2^2 = 1/rho_2^2 + 1/r_1^2 with r_1 = rho_2 = 1.
  EXPECT_NEAR(peak_plateau_violation({1.0, 1.0 / std::sqrt(2.0)}, {9.9, 1.0}), 0.0, 1e-14);
  // Fabricated mismatch.
  EXPECT_GT(peak_plateau_violation({1.0, 0.9}, {9.9, 1.0}), 0.3);
  EXPECT_THROW(peak_plateau_violation({1.0, 0.0}, {9.9, 1.0}), NumericalFailure);
  EXPECT_THROW(peak_plateau_violation({1.0}, {1.0, 2.0}), DimensionMismatch);
}

TEST(PeakPlateau, HoldsOnNoiselessShawRun) {
  const TestProblem p = gen_shaw(64);
  ArnoldiState st = arnoldi_init(p.A, p.b_ex);
  std::vector<double> r, rho;
  for (int m = 1; m <= 8; ++m) {
    arnoldi_step(st, p.A);
    r.push_back(gmres_residual_norm(st.hessenberg(), st.rhs_projected()));
    Vector c(static_cast<std::size_t>(m), 0.0);
    c[0] = st.b_norm();
    rho.push_back(fom_residual_norm(st.hessenberg_square(), st.subdiag().back(), c));
    if (st.breakdown()) break;
  }
  EXPECT_LE(peak_plateau_violation(r, rho), 1e-8);
}

TEST(SubdiagDecay, DiagonalBreaksDownWithOneRow) {
  const Matrix D(2, 2, {2.0, 0.0, 0.0, 3.0});
  const DecayReport rep = subdiag_decay(dense_operator(D), {1.0, 0.0}, 8);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_TRUE(rep.truncated_by_breakdown);
  EXPECT_LE(rep.rows[0].h_sub, 1e-12);
  EXPECT_DOUBLE_EQ(rep.rows[0].sigma, 3.0);
}

TEST(SubdiagDecay, RatioBoundedOnBaart) {
  const TestProblem p = gen_baart(64);
  const DecayReport rep = subdiag_decay(p.A, p.b_ex, 10);
  ASSERT_GE(rep.rows.size(), 5u);
  const double first = rep.rows.front().ratio;
  for (const DecayRow& row : rep.rows) {
    EXPECT_TRUE(std::isfinite(row.ratio));
    EXPECT_GE(row.ratio, 0.0);
    EXPECT_LE(row.ratio, 100.0 * first) << "m=" << row.m;
  }
}

TEST(SubdiagDecay, SixOrdersOfMagnitudeOnShaw) {
  const TestProblem p = gen_shaw(64);
  const DecayReport rep = subdiag_decay(p.A, p.b_ex, 12);
  ASSERT_EQ(rep.rows.size(), 12u);
  EXPECT_LT(rep.rows.back().h_sub, 1e-6 * rep.rows.front().h_sub);
}

TEST(SubdiagDecay, RequiresDenseOperatorUnderCap) {
  const KroneckerBlurOperator blur = blur_operator(32, 5, 1.5);
  EXPECT_THROW(subdiag_decay(blur.to_operator(), Vector(1024, 1.0), 5), SizeLimit);
}

TEST(NoiseCurve, ConstantUnderIdentityOperator) {
  const LinearOperator I = dense_operator(Matrix::identity(20));
  const Vector b_ex = random_vector(20, 5);
  const NoisySystem noisy = add_noise(b_ex, 1e-2, 0);
  const auto values = noise_revealing_curve(I, noisy.b, b_ex, noisy.e, 5);
  ASSERT_EQ(values.size(), 5u);
  for (double v : values) EXPECT_NEAR(v, values[0], 1e-12);
}

TEST(NoiseCurve, BoundedAndSmallOnShaw) {
  const TestProblem p = gen_shaw(64);
  const NoisySystem noisy = add_noise(p.b_ex, 1e-2, 0);
  const double e_norm = norm(noisy.e);
  const auto values = noise_revealing_curve(p.A, noisy.b, p.b_ex, noisy.e, 8);
  ASSERT_EQ(values.size(), 8u);
  for (double v : values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 2.0 / e_norm);
  }
  EXPECT_LT(values[0], 0.5);
}

TEST(NoiseCurve, RequiresPositiveNoise) {
  const LinearOperator I = dense_operator(Matrix::identity(4));
  EXPECT_THROW(noise_revealing_curve(I, {1, 2, 3, 4}, {1, 2, 3, 4}, Vector(4, 0.0), 3),
               InvalidNoise);
}

TEST(Stagnation, GuardsZeroNoiseNorm) {
  const TestProblem p = gen_foxgood(24);
  const StagnationReport rep = residual_stagnation(p.A, p.b_ex, 0.0, 6);
  EXPECT_FALSE(rep.noise_norm_positive);
  EXPECT_FALSE(rep.residuals.empty());
}

TEST(Stagnation, ApproachesNoiseNormOnBaart) {
  const TestProblem p = gen_baart(120);
  const NoisySystem noisy = add_noise(p.b_ex, 1e-2, 0);
  const StagnationReport rep = residual_stagnation(p.A, noisy.b, norm(noisy.e), 15);
  EXPECT_LE(rep.min_rel_distance, 1.0);
  for (std::size_t i = 1; i < rep.residuals.size(); ++i)
    EXPECT_LE(rep.residuals[i], rep.residuals[i - 1] * (1.0 + 1e-12));
  EXPECT_THROW(residual_stagnation(p.A, noisy.b, 1.0, 1), InvalidSize);
}

TEST(ProjectedSingularValues, TrivialAndInterlacing) {
  const Vector s = projected_singular_values(Matrix(2, 1, {1.0, 0.0}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0], 1.0, 1e-14);

  const TestProblem p = gen_shaw(64);
  ArnoldiState st = arnoldi_init(p.A, p.b_ex);
  double prev_smallest = 0.0;
  for (int m = 1; m <= 8; ++m) {
    arnoldi_step(st, p.A);
    const Vector sv = projected_singular_values(st.hessenberg());
    if (m > 1) { EXPECT_LE(sv.back(), prev_smallest * (1.0 + 1e-10)) << "m=" << m; }
    prev_smallest = sv.back();
    // Largest value of the rectangular factor dominates the square block's.
    const Vector sq = singular_values(st.hessenberg_square());
    EXPECT_GE(sv.front(), sq.front() - 1e-12);
  }
}

TEST(OracleLambda, SinglePointGridReturnsIt) {
  Matrix M = random_matrix(6, 6, 31);
  for (std::size_t i = 0; i < 6; ++i) M(i, i) += 3.0;
  const Vector x_ex = random_vector(6, 32);
  const LinearOperator A = dense_operator(M);
  const Vector b = A.apply(x_ex);
  const auto [lam, err] = oracle_lambda(M, b, RegOperator::identity(6), x_ex, {0.125});
  EXPECT_DOUBLE_EQ(lam, 0.125);
  EXPECT_GT(err, 0.0);
}

TEST(OracleLambda, NoiselessPicksSmallestLambda) {
  Matrix M = random_matrix(6, 6, 41);
  for (std::size_t i = 0; i < 6; ++i) M(i, i) += 3.0;
  const Vector x_ex = random_vector(6, 42);
  const LinearOperator A = dense_operator(M);
  const Vector b = A.apply(x_ex);
  const auto [lam, err] = oracle_lambda(M, b, RegOperator::identity(6), x_ex, {1e-10, 1e-2, 1.0});
  EXPECT_DOUBLE_EQ(lam, 1e-10);
  EXPECT_LE(err, 1e-6);
}

TEST(OracleLambda, DominatesEmbeddedRuleOnShaw) {
  const TestProblem p = gen_shaw(120);
  const NoisySystem noisy = add_noise(p.b_ex, 1e-3, 0);
  const RegOperator L = deriv1(120);
  SolverConfig cfg;
  const SolveResult res = at_solve(p.A, noisy.b, L, cfg, &p.x_ex);
  const auto [lam, err] = oracle_lambda(p.A.dense(), noisy.b, L, p.x_ex);
  EXPECT_GT(lam, 0.0);
  EXPECT_LE(err, *res.history.back().rel_error + 1e-12);
}

TEST(OracleLambda, ValidatesInputs) {
  const Matrix M = Matrix::identity(4);
  EXPECT_THROW(oracle_lambda(M, {1, 2, 3, 4}, RegOperator::identity(4), {1, 2, 3, 4}, {0.0}),
               InvalidSize);
  EXPECT_THROW(oracle_lambda(M, {1, 2, 3, 4}, RegOperator::identity(4), Vector(4, 0.0), {1.0}),
               InvalidReference);
}

TEST(RelativeError, TrivialValues) {
  const Vector x_ex{3.0, 4.0};
  EXPECT_DOUBLE_EQ(relative_error(x_ex, x_ex), 0.0);
  EXPECT_DOUBLE_EQ(relative_error({0.0, 0.0}, x_ex), 1.0);
  EXPECT_DOUBLE_EQ(relative_error({6.0, 8.0}, x_ex), 1.0);
  EXPECT_THROW(relative_error(x_ex, {0.0, 0.0}), InvalidReference);
}
