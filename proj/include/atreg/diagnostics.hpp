#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <thread>
#include <vector>

#include "atreg/tikhonov.hpp"

namespace atreg {

/// Dense-only diagnostics refuse operators beyond this dimension.
inline constexpr std::size_t kDiagnosticsDenseCap = 512;

/// Per-step record of the subdiagonal decay against the singular values of
/// the full operator: h_{m+1,m}, sigma_m, and h_{m+1,m} / (m^{3/2} sigma_m).
struct DecayRow {
  std::size_t m = 0;
  double h_sub = 0.0;
  double sigma = 0.0;
  double ratio = 0.0;
};

struct DecayReport {
  std::vector<DecayRow> rows;
  bool truncated_by_breakdown = false;
};

/// GMRES residual history against a known noise norm.
struct StagnationReport {
  std::vector<double> residuals;
  double noise_norm = 0.0;
  double min_rel_distance = std::numeric_limits<double>::infinity();
  std::size_t argmin_m = 0;
  bool noise_norm_positive = false;
};

/// Residual norm of the full-orthogonalization method,
/// rho_m = h_{m+1,m} |e_m^T H_m^{-1} c|. It upper-bounds the GMRES residual.
inline double fom_residual_norm(const Matrix& h_square, double h_sub, const Vector& c) {
  if (h_square.rows() != h_square.cols())
    throw DimensionMismatch("fom_residual_norm: H_m must be square");
  if (c.size() != h_square.rows()) throw DimensionMismatch("fom_residual_norm: c length mismatch");
  if (h_sub == 0.0) return 0.0;
  const Vector z = solve_dense(h_square, c);
  return h_sub * std::abs(z.back());
}

/// Largest relative violation, over m >= 2, of the peak-plateau identity
/// 1/||r_m||^2 = 1/||rho_m||^2 + 1/||r_{m-1}||^2.
inline double peak_plateau_violation(const std::vector<double>& r_norms,
                                     const std::vector<double>& rho_norms) {
  if (r_norms.size() != rho_norms.size())
    throw DimensionMismatch("peak_plateau_violation: sequences must align");
  double worst = 0.0;
  for (std::size_t k = 1; k < r_norms.size(); ++k) {
    const double r = r_norms[k];
    const double r_prev = r_norms[k - 1];
    const double rho = rho_norms[k];
    if (!(r > 0.0) || !(r_prev > 0.0) || !(rho > 0.0) || !std::isfinite(rho))
      throw NumericalFailure("peak_plateau_violation: norms must be positive and finite");
    const double lhs = 1.0 / (r * r);
    const double rhs = 1.0 / (rho * rho) + 1.0 / (r_prev * r_prev);
    worst = std::max(worst, std::abs(lhs - rhs) / lhs);
  }
  return worst;
}

/// Run Arnoldi from b and tabulate the subdiagonal decay against the singular
/// values of the densely materialized operator. Breakdown truncates the
/// report; it is recorded, not an error.
inline DecayReport subdiag_decay(const LinearOperator& A, const Vector& b, std::size_t steps) {
  if (!A.has_dense()) throw SizeLimit("subdiag_decay: operator has no dense materialization");
  if (A.dim_in() > kDiagnosticsDenseCap)
    throw SizeLimit("subdiag_decay: dimension exceeds the dense diagnostics cap");
  const Vector sigma = singular_values(A.dense());

  DecayReport report;
  ArnoldiState state = arnoldi_init(A, b);
  for (std::size_t m = 1; m <= std::min(steps, A.dim_in()); ++m) {
    arnoldi_step(state, A);
    DecayRow row;
    row.m = m;
    row.h_sub = state.subdiag().back();
    row.sigma = sigma[m - 1];
    const double denom = std::pow(static_cast<double>(m), 1.5) * row.sigma;
    row.ratio = denom > 0.0 ? row.h_sub / denom : 0.0;
    report.rows.push_back(row);
    if (state.breakdown()) {
      report.truncated_by_breakdown = true;
      break;
    }
  }
  return report;
}

/// The noise-revealing quantities
///   (1/||e||) * || A^k b / ||A^k b|| - A^k b_ex / ||A^k b_ex|| ||,  k = 1..K,
/// computed with per-step normalization so repeated applications cannot
/// underflow. Stops early if an iterate vanishes.
inline std::vector<double> noise_revealing_curve(const LinearOperator& A, const Vector& b,
                                                 const Vector& b_ex, const Vector& e,
                                                 std::size_t K) {
  const double e_norm = norm(e);
  if (!(e_norm > 0.0)) throw InvalidNoise("noise_revealing_curve: noise norm must be positive");
  if (K < 1) throw InvalidSize("noise_revealing_curve: K must be at least 1");

  std::vector<double> values;
  Vector v = b;
  Vector v_ex = b_ex;
  {
    const double nv = norm(v);
    const double nx = norm(v_ex);
    if (nv == 0.0 || nx == 0.0) return values;
    v = scaled(v, 1.0 / nv);
    v_ex = scaled(v_ex, 1.0 / nx);
  }
  for (std::size_t k = 1; k <= K; ++k) {
    v = A.apply(v);
    v_ex = A.apply(v_ex);
    const double nv = norm(v);
    const double nx = norm(v_ex);
    if (nv == 0.0 || nx == 0.0) break;
    v = scaled(v, 1.0 / nv);
    v_ex = scaled(v_ex, 1.0 / nx);
    values.push_back(norm(subtract(v, v_ex)) / e_norm);
  }
  return values;
}

/// Pure GMRES residual history with its closest approach to the noise norm.
inline StagnationReport residual_stagnation(const LinearOperator& A, const Vector& b,
                                            double noise_norm, std::size_t steps) {
  if (steps < 2) throw InvalidSize("residual_stagnation: needs at least 2 steps");
  StagnationReport report;
  report.noise_norm = noise_norm;
  report.noise_norm_positive = noise_norm > 0.0;

  ArnoldiState state = arnoldi_init(A, b);
  for (std::size_t m = 1; m <= std::min(steps, A.dim_in()); ++m) {
    arnoldi_step(state, A);
    const double r = gmres_residual_norm(state.hessenberg(), state.rhs_projected());
    report.residuals.push_back(r);
    if (report.noise_norm_positive) {
      const double d = std::abs(r - noise_norm) / noise_norm;
      if (d < report.min_rel_distance) {
        report.min_rel_distance = d;
        report.argmin_m = m;
      }
    }
    if (state.breakdown()) break;
  }
  return report;
}

/// Singular values of the rectangular Hessenberg factor, descending.
inline Vector projected_singular_values(const Matrix& hbar) { return singular_values(hbar); }

/// Logarithmic grid, four points per decade from 1e-12 to 1e2 (57 points).
inline std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  grid.reserve(57);
  for (int i = 0; i <= 56; ++i) grid.push_back(std::pow(10.0, -12.0 + 0.25 * i));
  return grid;
}

/// Brute-force reference parameter: solve the full-dimension Tikhonov problem
/// for every lambda on the grid through stacked dense least squares and return
/// the lambda minimizing the distance to the exact solution, together with the
/// achieved relative error. Grid points are evaluated concurrently.
inline std::pair<double, double> oracle_lambda(const Matrix& A_dense, const Vector& b,
                                               const RegOperator& L, const Vector& x_ex,
                                               const std::vector<double>& grid =
                                                   default_lambda_grid()) {
  const std::size_t N = A_dense.rows();
  if (A_dense.cols() != N) throw DimensionMismatch("oracle_lambda: A must be square");
  if (N > kDiagnosticsDenseCap)
    throw SizeLimit("oracle_lambda: dimension exceeds the dense diagnostics cap");
  if (grid.empty()) throw InvalidSize("oracle_lambda: empty grid");
  for (double lam : grid)
    if (!(lam > 0.0)) throw InvalidSize("oracle_lambda: grid values must be positive");
  const double x_norm = norm(x_ex);
  if (!(x_norm > 0.0)) throw InvalidReference("oracle_lambda: exact solution has zero norm");

  const Matrix L_dense = L.dense(kDiagnosticsDenseCap);
  if (L_dense.rows() != N) throw DimensionMismatch("oracle_lambda: L and A dimensions differ");

  auto error_at = [&](double lambda) {
    const double s = std::sqrt(lambda);
    Matrix stacked(2 * N, N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        stacked(i, j) = A_dense(i, j);
        stacked(N + i, j) = s * L_dense(i, j);
      }
    Vector rhs(2 * N, 0.0);
    for (std::size_t i = 0; i < N; ++i) rhs[i] = b[i];
    const Vector x = lstsq(stacked, rhs);
    return norm(subtract(x, x_ex)) / x_norm;
  };

  std::vector<double> errors(grid.size());
  const std::size_t workers =
      std::min<std::size_t>(grid.size(), std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> futures;
  futures.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < grid.size(); i += workers) errors[i] = error_at(grid[i]);
    }));
  }
  for (auto& f : futures) f.get();

  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (errors[i] < errors[best]) best = i;
  return {grid[best], errors[best]};
}

/// ||x - x_ex|| / ||x_ex||; throws InvalidReference when x_ex vanishes.
inline double relative_error(const Vector& x, const Vector& x_ex) {
  const double ref = norm(x_ex);
  if (!(ref > 0.0)) throw InvalidReference("relative_error: reference has zero norm");
  return norm(subtract(x, x_ex)) / ref;
}

}  // namespace atreg
