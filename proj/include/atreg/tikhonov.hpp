#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "atreg/arnoldi.hpp"
#include "atreg/operators.hpp"

namespace atreg {

/// Regularization-parameter selection mode.
///  - embedded:     the noise norm is unknown; the previous GMRES residual
///                  stands in for it in the secant update.
///  - secant:       the noise norm is known and drives the secant update.
///  - gmres_switch: pure GMRES (lambda = 0) until the residual drops below
///                  eta * ||e||, then secant updates from there.
enum class ParamMode { embedded, secant, gmres_switch };

struct SolverConfig {
  double lambda0 = 1.0;
  double eta = 1.02;
  double tau_res = 5e-2;
  double tau_discr = 5e-2;
  std::size_t max_iter = 50;
  ParamMode mode = ParamMode::embedded;
  /// Known noise norm ||e||; required by secant and gmres_switch modes.
  double noise_norm = 0.0;
  /// Factor for the zero-numerator substitution in the lambda updates.
  double lambda_floor = 1e-12;
};

struct IterationRecord {
  std::size_t m = 0;
  double lambda_prev = 0.0;  ///< lambda used for this step's regularized solve
  double phi0 = 0.0;         ///< GMRES residual norm, phi_m(0)
  double phi_lambda = 0.0;   ///< discrepancy phi_m(lambda_prev)
  double lambda_new = 0.0;   ///< updated lambda_m (lambda_prev when no update ran)
  double res_change = 0.0;
  double discr_change = 0.0;
  std::optional<double> rel_error;
};

enum class StopReason { converged, max_iter, breakdown };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iter: return "max_iter";
    case StopReason::breakdown: return "breakdown";
  }
  return "unknown";
}

struct SolveResult {
  Vector x;
  double lambda_final = 0.0;  ///< lambda used for the returned x
  std::size_t iterations = 0;
  std::vector<IterationRecord> history;
  StopReason stop_reason = StopReason::max_iter;
};

/// Incremental projection L_m = W^T L W of a regularization operator onto the
/// growing Krylov basis. Each extension costs one application of L plus O(mN)
/// inner products; the applied vectors L w_k are cached. The identity kind
/// projects to an exact identity.
class RegProjection {
 public:
  explicit RegProjection(RegOperator L) : L_(std::move(L)) {}

  /// Consume basis vectors beyond those already projected. Pass the current
  /// Arnoldi basis truncated to the m vectors that span the solution space.
  void extend(const std::vector<Vector>& basis, std::size_t m) {
    if (m > basis.size()) throw DimensionMismatch("RegProjection: basis shorter than m");
    while (size_ < m) {
      const Vector& w_new = basis[size_];
      if (w_new.size() != L_.dim())
        throw DimensionMismatch("RegProjection: basis vector has wrong dimension");
      const std::size_t mm = size_ + 1;
      Matrix next(mm, mm);
      for (std::size_t i = 0; i + 1 < mm; ++i)
        for (std::size_t j = 0; j + 1 < mm; ++j) next(i, j) = lm_(i, j);
      if (L_.kind() == RegOperator::Kind::identity) {
        for (std::size_t i = 0; i < mm; ++i) next(i, i) = 1.0;
      } else {
        lw_.push_back(L_.apply(w_new));
        for (std::size_t i = 0; i < mm; ++i) next(i, mm - 1) = dot(basis[i], lw_.back());
        for (std::size_t j = 0; j + 1 < mm; ++j) next(mm - 1, j) = dot(w_new, lw_[j]);
      }
      lm_ = std::move(next);
      ++size_;
    }
  }

  std::size_t size() const noexcept { return size_; }

  const Matrix& projected() const {
    if (size_ == 0) throw InvalidSize("RegProjection: empty projection");
    return lm_;
  }

 private:
  RegOperator L_;
  std::vector<Vector> lw_;
  Matrix lm_;
  std::size_t size_ = 0;
};

/// One-shot projection W^T L W onto the first m basis vectors.
inline Matrix project_reg(const RegOperator& L, const std::vector<Vector>& basis, std::size_t m) {
  RegProjection proj(L);
  proj.extend(basis, m);
  return proj.projected();
}

inline Matrix project_reg(const RegOperator& L, const std::vector<Vector>& basis) {
  return project_reg(L, basis, basis.size());
}

/// Solve the projected Tikhonov problem
///   min_y ||Hbar y - c||^2 + lambda ||L_m y||^2
/// through the stacked (2m+1) x m least-squares system [Hbar; sqrt(lambda) L_m].
inline Vector solve_projected(const Matrix& hbar, const Matrix& lm, double lambda,
                              const Vector& c) {
  const std::size_t m = hbar.cols();
  if (hbar.rows() != m + 1) throw DimensionMismatch("solve_projected: Hbar must be (m+1) x m");
  if (lm.rows() != m || lm.cols() != m)
    throw DimensionMismatch("solve_projected: L_m must be m x m");
  if (c.size() != m + 1) throw DimensionMismatch("solve_projected: c must have length m+1");
  if (lambda < 0.0) throw InvalidSize("solve_projected: lambda must be nonnegative");

  const double sqrt_lambda = std::sqrt(lambda);
  Matrix stacked(2 * m + 1, m);
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t j = 0; j < m; ++j) stacked(i, j) = hbar(i, j);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) stacked(m + 1 + i, j) = sqrt_lambda * lm(i, j);

  Vector rhs(2 * m + 1, 0.0);
  for (std::size_t i = 0; i <= m; ++i) rhs[i] = c[i];
  return lstsq(stacked, rhs);
}

/// Discrepancy ||Hbar y - c||. With y from solve_projected this equals the
/// full-space residual ||b - A W_m y|| up to the basis orthonormality error.
inline double discrepancy(const Matrix& hbar, const Vector& y, const Vector& c) {
  Vector r = matvec(hbar, y);
  if (r.size() != c.size()) throw DimensionMismatch("discrepancy: dimension mismatch");
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c[i];
  return norm(r);
}

namespace detail {

/// Least squares min_y ||Hbar y - c|| for the rectangular Hessenberg factor,
/// by Givens rotations on the subdiagonal. Returns the minimizer and the
/// residual norm |g_{m+1}|, which is free of cancellation and exactly
/// non-increasing as columns are appended. The projected Hessenberg of a
/// severely ill-posed operator goes numerically rank deficient after a few
/// steps, so back substitution is truncated: components whose triangular
/// diagonal falls below the rank tolerance are set to zero.
inline std::pair<Vector, double> hessenberg_lstsq(const Matrix& hbar, const Vector& c) {
  const std::size_t m = hbar.cols();
  if (hbar.rows() != m + 1) throw DimensionMismatch("hessenberg_lstsq: Hbar must be (m+1) x m");
  if (c.size() != m + 1) throw DimensionMismatch("hessenberg_lstsq: c must have length m+1");

  Matrix R = hbar;
  Vector g = c;
  for (std::size_t k = 0; k < m; ++k) {
    const double a = R(k, k);
    const double b = R(k + 1, k);
    const double r = std::hypot(a, b);
    if (r == 0.0) continue;
    const double cs = a / r;
    const double sn = b / r;
    for (std::size_t j = k; j < m; ++j) {
      const double t1 = R(k, j);
      const double t2 = R(k + 1, j);
      R(k, j) = cs * t1 + sn * t2;
      R(k + 1, j) = -sn * t1 + cs * t2;
    }
    const double t1 = g[k];
    const double t2 = g[k + 1];
    g[k] = cs * t1 + sn * t2;
    g[k + 1] = -sn * t1 + cs * t2;
  }

  double max_diag = 0.0;
  for (std::size_t k = 0; k < m; ++k) max_diag = std::max(max_diag, std::abs(R(k, k)));
  const double tol = kRankTolerance * max_diag;

  Vector y(m, 0.0);
  for (std::size_t k = m; k-- > 0;) {
    if (std::abs(R(k, k)) <= tol) continue;
    double sum = g[k];
    const double* row = R.row_ptr(k);
    for (std::size_t j = k + 1; j < m; ++j) sum -= row[j] * y[j];
    y[k] = sum / row[k];
  }
  return {std::move(y), std::abs(g[m])};
}

}  // namespace detail

/// GMRES residual norm phi_m(0), the residual of the unregularized projected
/// least-squares problem, evaluated through the Givens reduction of the
/// Hessenberg factor.
inline double gmres_residual_norm(const Matrix& hbar, const Vector& c) {
  return detail::hessenberg_lstsq(hbar, c).second;
}

namespace detail {
/// A secant step carries no information when the discrepancy is flat in
/// lambda; below this relative threshold the previous lambda is kept.
inline constexpr double kFlatSecantTolerance = 1e-14;
}  // namespace detail

/// Secant update of the discrepancy equation phi_m(lambda) = eta ||e||:
///   lambda_m = |eta ||e|| - phi_m(0)| / |phi_m(lambda_prev) - phi_m(0)| * lambda_prev.
/// A flat secant keeps lambda_prev; an exactly zero result is replaced by
/// lambda_floor * lambda_prev so the next step stays well defined.
inline double update_lambda_secant(double phi0, double phi_lambda, double lambda_prev,
                                   double eta_times_noise, double lambda_floor = 1e-12) {
  const double den = phi_lambda - phi0;
  if (den <= detail::kFlatSecantTolerance * phi0) return lambda_prev;
  double lam = std::abs(eta_times_noise - phi0) / den * lambda_prev;
  if (lam == 0.0) lam = lambda_floor * lambda_prev;
  return lam;
}

/// Embedded update: the unknown ||e|| is replaced by the previous GMRES
/// residual phi_{m-1}(0), giving
///   lambda_m = (eta phi_{m-1}(0) - phi_m(0)) / (phi_m(lambda_prev) - phi_m(0)) * lambda_prev,
/// which is nonnegative because the GMRES residuals decrease and the
/// discrepancy grows with lambda. A residual increase beyond rounding is
/// reported as MonotonicityViolation since it signals lost orthogonality.
inline double update_lambda_embedded(double phi0_prev, double phi0, double phi_lambda,
                                     double lambda_prev, double eta,
                                     double lambda_floor = 1e-12) {
  if (phi0 > phi0_prev + 1e-12 * std::max(phi0_prev, phi_lambda))
    throw MonotonicityViolation("update_lambda_embedded: GMRES residual increased (" +
                                std::to_string(phi0_prev) + " -> " + std::to_string(phi0) + ")");
  const double den = phi_lambda - phi0;
  if (den <= detail::kFlatSecantTolerance * phi0) return lambda_prev;
  double num = eta * phi0_prev - phi0;
  if (num < 0.0) num = 0.0;  // only reachable through rounding at stagnation
  double lam = num / den * lambda_prev;
  if (lam == 0.0) lam = lambda_floor * lambda_prev;
  return lam;
}

/// Both stability tests from the stopping rule: the GMRES residual and the
/// discrepancy each changed by less than their threshold, in relative terms,
/// between the last two records. Needs at least three records.
inline bool should_stop(const std::vector<IterationRecord>& history, double tau_res,
                        double tau_discr) {
  if (history.size() < 3) return false;
  const IterationRecord& cur = history[history.size() - 1];
  const IterationRecord& prev = history[history.size() - 2];

  auto rel_change = [](double now, double before) {
    const double num = std::abs(now - before);
    if (before == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / before;
  };
  return rel_change(cur.phi0, prev.phi0) < tau_res &&
         rel_change(cur.phi_lambda, prev.phi_lambda) < tau_discr;
}

/// Arnoldi-Tikhonov driver. Per step: extend the Arnoldi decomposition,
/// evaluate the GMRES residual phi_m(0), solve the projected Tikhonov problem
/// with the current lambda (lambda0 for the first two steps), evaluate the
/// discrepancy, and update lambda from step 2 on according to the configured
/// mode. Stops on stability of both residual and discrepancy, on max_iter, or
/// on Arnoldi breakdown. Returns x = W_m y_{m, lambda_{m-1}}.
///
/// When x_ex is supplied the relative error of each iterate is recorded; it
/// never influences control flow.
inline SolveResult at_solve(const LinearOperator& A, const Vector& b, const RegOperator& L,
                            const SolverConfig& config, const Vector* x_ex = nullptr) {
  if (!(config.eta > 1.0)) throw InvalidSize("at_solve: eta must exceed 1");
  if (!(config.lambda0 > 0.0)) throw InvalidSize("at_solve: lambda0 must be positive");
  if (config.max_iter == 0) throw InvalidSize("at_solve: max_iter must be positive");
  if (L.dim() != A.dim_in()) throw DimensionMismatch("at_solve: L and A dimensions differ");
  const bool needs_noise =
      config.mode == ParamMode::secant || config.mode == ParamMode::gmres_switch;
  if (needs_noise && !(config.noise_norm > 0.0))
    throw InvalidNoise("at_solve: this mode requires a positive noise norm");

  ArnoldiState state = arnoldi_init(A, b);
  RegProjection projection(L);

  SolveResult result;
  double lambda_prev = config.lambda0;
  double phi0_prev = 0.0;
  double phi_lambda_prev = 0.0;
  bool switched = config.mode != ParamMode::gmres_switch;  // pure-GMRES phase flag
  Vector y_last, y0_last;
  std::size_t m_final = 0;

  const double x_ex_norm = x_ex ? norm(*x_ex) : 0.0;

  while (result.history.size() < config.max_iter) {
    arnoldi_step(state, A);
    const std::size_t m = state.m();
    const Matrix hbar = state.hessenberg();
    const Vector c = state.rhs_projected();
    projection.extend(state.basis(), m);
    const Matrix& lm = projection.projected();

    auto [y0, phi0] = detail::hessenberg_lstsq(hbar, c);

    if (!switched && phi0 < config.eta * config.noise_norm) switched = true;

    const double lambda_used = switched ? lambda_prev : 0.0;
    Vector y = (lambda_used == 0.0) ? y0 : solve_projected(hbar, lm, lambda_used, c);
    const double phi_lambda = (lambda_used == 0.0) ? phi0 : discrepancy(hbar, y, c);

    double lambda_new = switched ? lambda_prev : 0.0;
    if (m >= 2 && switched) {
      switch (config.mode) {
        case ParamMode::embedded:
          lambda_new = update_lambda_embedded(phi0_prev, phi0, phi_lambda, lambda_prev,
                                              config.eta, config.lambda_floor);
          break;
        case ParamMode::secant:
        case ParamMode::gmres_switch:
          lambda_new = update_lambda_secant(phi0, phi_lambda, lambda_prev,
                                            config.eta * config.noise_norm, config.lambda_floor);
          break;
      }
    }

    IterationRecord rec;
    rec.m = m;
    rec.lambda_prev = lambda_used;
    rec.phi0 = phi0;
    rec.phi_lambda = phi_lambda;
    rec.lambda_new = lambda_new;
    if (m >= 2) {
      rec.res_change = phi0_prev == 0.0 ? 0.0 : std::abs(phi0 - phi0_prev) / phi0_prev;
      rec.discr_change =
          phi_lambda_prev == 0.0 ? 0.0 : std::abs(phi_lambda - phi_lambda_prev) / phi_lambda_prev;
    }
    if (x_ex) {
      Vector xm(A.dim_in(), 0.0);
      for (std::size_t j = 0; j < m; ++j) axpy(y[j], state.basis()[j], xm);
      rec.rel_error = x_ex_norm > 0.0 ? norm(subtract(xm, *x_ex)) / x_ex_norm : 0.0;
    }
    result.history.push_back(rec);

    y_last = std::move(y);
    y0_last = y0;
    m_final = m;
    phi0_prev = phi0;
    phi_lambda_prev = phi_lambda;
    if (switched) lambda_prev = lambda_new;

    if (state.breakdown()) {
      result.stop_reason = StopReason::breakdown;
      break;
    }
    if (should_stop(result.history, config.tau_res, config.tau_discr)) {
      result.stop_reason = StopReason::converged;
      break;
    }
    if (result.history.size() == config.max_iter) {
      result.stop_reason = StopReason::max_iter;
      break;
    }
    if (m == A.dim_in()) {
      // Krylov space exhausted without the breakdown flag; treat as max_iter.
      result.stop_reason = StopReason::max_iter;
      break;
    }
  }

  // At a lucky breakdown the subspace is invariant; when the projected system
  // is also consistent the exact solution is available and regularizing it
  // would only move away from it.
  const Vector* y_out = &y_last;
  result.lambda_final = result.history.back().lambda_prev;
  if (result.stop_reason == StopReason::breakdown &&
      result.history.back().phi0 <= 1e-10 * state.b_norm()) {
    y_out = &y0_last;
    result.lambda_final = 0.0;
  }

  result.x.assign(A.dim_in(), 0.0);
  for (std::size_t j = 0; j < m_final; ++j) axpy((*y_out)[j], state.basis()[j], result.x);
  result.iterations = result.history.size();
  return result;
}

}  // namespace atreg
