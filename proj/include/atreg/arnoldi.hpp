#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "atreg/operators.hpp"

namespace atreg {

/// Incrementally built Arnoldi decomposition A W_m = W_{m+1} Hbar_m with
/// w_1 = b / ||b||. Orthogonalization is modified Gram-Schmidt followed by one
/// unconditional full reorthogonalization pass, which keeps the basis
/// orthonormal well below the noise levels the solver cares about.
class ArnoldiState {
 public:
  /// Completed steps; the Hessenberg factor has m columns.
  std::size_t m() const noexcept { return hcols_.size(); }

  /// Orthonormal basis vectors; m+1 of them after a regular step, m after a
  /// step that broke down.
  const std::vector<Vector>& basis() const noexcept { return basis_; }

  /// The (m+1) x m upper-Hessenberg factor.
  Matrix hessenberg() const {
    const std::size_t steps = m();
    Matrix H(steps + 1, steps);
    for (std::size_t j = 0; j < steps; ++j)
      for (std::size_t i = 0; i < hcols_[j].size(); ++i) H(i, j) = hcols_[j][i];
    return H;
  }

  /// Leading m x m block (the square Hessenberg of the full-orthogonalization
  /// method).
  Matrix hessenberg_square() const {
    const std::size_t steps = m();
    Matrix H(steps, steps);
    for (std::size_t j = 0; j < steps; ++j) {
      const std::size_t rows = std::min(hcols_[j].size(), steps);
      for (std::size_t i = 0; i < rows; ++i) H(i, j) = hcols_[j][i];
    }
    return H;
  }

  /// Subdiagonal entries h_{k+1,k}, one per completed step, nonnegative.
  const std::vector<double>& subdiag() const noexcept { return subdiag_; }

  bool breakdown() const noexcept { return breakdown_; }
  double b_norm() const noexcept { return b_norm_; }

  /// Projected right-hand side ||b|| e_1 of length m+1.
  Vector rhs_projected() const {
    Vector c(m() + 1, 0.0);
    c[0] = b_norm_;
    return c;
  }

 private:
  friend ArnoldiState arnoldi_init(const LinearOperator&, const Vector&);
  friend void arnoldi_step(ArnoldiState&, const LinearOperator&);

  std::vector<Vector> basis_;
  std::vector<Vector> hcols_;  // column j holds H(0..j+1, j)
  std::vector<double> subdiag_;
  double b_norm_ = 0.0;
  bool breakdown_ = false;
};

/// Start the Arnoldi process from b; throws ZeroStartVector when ||b|| = 0.
inline ArnoldiState arnoldi_init(const LinearOperator& A, const Vector& b) {
  if (b.size() != A.dim_in()) throw DimensionMismatch("arnoldi_init: dimension mismatch");
  const double b_norm = norm(b);
  if (b_norm == 0.0) throw ZeroStartVector("arnoldi_init: start vector has zero norm");
  ArnoldiState state;
  state.b_norm_ = b_norm;
  state.basis_.push_back(scaled(b, 1.0 / b_norm));
  return state;
}

/// Extend the decomposition by one step. Breakdown is flagged when the new
/// subdiagonal entry falls below 1e-12 * ||A w_m||; the Hessenberg column is
/// still recorded but no new basis vector is appended.
inline void arnoldi_step(ArnoldiState& state, const LinearOperator& A) {
  if (state.breakdown_) throw BreakdownError("arnoldi_step: process already broke down");
  const std::size_t m = state.m();
  if (m >= A.dim_in()) throw InvalidSize("arnoldi_step: Krylov dimension cannot exceed N");

  Vector w = A.apply(state.basis_.back());
  const double aw_norm = norm(w);

  Vector hcol(m + 2, 0.0);
  for (std::size_t i = 0; i <= m; ++i) {
    const double hij = dot(state.basis_[i], w);
    hcol[i] = hij;
    axpy(-hij, state.basis_[i], w);
  }
  // Full reorthogonalization pass.
  for (std::size_t i = 0; i <= m; ++i) {
    const double corr = dot(state.basis_[i], w);
    hcol[i] += corr;
    axpy(-corr, state.basis_[i], w);
  }

  const double h_next = norm(w);
  hcol[m + 1] = h_next;
  state.hcols_.push_back(std::move(hcol));
  state.subdiag_.push_back(h_next);

  if (h_next <= 1e-12 * aw_norm) {
    state.breakdown_ = true;
  } else {
    state.basis_.push_back(scaled(w, 1.0 / h_next));
  }
}

}  // namespace atreg
