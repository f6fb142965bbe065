#pragma once

#include "admm_eki/problem.hpp"

namespace admm_eki {

/// Observation-noise covariance Q-hat = blkdiag(Sigma_Q, Sigma_R, Sigma_rho)
/// for the stacked residual [U; X - Z; G + S + Y], kept block-diagonal.
///
/// The covariance blocks are the inverses of the cost weights
/// (Sigma_Q = I_H (x) Q^-1, Sigma_R = blkdiag(I_H (x) R^-1, R_H^-1),
/// Sigma_rho = I / rho), so that 1/2 |C|^2 in the Q-hat^-1 metric equals
/// the primal objective Phi.
class BlockWeighting {
 public:
  BlockWeighting(const ProblemSpec& spec, double rho);

  Index input_block() const { return horizon_ * input_weight_.rows(); }
  Index state_block() const { return (horizon_ + 1) * state_weight_.rows(); }
  Index constraint_block() const { return horizon_ * constraints_; }
  Index size() const { return input_block() + state_block() + constraint_block(); }
  double rho() const { return rho_; }

  /// Q-hat^-1 * M, applied block by block.
  Matrix apply_inverse(const Matrix& m) const;
  /// Adds Q-hat to a dense d x d matrix in place.
  void add_to(Matrix& m) const;
  /// Dense Q-hat (for tests and small problems).
  Matrix dense() const;

 private:
  Index horizon_;
  Index constraints_;
  double rho_;
  // Cost weights (the inverse covariance blocks) and their inverses.
  Matrix input_weight_, state_weight_, terminal_weight_;
  Matrix input_cov_, state_cov_, terminal_cov_;
};

BlockWeighting build_weighting(const ProblemSpec& spec, double rho);

/// Phi(U) = J(x0, U) + rho/2 |G(x0, U) + S + Y|^2
double primal_objective(const ProblemSpec& spec, const Vector& x0,
                        const ControlSequence& controls, const Vector& slack,
                        const Vector& dual, double rho);

}  // namespace admm_eki
