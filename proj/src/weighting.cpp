#include "admm_eki/weighting.hpp"

#include <Eigen/Cholesky>

#include <string>

namespace admm_eki {

namespace {

Matrix spd_inverse(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("weight matrix is not positive definite");
  }
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

// out.rows(offset + b*k .. ) = block * in.rows(...) for `count` repeats.
void apply_repeated(const Matrix& block, Index count, Index offset,
                    const Matrix& in, Matrix& out) {
  const Index k = block.rows();
  for (Index b = 0; b < count; ++b) {
    out.middleRows(offset + b * k, k).noalias() = block * in.middleRows(offset + b * k, k);
  }
}

void add_repeated(const Matrix& block, Index count, Index offset, Matrix& m) {
  const Index k = block.rows();
  for (Index b = 0; b < count; ++b) {
    m.block(offset + b * k, offset + b * k, k, k) += block;
  }
}

}  // namespace

BlockWeighting::BlockWeighting(const ProblemSpec& spec, double rho)
    : horizon_(spec.horizon()),
      constraints_(spec.constraint_dim()),
      rho_(rho),
      input_weight_(spec.input_weight()),
      state_weight_(spec.state_weight()),
      terminal_weight_(spec.terminal_weight()) {
  if (!(rho > 0.0)) {
    throw std::invalid_argument("penalty rho must be positive, got " +
                                std::to_string(rho));
  }
  input_cov_ = spd_inverse(input_weight_);
  state_cov_ = spd_inverse(state_weight_);
  terminal_cov_ = spd_inverse(terminal_weight_);
}

Matrix BlockWeighting::apply_inverse(const Matrix& m) const {
  if (m.rows() != size()) throw DimensionError("apply_inverse: row mismatch");
  Matrix out(m.rows(), m.cols());
  apply_repeated(input_weight_, horizon_, 0, m, out);
  const Index off = input_block();
  apply_repeated(state_weight_, horizon_, off, m, out);
  const Index n = state_weight_.rows();
  out.middleRows(off + horizon_ * n, n).noalias() =
      terminal_weight_ * m.middleRows(off + horizon_ * n, n);
  const Index coff = off + state_block();
  out.middleRows(coff, constraint_block()) = rho_ * m.middleRows(coff, constraint_block());
  return out;
}

void BlockWeighting::add_to(Matrix& m) const {
  if (m.rows() != size() || m.cols() != size()) {
    throw DimensionError("add_to: matrix must be d x d");
  }
  add_repeated(input_cov_, horizon_, 0, m);
  const Index off = input_block();
  add_repeated(state_cov_, horizon_, off, m);
  const Index n = state_cov_.rows();
  m.block(off + horizon_ * n, off + horizon_ * n, n, n) += terminal_cov_;
  const Index coff = off + state_block();
  m.block(coff, coff, constraint_block(), constraint_block()).diagonal().array() +=
      1.0 / rho_;
}

Matrix BlockWeighting::dense() const {
  Matrix m = Matrix::Zero(size(), size());
  add_to(m);
  return m;
}

BlockWeighting build_weighting(const ProblemSpec& spec, double rho) {
  return BlockWeighting(spec, rho);
}

double primal_objective(const ProblemSpec& spec, const Vector& x0,
                        const ControlSequence& controls, const Vector& slack,
                        const Vector& dual, double rho) {
  const StateTrajectory states = rollout(spec, x0, controls);
  double phi = total_cost(spec, states, controls);
  if (spec.constraint_dim() > 0) {
    const ConstraintStack g = eval_constraints(spec, states, controls);
    phi += 0.5 * rho * (g.flat() + slack + dual).squaredNorm();
  }
  return phi;
}

}  // namespace admm_eki
