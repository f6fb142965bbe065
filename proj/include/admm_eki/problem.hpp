#pragma once

#include <functional>
#include <optional>

#include "admm_eki/types.hpp"

namespace admm_eki {

/// x_{t+1} = f(x_t, u_t)
using DynamicsFn = std::function<Vector(const Vector& state, const Vector& input)>;
/// g(x_t, u_t) in R^q, feasible when every component is <= 0.
using ConstraintFn = std::function<Vector(const Vector& state, const Vector& input)>;

struct InputBounds {
  Vector lower;
  Vector upper;
};

struct ProblemDims {
  Index state = 0;       // n
  Index input = 0;       // m
  Index constraint = 0;  // q per stage
  Index horizon = 0;     // H
};

/// Finite-horizon optimal control problem with quadratic tracking cost
///
///   J(X, U) = 1/2 sum_{t<H} (|x_t - z_t|_R^2 + |u_t|_Q^2) + 1/2 |x_H - z_H|_{R_H}^2
///
/// subject to X = F(x0, U) and G(X, U) <= 0. Immutable after construction;
/// `with_reference` produces a copy for a new reference window.
class ProblemSpec {
 public:
  ProblemSpec(ProblemDims dims, DynamicsFn dynamics, ConstraintFn constraints,
              Matrix state_weight, Matrix terminal_weight, Matrix input_weight,
              StateTrajectory reference,
              std::optional<InputBounds> bounds = std::nullopt);

  const ProblemDims& dims() const { return dims_; }
  Index state_dim() const { return dims_.state; }
  Index input_dim() const { return dims_.input; }
  Index constraint_dim() const { return dims_.constraint; }
  Index horizon() const { return dims_.horizon; }

  /// Hm
  Index control_size() const { return dims_.horizon * dims_.input; }
  /// (H+1)n
  Index trajectory_size() const { return (dims_.horizon + 1) * dims_.state; }
  /// Hq
  Index stacked_constraint_size() const { return dims_.horizon * dims_.constraint; }

  const Matrix& state_weight() const { return state_weight_; }
  const Matrix& terminal_weight() const { return terminal_weight_; }
  const Matrix& input_weight() const { return input_weight_; }
  const StateTrajectory& reference() const { return reference_; }
  const std::optional<InputBounds>& bounds() const { return bounds_; }

  Vector step(const Vector& state, const Vector& input) const {
    return dynamics_(state, input);
  }
  Vector stage_constraints(const Vector& state, const Vector& input) const;

  ProblemSpec with_reference(StateTrajectory reference) const;

  /// Component-wise clamp of every stage into the input box (no-op without bounds).
  void clamp(Eigen::Ref<Vector> flat_controls) const;

  ControlSequence zero_controls() const { return {dims_.horizon, dims_.input}; }
  ControlSequence as_controls(Vector flat) const {
    return {std::move(flat), dims_.horizon, dims_.input};
  }

 private:
  void validate() const;

  ProblemDims dims_;
  DynamicsFn dynamics_;
  ConstraintFn constraints_;
  Matrix state_weight_;
  Matrix terminal_weight_;
  Matrix input_weight_;
  StateTrajectory reference_;
  std::optional<InputBounds> bounds_;
};

/// True when `m` is symmetric (to `tol`) with smallest eigenvalue > `tol`.
bool is_symmetric_positive_definite(const Matrix& m, double tol = 1e-10);

/// X = F(x0, U). Throws DivergenceError naming the first non-finite stage.
StateTrajectory rollout(const ProblemSpec& spec, const Vector& x0,
                        const ControlSequence& controls);

double total_cost(const ProblemSpec& spec, const StateTrajectory& states,
                  const ControlSequence& controls);

/// G(X, U) = (g(x_0,u_0), ..., g(x_{H-1},u_{H-1})), stage blocks in time order.
ConstraintStack eval_constraints(const ProblemSpec& spec,
                                 const StateTrajectory& states,
                                 const ControlSequence& controls);

/// max(0, max_j G_j); zero for an unconstrained problem.
double max_violation(const ConstraintStack& g);

}  // namespace admm_eki
