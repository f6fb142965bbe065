#include "admm_eki/problem.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace admm_eki {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw DimensionError(message);
}

void require_square(const Matrix& m, Index n, const char* name) {
  require(m.rows() == n && m.cols() == n,
          std::string(name) + " must be " + std::to_string(n) + "x" +
              std::to_string(n));
  require(is_symmetric_positive_definite(m),
          std::string(name) + " must be symmetric positive definite");
}

double weighted_sq(const Eigen::Ref<const Vector>& v, const Matrix& w) {
  return v.dot(w * v);
}

}  // namespace

bool is_symmetric_positive_definite(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.allFinite()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > tol;
}

ProblemSpec::ProblemSpec(ProblemDims dims, DynamicsFn dynamics,
                         ConstraintFn constraints, Matrix state_weight,
                         Matrix terminal_weight, Matrix input_weight,
                         StateTrajectory reference,
                         std::optional<InputBounds> bounds)
    : dims_(dims),
      dynamics_(std::move(dynamics)),
      constraints_(std::move(constraints)),
      state_weight_(std::move(state_weight)),
      terminal_weight_(std::move(terminal_weight)),
      input_weight_(std::move(input_weight)),
      reference_(std::move(reference)),
      bounds_(std::move(bounds)) {
  validate();
}

void ProblemSpec::validate() const {
  require(dims_.state > 0, "state dimension must be positive");
  require(dims_.input > 0, "input dimension must be positive");
  require(dims_.horizon > 0, "horizon must be positive");
  require(dims_.constraint >= 0, "constraint dimension must be nonnegative");
  require(static_cast<bool>(dynamics_), "dynamics map is required");
  require(dims_.constraint == 0 || static_cast<bool>(constraints_),
          "constraint map is required when q > 0");
  require_square(state_weight_, dims_.state, "R");
  require_square(terminal_weight_, dims_.state, "R_H");
  require_square(input_weight_, dims_.input, "Q");
  require(reference_.stages() == dims_.horizon + 1 &&
              reference_.stage_dim() == dims_.state,
          "reference must hold H+1 states of dimension n");
  if (bounds_) {
    require(bounds_->lower.size() == dims_.input &&
                bounds_->upper.size() == dims_.input,
            "input bounds must have dimension m");
    require((bounds_->lower.array() <= bounds_->upper.array()).all(),
            "input bounds must satisfy lower <= upper");
  }
}

Vector ProblemSpec::stage_constraints(const Vector& state, const Vector& input) const {
  if (dims_.constraint == 0) return Vector(0);
  Vector g = constraints_(state, input);
  require(g.size() == dims_.constraint, "constraint map returned wrong dimension");
  return g;
}

ProblemSpec ProblemSpec::with_reference(StateTrajectory reference) const {
  ProblemSpec copy = *this;
  copy.reference_ = std::move(reference);
  copy.validate();
  return copy;
}

void ProblemSpec::clamp(Eigen::Ref<Vector> flat_controls) const {
  if (!bounds_) return;
  const Index m = dims_.input;
  for (Index t = 0; t < dims_.horizon; ++t) {
    auto u = flat_controls.segment(t * m, m);
    u = u.cwiseMax(bounds_->lower).cwiseMin(bounds_->upper);
  }
}

StateTrajectory rollout(const ProblemSpec& spec, const Vector& x0,
                        const ControlSequence& controls) {
  const Index n = spec.state_dim();
  const Index horizon = spec.horizon();
  require(x0.size() == n, "initial state has wrong dimension");
  require(controls.stages() == horizon && controls.stage_dim() == spec.input_dim(),
          "control sequence does not match horizon and input dimension");

  StateTrajectory states(horizon + 1, n);
  states.stage(0) = x0;
  Vector x = x0;
  Vector u(spec.input_dim());
  for (Index t = 0; t < horizon; ++t) {
    u = controls.stage(t);
    x = spec.step(x, u);
    if (x.size() != n) throw DimensionError("dynamics returned wrong dimension");
    if (!x.allFinite()) {
      throw DivergenceError("rollout diverged at stage " + std::to_string(t + 1),
                            t + 1);
    }
    states.stage(t + 1) = x;
  }
  return states;
}

double total_cost(const ProblemSpec& spec, const StateTrajectory& states,
                  const ControlSequence& controls) {
  const Index horizon = spec.horizon();
  require(states.stages() == horizon + 1 && states.stage_dim() == spec.state_dim(),
          "state trajectory does not match the problem");
  require(controls.stages() == horizon && controls.stage_dim() == spec.input_dim(),
          "control sequence does not match the problem");
  const StateTrajectory& ref = spec.reference();
  double cost = 0.0;
  for (Index t = 0; t < horizon; ++t) {
    cost += weighted_sq(states.stage(t) - ref.stage(t), spec.state_weight());
    cost += weighted_sq(controls.stage(t), spec.input_weight());
  }
  cost += weighted_sq(states.stage(horizon) - ref.stage(horizon),
                      spec.terminal_weight());
  return 0.5 * cost;
}

ConstraintStack eval_constraints(const ProblemSpec& spec,
                                 const StateTrajectory& states,
                                 const ControlSequence& controls) {
  const Index horizon = spec.horizon();
  const Index q = spec.constraint_dim();
  require(states.stages() == horizon + 1 && states.stage_dim() == spec.state_dim(),
          "state trajectory does not match the problem");
  require(controls.stages() == horizon && controls.stage_dim() == spec.input_dim(),
          "control sequence does not match the problem");
  ConstraintStack g(horizon, q);
  if (q == 0) return g;
  Vector x(spec.state_dim());
  Vector u(spec.input_dim());
  for (Index t = 0; t < horizon; ++t) {
    x = states.stage(t);
    u = controls.stage(t);
    g.stage(t) = spec.stage_constraints(x, u);
  }
  return g;
}

double max_violation(const ConstraintStack& g) {
  if (g.size() == 0) return 0.0;
  return std::max(0.0, g.flat().maxCoeff());
}

}  // namespace admm_eki
