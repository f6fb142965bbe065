#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace admm_eki {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when operand shapes disagree with the problem dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a rollout or solver iterate becomes non-finite.
///
/// Carries the location of the failure so callers can attach context
/// (stage inside a rollout, particle inside an ensemble, iteration inside a
/// solver loop). Fields that do not apply are -1.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Index stage, Index particle = -1,
                  Index iteration = -1)
      : std::runtime_error(what),
        stage_(stage),
        particle_(particle),
        iteration_(iteration) {}

  Index stage() const { return stage_; }
  Index particle() const { return particle_; }
  Index iteration() const { return iteration_; }

 private:
  Index stage_;
  Index particle_;
  Index iteration_;
};

/// Flat vector with a fixed per-stage block size.
///
/// `Tag` only distinguishes the stacked quantity at compile time so a control
/// sequence cannot be passed where a state trajectory is expected.
template <class Tag>
class Stacked {
 public:
  Stacked() = default;

  Stacked(Index stages, Index stage_dim)
      : data_(Vector::Zero(stages * stage_dim)),
        stages_(stages),
        stage_dim_(stage_dim) {}

  Stacked(Vector flat, Index stages, Index stage_dim)
      : data_(std::move(flat)), stages_(stages), stage_dim_(stage_dim) {
    if (data_.size() != stages_ * stage_dim_) {
      throw DimensionError("stacked vector has length " +
                           std::to_string(data_.size()) + ", expected " +
                           std::to_string(stages_ * stage_dim_));
    }
  }

  Index stages() const { return stages_; }
  Index stage_dim() const { return stage_dim_; }
  Index size() const { return data_.size(); }

  auto stage(Index t) { return data_.segment(t * stage_dim_, stage_dim_); }
  auto stage(Index t) const { return data_.segment(t * stage_dim_, stage_dim_); }

  const Vector& flat() const { return data_; }
  Vector& flat() { return data_; }

  friend bool operator==(const Stacked& a, const Stacked& b) {
    return a.stages_ == b.stages_ && a.stage_dim_ == b.stage_dim_ &&
           a.data_ == b.data_;
  }

 private:
  Vector data_;
  Index stages_ = 0;
  Index stage_dim_ = 0;
};

/// U = (u_0, ..., u_{H-1}), length H*m.
using ControlSequence = Stacked<struct ControlTag>;
/// X = (x_0, ..., x_H), length (H+1)*n.
using StateTrajectory = Stacked<struct StateTag>;
/// Any R^{Hq} quantity laid out stage by stage: G, S, Y.
using ConstraintStack = Stacked<struct ConstraintTag>;

}  // namespace admm_eki
