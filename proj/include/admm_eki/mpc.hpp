#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "admm_eki/admm.hpp"

namespace admm_eki {

/// Result of one receding-horizon solve.
struct StepResult {
  Vector input;  // first stage of the solved mean
  double phi = 0.0;
  double max_violation = 0.0;
};

/// Common surface of the receding-horizon controllers, so baselines and
/// ADMM-EKI consume the same problems and environments.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual const ProblemSpec& spec() const = 0;
  /// Plans from `x_now` against `reference` (H+1 states) and returns the
  /// input to apply now.
  virtual StepResult step(const Vector& x_now, const StateTrajectory& reference) = 0;
  StepResult step(const Vector& x_now) { return step(x_now, spec().reference()); }
};

/// (u0, ..., u_{H-1}) -> (u1, ..., u_{H-1}, u_{H-1})
ControlSequence shift_warm_start(const ControlSequence& prev);
/// Per-stage blocks shifted left by one, last block zero-filled.
Vector shift_stacked(const Vector& prev, Index stages, Index stage_dim);

/// ADMM-EKI receding-horizon controller. Carries (S, Y, U-bar) between steps
/// and resets rho to rho0 at every step.
class MpcSession : public Controller {
 public:
  MpcSession(ProblemSpec spec, AdmmConfig admm, EkiConfig eki);

  std::string name() const override { return "admm-eki"; }
  const ProblemSpec& spec() const override { return spec_; }
  StepResult step(const Vector& x_now, const StateTrajectory& reference) override;
  using Controller::step;

  Index steps_taken() const { return steps_; }
  const ControlSequence& warm_controls() const { return warm_controls_; }
  const Vector& warm_slack() const { return warm_slack_; }
  const Vector& warm_dual() const { return warm_dual_; }
  /// Outer-loop trace of the latest step.
  const std::vector<OuterIterationRecord>& last_trace() const { return last_trace_; }
  /// Full solved mean of the latest step (before shifting).
  const ControlSequence& last_solution() const { return last_solution_; }

 private:
  ProblemSpec spec_;
  AdmmConfig admm_;
  EkiConfig eki_;
  Rng rng_;
  Index steps_ = 0;
  ControlSequence warm_controls_;
  Vector warm_slack_;
  Vector warm_dual_;
  ControlSequence last_solution_;
  std::vector<OuterIterationRecord> last_trace_;
};

/// Convenience wrapper around MpcSession::step.
Vector mpc_step(MpcSession& session, const Vector& x_now);

/// Per-step quantities an environment reports for the current state.
struct StepMetrics {
  double speed = 0.0;
  double tracking_error = 0.0;
  double min_clearance = std::numeric_limits<double>::infinity();
};

/// Plant plus task bookkeeping for an episode.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual Vector reset() = 0;
  virtual Vector advance(const Vector& input) = 0;
  virtual StateTrajectory reference(const Vector& state) const = 0;
  virtual StepMetrics metrics() const = 0;
  virtual bool task_complete() const = 0;
};

struct StepRow {
  Index step = 0;
  Vector input;
  Vector state;  // realized state after applying `input`
  double speed = 0.0;
  double tracking_error = 0.0;
  double min_clearance = 0.0;
  double solve_seconds = 0.0;
  double phi = 0.0;
  double max_violation = 0.0;
};

struct EpisodeSummary {
  double mean_speed = 0.0;
  double max_speed = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  Index total_steps = 0;
  Index collisions = 0;
};

struct RunRecord {
  std::string controller;
  std::vector<StepRow> rows;
  EpisodeSummary summary;
  bool task_completed = false;
  std::optional<std::string> failure;  // set when the solver or plant diverged
};

/// Summary statistics recomputed from rows.
EpisodeSummary summarize(const std::vector<StepRow>& rows);

struct EpisodeOptions {
  Index max_steps = 1000;
  bool stop_on_collision = true;
  /// Called after each step (e.g. to stream solver traces).
  std::function<void(const StepRow&)> on_step;
};

/// Closed loop: read state, plan, apply the first input, repeat until the
/// task completes, a collision stops the episode, or max_steps is reached.
RunRecord run_episode(Controller& controller, Environment& env,
                      const EpisodeOptions& options);

}  // namespace admm_eki
