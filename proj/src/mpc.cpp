#include "admm_eki/mpc.hpp"

#include <algorithm>
#include <chrono>

namespace admm_eki {

ControlSequence shift_warm_start(const ControlSequence& prev) {
  ControlSequence next = prev;
  const Index horizon = prev.stages();
  for (Index t = 0; t + 1 < horizon; ++t) next.stage(t) = prev.stage(t + 1);
  return next;
}

Vector shift_stacked(const Vector& prev, Index stages, Index stage_dim) {
  if (prev.size() != stages * stage_dim) throw DimensionError("shift_stacked: size mismatch");
  Vector next = Vector::Zero(prev.size());
  if (stages > 1) {
    next.head((stages - 1) * stage_dim) = prev.tail((stages - 1) * stage_dim);
  }
  return next;
}

MpcSession::MpcSession(ProblemSpec spec, AdmmConfig admm, EkiConfig eki)
    : spec_(std::move(spec)),
      admm_(admm),
      eki_(std::move(eki)),
      rng_(eki_.seed),
      warm_controls_(spec_.zero_controls()),
      warm_slack_(Vector::Zero(spec_.stacked_constraint_size())),
      warm_dual_(Vector::Zero(spec_.stacked_constraint_size())),
      last_solution_(spec_.zero_controls()) {
  admm_.validate();
  eki_.validate();
}

StepResult MpcSession::step(const Vector& x_now, const StateTrajectory& reference) {
  if (x_now.size() != spec_.state_dim()) throw DimensionError("mpc_step: state dimension");
  const ProblemSpec problem = spec_.with_reference(reference);
  AdmmState init{warm_slack_, warm_dual_, admm_.rho0, 0};
  AdmmResult solved = admm_solve(problem, x_now, std::move(init), warm_controls_, admm_,
                                 eki_, rng_);

  StepResult out;
  out.input = solved.controls.stage(0);
  if (!solved.trace.empty()) {
    out.phi = solved.trace.back().phi;
    out.max_violation = solved.trace.back().max_violation;
  }
  last_solution_ = solved.controls;
  last_trace_ = std::move(solved.trace);

  const Index horizon = spec_.horizon();
  const Index q = spec_.constraint_dim();
  warm_controls_ = shift_warm_start(solved.controls);
  warm_slack_ = shift_stacked(solved.state.slack, horizon, q);
  warm_dual_ = shift_stacked(solved.state.dual, horizon, q);
  ++steps_;
  return out;
}

Vector mpc_step(MpcSession& session, const Vector& x_now) {
  return session.step(x_now).input;
}

EpisodeSummary summarize(const std::vector<StepRow>& rows) {
  EpisodeSummary s;
  s.total_steps = static_cast<Index>(rows.size());
  if (rows.empty()) return s;
  for (const StepRow& r : rows) {
    s.mean_speed += r.speed;
    s.max_speed = std::max(s.max_speed, r.speed);
    s.mean_error += r.tracking_error;
    s.max_error = std::max(s.max_error, r.tracking_error);
    if (r.min_clearance < 0.0) ++s.collisions;
  }
  s.mean_speed /= static_cast<double>(rows.size());
  s.mean_error /= static_cast<double>(rows.size());
  return s;
}

RunRecord run_episode(Controller& controller, Environment& env,
                      const EpisodeOptions& options) {
  RunRecord record;
  record.controller = controller.name();
  Vector x = env.reset();
  for (Index k = 0; k < options.max_steps && !env.task_complete(); ++k) {
    StepRow row;
    row.step = k;
    const auto t0 = std::chrono::steady_clock::now();
    StepResult planned;
    try {
      planned = controller.step(x, env.reference(x));
    } catch (const std::exception& e) {
      record.failure = "step " + std::to_string(k) + ": " + e.what();
      break;
    }
    row.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    x = env.advance(planned.input);
    if (!x.allFinite()) {
      record.failure = "step " + std::to_string(k) + ": plant state became non-finite";
      break;
    }
    const StepMetrics m = env.metrics();
    row.input = planned.input;
    row.state = x;
    row.speed = m.speed;
    row.tracking_error = m.tracking_error;
    row.min_clearance = m.min_clearance;
    row.phi = planned.phi;
    row.max_violation = planned.max_violation;
    record.rows.push_back(row);
    if (options.on_step) options.on_step(record.rows.back());
    if (options.stop_on_collision && m.min_clearance < 0.0) break;
  }
  record.task_completed = env.task_complete();
  record.summary = summarize(record.rows);
  return record;
}

}  // namespace admm_eki
