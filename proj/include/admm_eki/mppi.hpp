#pragma once

#include <vector>

#include "admm_eki/mpc.hpp"

namespace admm_eki {

/// Iterative MPPI baseline. Sampling covariance and annealing (beta0, gamma)
/// mirror EkiConfig so both planners explore identically.
struct MppiConfig {
  Index samples = 64;     // N
  double temperature = 1.0;  // lambda
  Index iterations = 3;   // M + 1 refinement stages
  double penalty_weight = 100.0;
  Vector sampling_std = Vector::Ones(1);
  Matrix sampling_covariance;
  double beta0 = 1.0;
  double gamma = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  /// Sampling/annealing view shared with the EKI helpers.
  EkiConfig sampling() const;
};

struct MppiIterationRecord {
  Index k = 0;
  double beta = 0.0;
  double min_cost = 0.0;
  double effective_samples = 0.0;  // 1 / sum w_i^2
};

/// cost = J + penalty/2 |[G]^+|^2; +inf when the rollout diverges.
double mppi_cost(const ProblemSpec& spec, const Vector& x0, const ControlSequence& u,
                 double penalty_weight);

/// Normalized weights w_i proportional to exp(-(c_i - min c) / lambda).
Vector mppi_weights(const Vector& costs, double temperature);

/// M+1 rounds of: sample around the mean with beta^(k) Sigma_U, score,
/// replace the mean by the importance-weighted average (clamped).
ControlSequence mppi_update(const ProblemSpec& spec, const Vector& x0,
                            const ControlSequence& mean, const MppiConfig& cfg, Rng& rng,
                            std::vector<MppiIterationRecord>* diagnostics = nullptr);

class MppiSession : public Controller {
 public:
  MppiSession(ProblemSpec spec, MppiConfig cfg);

  std::string name() const override { return "mppi-baseline"; }
  const ProblemSpec& spec() const override { return spec_; }
  StepResult step(const Vector& x_now, const StateTrajectory& reference) override;
  using Controller::step;

  const std::vector<MppiIterationRecord>& last_trace() const { return last_trace_; }

 private:
  ProblemSpec spec_;
  MppiConfig cfg_;
  Rng rng_;
  ControlSequence warm_;
  std::vector<MppiIterationRecord> last_trace_;
};

Vector mppi_mpc_step(MppiSession& session, const Vector& x_now);

}  // namespace admm_eki
