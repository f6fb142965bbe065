#include "admm_eki/mppi.hpp"

#include <cmath>
#include <limits>

#include "admm_eki/parallel.hpp"

namespace admm_eki {

void MppiConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("mppi samples must be >= 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("mppi temperature must be > 0");
  if (iterations < 1) throw std::invalid_argument("mppi iterations must be >= 1");
  if (!(penalty_weight >= 0.0)) throw std::invalid_argument("penalty_weight must be >= 0");
  if (!(beta0 > 0.0)) throw std::invalid_argument("beta0 must be > 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
}

EkiConfig MppiConfig::sampling() const {
  EkiConfig e;
  e.ensemble_size = std::max<Index>(samples, 2);
  e.iterations = iterations;
  e.sampling_std = sampling_std;
  e.sampling_covariance = sampling_covariance;
  e.beta0 = beta0;
  e.gamma = gamma;
  e.seed = seed;
  e.threads = threads;
  return e;
}

double mppi_cost(const ProblemSpec& spec, const Vector& x0, const ControlSequence& u,
                 double penalty_weight) {
  StateTrajectory x;
  try {
    x = rollout(spec, x0, u);
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::infinity();
  }
  double cost = total_cost(spec, x, u);
  if (spec.constraint_dim() > 0) {
    const ConstraintStack g = eval_constraints(spec, x, u);
    cost += 0.5 * penalty_weight * g.flat().cwiseMax(0.0).squaredNorm();
  }
  return std::isfinite(cost) ? cost : std::numeric_limits<double>::infinity();
}

Vector mppi_weights(const Vector& costs, double temperature) {
  const double best = costs.minCoeff();
  if (!std::isfinite(best)) throw std::runtime_error("mppi: all sample costs are infinite");
  Vector w = (-(costs.array() - best) / temperature).exp().matrix();
  // Vectorized exp clamps its argument, so exp(-inf) is not exactly 0.
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(costs(i))) w(i) = 0.0;
  }
  return w / w.sum();
}

ControlSequence mppi_update(const ProblemSpec& spec, const Vector& x0,
                            const ControlSequence& mean, const MppiConfig& cfg, Rng& rng,
                            std::vector<MppiIterationRecord>* diagnostics) {
  cfg.validate();
  const EkiConfig sampling = cfg.sampling();
  const GaussianSampler sampler(sampling_covariance(sampling, spec));
  ControlSequence current = mean;
  for (Index k = 0; k < cfg.iterations; ++k) {
    const double beta = annealing_beta(sampling, k);
    const Matrix samples = sample_ensemble(spec, current, sampler, beta, rng, cfg.samples);
    Vector costs(cfg.samples);
    parallel_for(cfg.samples, cfg.threads, [&](Index i) {
      costs(i) = mppi_cost(spec, x0, spec.as_controls(samples.col(i)), cfg.penalty_weight);
    });
    const Vector w = mppi_weights(costs, cfg.temperature);
    Vector next = samples * w;
    spec.clamp(next);
    current = spec.as_controls(std::move(next));
    if (diagnostics) {
      diagnostics->push_back({k, beta, costs.minCoeff(), 1.0 / w.squaredNorm()});
    }
  }
  return current;
}

MppiSession::MppiSession(ProblemSpec spec, MppiConfig cfg)
    : spec_(std::move(spec)), cfg_(std::move(cfg)), rng_(cfg_.seed),
      warm_(spec_.zero_controls()) {
  cfg_.validate();
}

StepResult MppiSession::step(const Vector& x_now, const StateTrajectory& reference) {
  if (x_now.size() != spec_.state_dim()) throw DimensionError("mppi step: state dimension");
  const ProblemSpec problem = spec_.with_reference(reference);
  last_trace_.clear();
  const ControlSequence solved = mppi_update(problem, x_now, warm_, cfg_, rng_, &last_trace_);
  StepResult out;
  out.input = solved.stage(0);
  const StateTrajectory x = rollout(problem, x_now, solved);
  out.phi = total_cost(problem, x, solved);
  out.max_violation = max_violation(eval_constraints(problem, x, solved));
  warm_ = shift_warm_start(solved);
  return out;
}

Vector mppi_mpc_step(MppiSession& session, const Vector& x_now) {
  return session.step(x_now).input;
}

}  // namespace admm_eki
