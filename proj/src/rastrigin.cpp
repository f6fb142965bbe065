#include "admm_eki/rastrigin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace admm_eki::rastrigin {

double forward(const Eigen::Vector2d& x) {
  constexpr double pi = std::numbers::pi;
  return x(0) * x(0) + x(1) * x(1) - 10.0 * std::cos(pi * x(0)) -
         10.0 * std::cos(pi * x(1));
}

double target() { return forward(Eigen::Vector2d::Zero()); }

double misfit(const Eigen::Vector2d& x) {
  const double r = target() - forward(x);
  return r * r;
}

double disk_penalty(const Eigen::Vector2d& x, const RastriginParams& params) {
  double g = 0.0;
  for (const Disk& d : params.disks) {
    g = std::max(g, d.radius * d.radius - (x - d.center).squaredNorm());
  }
  return g;
}

ProblemSpec make_problem(const RastriginParams& params) {
  ProblemDims dims{1, 2, 1, 1};
  auto dynamics = [](const Vector&, const Vector& u) {
    Vector next(1);
    next(0) = forward(Eigen::Vector2d(u(0), u(1)));
    return next;
  };
  auto constraints = [params](const Vector&, const Vector& u) {
    Vector g(1);
    g(0) = disk_penalty(Eigen::Vector2d(u(0), u(1)), params);
    return g;
  };
  StateTrajectory reference(Vector::Constant(2, target()), 2, 1);
  InputBounds bounds{Vector::Constant(2, -params.box), Vector::Constant(2, params.box)};
  return ProblemSpec(dims, dynamics, constraints, Matrix::Identity(1, 1),
                     Matrix::Constant(1, 1, params.misfit_weight),
                     params.input_weight * Matrix::Identity(2, 2), reference, bounds);
}

Vector initial_state() { return Vector::Constant(1, target()); }

EkiConfig default_eki_config() {
  EkiConfig cfg;
  cfg.ensemble_size = 50;
  cfg.iterations = 30;
  cfg.beta0 = 1.0;
  cfg.gamma = 0.5;
  return cfg;
}

AdmmConfig default_admm_config() {
  AdmmConfig cfg;
  cfg.iterations = 10;
  cfg.rho0 = 0.1;
  cfg.tau = 2.0;
  return cfg;
}

DemoResult run_demo(std::uint64_t seed, const RastriginParams& params, EkiConfig eki,
                    const AdmmConfig& admm, bool keep_snapshots) {
  const ProblemSpec spec = make_problem(params);
  if (eki.sampling_covariance.size() == 0) {
    eki.sampling_covariance = params.prior_variance.asDiagonal();
  }
  Rng rng(seed);
  DemoResult result;
  Index outer = 0;
  AdmmObservers observers;
  if (keep_snapshots) {
    observers.inner = [&](const InnerIterationView& v) {
      result.snapshots.push_back({outer, v.k, v.updated, Eigen::Vector2d(v.mean)});
    };
    observers.outer = [&](const OuterIterationRecord&, const AdmmState&) { ++outer; };
  }
  const ControlSequence prior = spec.as_controls(Vector(params.prior_mean));
  const AdmmResult solved = admm_solve(spec, initial_state(), AdmmState::zeros(spec, admm.rho0),
                                       prior, admm, eki, rng, observers);
  result.final_mean = solved.controls.flat();
  result.trace = solved.trace;
  return result;
}

}  // namespace admm_eki::rastrigin
