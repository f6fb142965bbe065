#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "admm_eki/admm.hpp"

namespace admm_eki::rastrigin {

struct Disk {
  Eigen::Vector2d center;
  double radius;
};

/// The constrained 2D inversion: recover x with h(x) = h(0, 0) while staying
/// outside four disks.
struct RastriginParams {
  std::array<Disk, 4> disks{{{{0.3, 0.0}, 0.6},
                             {{0.0, 2.0}, 0.6},
                             {{0.0, -2.0}, 0.6},
                             {{2.0, 0.0}, 0.6}}};
  Eigen::Vector2d prior_mean{1.0, 1.0};
  Eigen::Vector2d prior_variance{2.0, 2.0};
  /// R_H on the observable; 2 makes J equal the misfit f exactly.
  double misfit_weight = 2.0;
  /// Q on x (the "control"); a weak pull towards the origin.
  double input_weight = 1e-4;
  double box = 3.0;
};

/// h(x) = x1^2 + x2^2 - 10 cos(pi x1) - 10 cos(pi x2)
double forward(const Eigen::Vector2d& x);
/// Observation y = h(0, 0) = -20.
double target();
/// f(x) = (y - h(x))^2
double misfit(const Eigen::Vector2d& x);
/// g(x) = max_i max(r_i^2 - |x - c_i|^2, 0)
double disk_penalty(const Eigen::Vector2d& x, const RastriginParams& params = {});

/// Horizon-1 problem: the control is x itself, the single state transition
/// maps it to the observable h(x), the terminal reference is y, and g(x) is
/// the only stage constraint (q = 1).
ProblemSpec make_problem(const RastriginParams& params = {});
/// Initial state for `make_problem` (the observable is seeded at y).
Vector initial_state();

struct Snapshot {
  Index outer;
  Index inner;
  Matrix particles;  // 2 x N after the inner update
  Eigen::Vector2d mean;
};

struct DemoResult {
  Eigen::Vector2d final_mean;
  std::vector<Snapshot> snapshots;
  std::vector<OuterIterationRecord> trace;
};

/// Demo defaults: N = 50 particles, 10 outer iterations.
EkiConfig default_eki_config();
AdmmConfig default_admm_config();

/// Runs ADMM-EKI from the prior N(m0, C0); Sigma_U = C0 unless `eki` sets
/// its own sampling covariance.
DemoResult run_demo(std::uint64_t seed, const RastriginParams& params = {},
                    EkiConfig eki = default_eki_config(),
                    const AdmmConfig& admm = default_admm_config(),
                    bool keep_snapshots = true);

}  // namespace admm_eki::rastrigin
