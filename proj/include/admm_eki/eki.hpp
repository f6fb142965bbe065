#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "admm_eki/problem.hpp"
#include "admm_eki/weighting.hpp"

namespace admm_eki {

using Rng = std::mt19937_64;

struct EkiConfig {
  Index ensemble_size = 50;  // N
  Index iterations = 5;      // M + 1 inner steps
  /// Per-input standard deviation; Sigma_U = diag(std^2) repeated over the
  /// horizon. Ignored when `sampling_covariance` is non-empty.
  Vector sampling_std = Vector::Ones(1);
  /// Full Hm x Hm sampling covariance (optional).
  Matrix sampling_covariance;
  double beta0 = 1.0;
  double gamma = 0.5;
  std::uint64_t seed = 0;
  /// Woodbury gain when d > woodbury_threshold * N.
  Index woodbury_threshold = 4;
  int threads = 1;

  void validate() const;
};

/// beta^(k) = beta0 * exp(-gamma * k)
double annealing_beta(const EkiConfig& cfg, Index k);

/// Resolved Sigma_U for a problem.
Matrix sampling_covariance(const EkiConfig& cfg, const ProblemSpec& spec);

/// Square-root factor L with L L^T = Sigma_U; Sigma_U must be PSD.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Matrix& covariance);

  Index dim() const { return dim_; }
  /// One draw of N(0, beta * Sigma_U).
  Vector draw(double beta, Rng& rng) const;

 private:
  Index dim_;
  bool diagonal_;
  Vector diag_sqrt_;
  Matrix factor_;
};

/// Offsets of the three residual blocks inside C in R^d.
struct ResidualLayout {
  Index input = 0;       // Hm
  Index state = 0;       // (H+1)n
  Index constraint = 0;  // Hq

  static ResidualLayout of(const ProblemSpec& spec);
  Index size() const { return input + state + constraint; }
  Index state_offset() const { return input; }
  Index constraint_offset() const { return input + state; }
};

struct Ensemble {
  Matrix particles;  // Hm x N, column i = U_i
  Matrix residuals;  // d x N, column i = C_i
  ResidualLayout layout;

  Index size() const { return particles.cols(); }
};

struct EnsembleStatistics {
  Vector mean_controls;   // U-bar
  Vector mean_residual;   // C-bar
  Matrix control_anomalies;   // Delta U (Hm x N)
  Matrix residual_anomalies;  // Delta C (d x N)

  Index size() const { return control_anomalies.cols(); }
  /// P_UC = Delta U Delta C^T / (N-1)
  Matrix cross_covariance() const;
  /// P_CC = Delta C Delta C^T / (N-1)
  Matrix residual_covariance() const;
};

/// Particles U_i = mean + eps_i, eps_i ~ N(0, beta Sigma_U), clamped to bounds.
Matrix sample_ensemble(const ProblemSpec& spec, const ControlSequence& mean,
                       const GaussianSampler& sampler, double beta, Rng& rng,
                       Index count);
Matrix sample_ensemble(const ProblemSpec& spec, const ControlSequence& mean,
                       const EkiConfig& cfg, double beta, Rng& rng);

/// C_i = [U_i; F(x0, U_i) - Z; G(x0, U_i) + S + Y], one rollout per column.
Matrix compute_residuals(const ProblemSpec& spec, const Vector& x0,
                         const Matrix& particles, const Vector& slack,
                         const Vector& dual, int threads = 1);

EnsembleStatistics ensemble_statistics(const Matrix& particles,
                                       const Matrix& residuals);

/// K = P_UC (P_CC + Q-hat)^-1 via a dense SPD solve.
Matrix kalman_gain_direct(const EnsembleStatistics& stats,
                          const BlockWeighting& weighting);
/// Same gain through the Woodbury identity; only an N x N system is factored.
Matrix kalman_gain_woodbury(const EnsembleStatistics& stats,
                            const BlockWeighting& weighting);
/// Picks the Woodbury path when d > cfg.woodbury_threshold * N.
Matrix kalman_gain(const EnsembleStatistics& stats,
                   const BlockWeighting& weighting, const EkiConfig& cfg);
bool uses_woodbury(Index residual_dim, Index ensemble_size, const EkiConfig& cfg);

struct InnerIterationRecord {
  Index k = 0;
  double beta = 0.0;
  double phi = 0.0;            // Phi at the updated mean
  double max_violation = 0.0;  // at the updated mean
  double spread = 0.0;         // |Delta U|_F / sqrt(N - 1) before the update
};

/// Everything an observer may inspect after one inner step.
struct InnerIterationView {
  Index k;
  double beta;
  const Matrix& sampled;    // U^(k), after clamping
  const Matrix& residuals;  // C^(k)
  const Matrix& gain;       // shared K^(k)
  const Matrix& updated;    // U^(k+1), after clamping
  const Vector& mean;       // U-bar^(k+1)
};
using InnerObserver = std::function<void(const InnerIterationView&)>;

struct EkiResult {
  ControlSequence mean;
  Ensemble ensemble;  // last updated particles with the residuals they were updated from
  std::vector<InnerIterationRecord> diagnostics;
};

/// Annealed EKI for one primal subproblem min_U Phi(U; S, Y, rho).
///
/// Each inner step k = 0..M resamples around the current mean with
/// covariance beta^(k) Sigma_U, evaluates residuals, forms one shared gain,
/// moves every particle by U_i <- U_i - K C_i and recomputes the mean.
EkiResult eki_inner_loop(const ProblemSpec& spec, const Vector& x0,
                         const ControlSequence& mean0, const Vector& slack,
                         const Vector& dual, double rho, const EkiConfig& cfg,
                         Rng& rng, const InnerObserver& observer = {});

}  // namespace admm_eki
