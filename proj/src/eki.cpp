#include "admm_eki/eki.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

#include "admm_eki/parallel.hpp"

namespace admm_eki {

void EkiConfig::validate() const {
  if (ensemble_size < 2) throw std::invalid_argument("ensemble_size must be >= 2");
  if (iterations < 1) throw std::invalid_argument("inner iterations must be >= 1");
  if (!(beta0 > 0.0)) throw std::invalid_argument("beta0 must be > 0");
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (woodbury_threshold < 0) {
    throw std::invalid_argument("woodbury_threshold must be >= 0");
  }
  if (sampling_covariance.size() == 0 &&
      (sampling_std.size() == 0 || (sampling_std.array() < 0.0).any())) {
    throw std::invalid_argument("sampling_std must be nonempty and nonnegative");
  }
}

double annealing_beta(const EkiConfig& cfg, Index k) {
  return cfg.beta0 * std::exp(-cfg.gamma * static_cast<double>(k));
}

Matrix sampling_covariance(const EkiConfig& cfg, const ProblemSpec& spec) {
  const Index hm = spec.control_size();
  if (cfg.sampling_covariance.size() != 0) {
    if (cfg.sampling_covariance.rows() != hm || cfg.sampling_covariance.cols() != hm) {
      throw DimensionError("sampling covariance must be Hm x Hm");
    }
    return cfg.sampling_covariance;
  }
  const Index m = spec.input_dim();
  Vector std_dev(m);
  if (cfg.sampling_std.size() == 1) {
    std_dev.setConstant(cfg.sampling_std(0));
  } else if (cfg.sampling_std.size() == m) {
    std_dev = cfg.sampling_std;
  } else {
    throw DimensionError("sampling_std must have 1 or m entries");
  }
  Vector diag(hm);
  for (Index t = 0; t < spec.horizon(); ++t) {
    diag.segment(t * m, m) = std_dev.array().square().matrix();
  }
  return diag.asDiagonal();
}

GaussianSampler::GaussianSampler(const Matrix& covariance)
    : dim_(covariance.rows()) {
  if (covariance.rows() != covariance.cols()) {
    throw DimensionError("sampling covariance must be square");
  }
  const Matrix off = covariance - Matrix(covariance.diagonal().asDiagonal());
  diagonal_ = off.cwiseAbs().maxCoeff() == 0.0 || dim_ <= 1;
  if (diagonal_) {
    if ((covariance.diagonal().array() < 0.0).any()) {
      throw std::invalid_argument("sampling covariance is not positive semidefinite");
    }
    diag_sqrt_ = covariance.diagonal().cwiseSqrt();
    return;
  }
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("sampling covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
  if (eig.info() != Eigen::Success) {
    throw std::invalid_argument("sampling covariance factorization failed");
  }
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw std::invalid_argument("sampling covariance is not positive semidefinite");
  }
  factor_ = eig.eigenvectors() *
            eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Vector GaussianSampler::draw(double beta, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(dim_);
  for (Index j = 0; j < dim_; ++j) z(j) = normal(rng);
  const double s = std::sqrt(beta);
  if (diagonal_) return s * diag_sqrt_.cwiseProduct(z);
  return s * (factor_ * z);
}

ResidualLayout ResidualLayout::of(const ProblemSpec& spec) {
  return {spec.control_size(), spec.trajectory_size(), spec.stacked_constraint_size()};
}

Matrix EnsembleStatistics::cross_covariance() const {
  return control_anomalies * residual_anomalies.transpose() /
         static_cast<double>(size() - 1);
}

Matrix EnsembleStatistics::residual_covariance() const {
  Matrix p = Matrix::Zero(residual_anomalies.rows(), residual_anomalies.rows());
  p.selfadjointView<Eigen::Lower>().rankUpdate(residual_anomalies,
                                              1.0 / static_cast<double>(size() - 1));
  return p.selfadjointView<Eigen::Lower>();
}

Matrix sample_ensemble(const ProblemSpec& spec, const ControlSequence& mean,
                       const GaussianSampler& sampler, double beta, Rng& rng,
                       Index count) {
  if (mean.size() != spec.control_size() || sampler.dim() != mean.size()) {
    throw DimensionError("sample_ensemble: mean/covariance dimension mismatch");
  }
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  Matrix particles(mean.size(), count);
  for (Index i = 0; i < count; ++i) {
    if (beta == 0.0) {
      particles.col(i) = mean.flat();
    } else {
      particles.col(i) = mean.flat() + sampler.draw(beta, rng);
    }
    spec.clamp(particles.col(i));
  }
  return particles;
}

Matrix sample_ensemble(const ProblemSpec& spec, const ControlSequence& mean,
                       const EkiConfig& cfg, double beta, Rng& rng) {
  cfg.validate();
  const GaussianSampler sampler(sampling_covariance(cfg, spec));
  return sample_ensemble(spec, mean, sampler, beta, rng, cfg.ensemble_size);
}

Matrix compute_residuals(const ProblemSpec& spec, const Vector& x0,
                         const Matrix& particles, const Vector& slack,
                         const Vector& dual, int threads) {
  const ResidualLayout layout = ResidualLayout::of(spec);
  if (particles.rows() != layout.input) {
    throw DimensionError("compute_residuals: particles must have Hm rows");
  }
  if (slack.size() != layout.constraint || dual.size() != layout.constraint) {
    throw DimensionError("compute_residuals: S and Y must have length Hq");
  }
  const Index count = particles.cols();
  Matrix residuals(layout.size(), count);
  parallel_for(count, threads, [&](Index i) {
    const ControlSequence u = spec.as_controls(particles.col(i));
    StateTrajectory x;
    try {
      x = rollout(spec, x0, u);
    } catch (const DivergenceError& e) {
      throw DivergenceError("particle " + std::to_string(i) + ": " + e.what(),
                            e.stage(), i);
    }
    auto c = residuals.col(i);
    c.head(layout.input) = u.flat();
    c.segment(layout.state_offset(), layout.state) = x.flat() - spec.reference().flat();
    if (layout.constraint > 0) {
      c.tail(layout.constraint) = eval_constraints(spec, x, u).flat() + slack + dual;
    }
  });
  return residuals;
}

EnsembleStatistics ensemble_statistics(const Matrix& particles,
                                       const Matrix& residuals) {
  if (particles.cols() != residuals.cols()) {
    throw DimensionError("ensemble_statistics: particle/residual count mismatch");
  }
  if (particles.cols() < 2) {
    throw std::invalid_argument("ensemble_statistics: need at least 2 particles");
  }
  // Centre on the first member before averaging: identical members then give
  // exactly zero anomalies.
  auto center = [](const Matrix& m, Vector& mean, Matrix& anomalies) {
    const Vector ref = m.col(0);
    anomalies = m.colwise() - ref;
    const Vector shift = anomalies.rowwise().mean();
    anomalies.colwise() -= shift;
    mean = ref + shift;
  };
  EnsembleStatistics s;
  center(particles, s.mean_controls, s.control_anomalies);
  center(residuals, s.mean_residual, s.residual_anomalies);
  return s;
}

bool uses_woodbury(Index residual_dim, Index ensemble_size, const EkiConfig& cfg) {
  return residual_dim > cfg.woodbury_threshold * ensemble_size;
}

Matrix kalman_gain_direct(const EnsembleStatistics& stats,
                          const BlockWeighting& weighting) {
  if (stats.residual_anomalies.rows() != weighting.size()) {
    throw DimensionError("kalman_gain: residual dimension does not match weighting");
  }
  Matrix system = stats.residual_covariance();
  weighting.add_to(system);
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("kalman_gain: P_CC + Q-hat is not positive definite");
  }
  // K (P_CC + Q) = P_UC  <=>  (P_CC + Q) K^T = P_UC^T
  return llt.solve(stats.cross_covariance().transpose()).transpose();
}

Matrix kalman_gain_woodbury(const EnsembleStatistics& stats,
                            const BlockWeighting& weighting) {
  const Matrix& dc = stats.residual_anomalies;
  if (dc.rows() != weighting.size()) {
    throw DimensionError("kalman_gain: residual dimension does not match weighting");
  }
  const Index n = stats.size();
  // With B = S^-1 dC and W = ((N-1) I + dC^T B)^-1, the identity
  // (P_CC + S)^-1 = S^-1 - B W B^T collapses P_UC (P_CC + S)^-1 to dU W B^T.
  const Matrix b = weighting.apply_inverse(dc);
  Matrix w_inv = dc.transpose() * b;
  w_inv.diagonal().array() += static_cast<double>(n - 1);
  Eigen::LLT<Matrix> llt(w_inv);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("kalman_gain: Woodbury capacitance matrix is singular");
  }
  return stats.control_anomalies * llt.solve(b.transpose());
}

Matrix kalman_gain(const EnsembleStatistics& stats, const BlockWeighting& weighting,
                   const EkiConfig& cfg) {
  if (uses_woodbury(stats.residual_anomalies.rows(), stats.size(), cfg)) {
    return kalman_gain_woodbury(stats, weighting);
  }
  return kalman_gain_direct(stats, weighting);
}

EkiResult eki_inner_loop(const ProblemSpec& spec, const Vector& x0,
                         const ControlSequence& mean0, const Vector& slack,
                         const Vector& dual, double rho, const EkiConfig& cfg,
                         Rng& rng, const InnerObserver& observer) {
  cfg.validate();
  if ((slack.array() < 0.0).any()) {
    throw std::invalid_argument("eki_inner_loop: slack must be nonnegative");
  }
  const BlockWeighting weighting(spec, rho);
  const GaussianSampler sampler(sampling_covariance(cfg, spec));

  EkiResult result;
  result.mean = mean0;
  result.ensemble.layout = ResidualLayout::of(spec);
  result.diagnostics.reserve(static_cast<size_t>(cfg.iterations));

  for (Index k = 0; k < cfg.iterations; ++k) {
    const double beta = annealing_beta(cfg, k);
    Matrix sampled = sample_ensemble(spec, result.mean, sampler, beta, rng,
                                     cfg.ensemble_size);
    Matrix residuals;
    try {
      residuals = compute_residuals(spec, x0, sampled, slack, dual, cfg.threads);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string("inner iteration ") + std::to_string(k) +
                                ": " + e.what(),
                            e.stage(), e.particle(), k);
    }
    const EnsembleStatistics stats = ensemble_statistics(sampled, residuals);
    const Matrix gain = kalman_gain(stats, weighting, cfg);

    Matrix updated = sampled;
    updated.noalias() -= gain * residuals;
    for (Index i = 0; i < updated.cols(); ++i) spec.clamp(updated.col(i));
    Vector mean = updated.col(0);
    mean += (updated.colwise() - mean).rowwise().mean();
    if (!mean.allFinite()) {
      throw DivergenceError("EKI mean diverged at inner iteration " + std::to_string(k),
                            -1, -1, k);
    }
    result.mean = spec.as_controls(mean);

    InnerIterationRecord rec;
    rec.k = k;
    rec.beta = beta;
    rec.spread = stats.control_anomalies.norm() /
                 std::sqrt(static_cast<double>(stats.size() - 1));
    const StateTrajectory x = rollout(spec, x0, result.mean);
    const ConstraintStack g = eval_constraints(spec, x, result.mean);
    rec.phi = total_cost(spec, x, result.mean);
    if (g.size() > 0) rec.phi += 0.5 * rho * (g.flat() + slack + dual).squaredNorm();
    rec.max_violation = max_violation(g);
    result.diagnostics.push_back(rec);

    if (observer) {
      observer(InnerIterationView{k, beta, sampled, residuals, gain, updated,
                                  result.mean.flat()});
    }
    result.ensemble.particles = std::move(updated);
    result.ensemble.residuals = std::move(residuals);
  }
  return result;
}

}  // namespace admm_eki
