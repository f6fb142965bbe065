#pragma once

#include <vector>

#include "admm_eki/eki.hpp"

namespace admm_eki {

/// Outer-loop memory: slack S >= 0, scaled dual Y = Lambda / rho, penalty rho.
struct AdmmState {
  Vector slack;
  Vector dual;
  double rho = 1.0;
  Index iteration = 0;

  static AdmmState zeros(const ProblemSpec& spec, double rho);
};

struct AdmmConfig {
  Index iterations = 10;  // L + 1 outer steps
  double tau = 2.0;
  double rho0 = 1.0;
  bool early_stop = false;
  double eps_primal = 1e-3;
  double eps_dual = 1e-3;

  void validate() const;
};

struct OuterIterationRecord {
  Index ell = 0;
  double phi = 0.0;            // Phi^l at U^{l+1}
  double max_violation = 0.0;  // max(0, G(U^{l+1}))
  double rho = 0.0;            // rho^l used by the primal step
  double primal_residual = 0.0;  // |G + S^{l+1}|_inf
  double dual_residual = 0.0;    // |rho (S^{l+1} - S^l)|_inf
  std::vector<InnerIterationRecord> inner;
};

struct AdmmResult {
  ControlSequence controls;
  AdmmState state;
  std::vector<OuterIterationRecord> trace;
};

/// S^{l+1} = [-G - Y]^+ , the projection argmin_{S>=0} |G + S + Y|^2.
Vector slack_update(const Vector& g, const Vector& dual);

/// Y^{l+1} = Y + G + S^{l+1}
Vector dual_update(const Vector& dual, const Vector& g, const Vector& slack);

/// Inexact primal step U^{l+1} ~ argmin Phi^l via the EKI inner loop.
EkiResult primal_update(const ProblemSpec& spec, const Vector& x0,
                        const AdmmState& state, const ControlSequence& warm_mean,
                        const EkiConfig& eki_cfg, Rng& rng,
                        const InnerObserver& observer = {});

/// Observer for whole outer iterations, called after the penalty update.
using OuterObserver = std::function<void(const OuterIterationRecord&, const AdmmState&)>;

struct AdmmObservers {
  InnerObserver inner;
  OuterObserver outer;
};

/// Two-block ADMM: EKI primal step, slack projection, dual ascent, penalty
/// growth rho <- tau rho, for l = 0..L or until the residual tests pass.
AdmmResult admm_solve(const ProblemSpec& spec, const Vector& x0, AdmmState init,
                      const ControlSequence& warm_mean, const AdmmConfig& admm_cfg,
                      const EkiConfig& eki_cfg, Rng& rng,
                      const AdmmObservers& observers = {});

}  // namespace admm_eki
