#include "admm_eki/admm.hpp"

#include <cmath>
#include <string>

namespace admm_eki {

AdmmState AdmmState::zeros(const ProblemSpec& spec, double rho) {
  const Index hq = spec.stacked_constraint_size();
  return {Vector::Zero(hq), Vector::Zero(hq), rho, 0};
}

void AdmmConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("outer iterations must be >= 1");
  if (!(tau >= 1.0)) throw std::invalid_argument("tau must be >= 1");
  if (!(rho0 > 0.0)) throw std::invalid_argument("rho0 must be > 0");
  if (!(eps_primal > 0.0) || !(eps_dual > 0.0)) {
    throw std::invalid_argument("residual tolerances must be > 0");
  }
}

Vector slack_update(const Vector& g, const Vector& dual) {
  if (g.size() != dual.size()) throw DimensionError("slack_update: size mismatch");
  return (-g - dual).cwiseMax(0.0);
}

Vector dual_update(const Vector& dual, const Vector& g, const Vector& slack) {
  if (g.size() != dual.size() || slack.size() != dual.size()) {
    throw DimensionError("dual_update: size mismatch");
  }
  return dual + g + slack;
}

EkiResult primal_update(const ProblemSpec& spec, const Vector& x0,
                        const AdmmState& state, const ControlSequence& warm_mean,
                        const EkiConfig& eki_cfg, Rng& rng,
                        const InnerObserver& observer) {
  return eki_inner_loop(spec, x0, warm_mean, state.slack, state.dual, state.rho,
                        eki_cfg, rng, observer);
}

AdmmResult admm_solve(const ProblemSpec& spec, const Vector& x0, AdmmState init,
                      const ControlSequence& warm_mean, const AdmmConfig& admm_cfg,
                      const EkiConfig& eki_cfg, Rng& rng,
                      const AdmmObservers& observers) {
  admm_cfg.validate();
  const Index hq = spec.stacked_constraint_size();
  if (init.slack.size() != hq || init.dual.size() != hq) {
    throw DimensionError("admm_solve: S and Y must have length Hq");
  }
  if ((init.slack.array() < 0.0).any()) {
    throw std::invalid_argument("admm_solve: initial slack must be nonnegative");
  }
  if (!(init.rho > 0.0)) throw std::invalid_argument("admm_solve: rho must be > 0");

  AdmmResult result;
  result.controls = warm_mean;
  result.state = std::move(init);
  AdmmState& st = result.state;
  const double rho_start = st.rho;

  for (Index ell = 0; ell < admm_cfg.iterations; ++ell) {
    st.iteration = ell;
    st.rho = rho_start * std::pow(admm_cfg.tau, static_cast<double>(ell));
    EkiResult primal;
    try {
      primal = primal_update(spec, x0, st, result.controls, eki_cfg, rng,
                             observers.inner);
    } catch (const DivergenceError& e) {
      throw DivergenceError("outer iteration " + std::to_string(ell) + ": " + e.what(),
                            e.stage(), e.particle(), e.iteration());
    }
    result.controls = std::move(primal.mean);

    const StateTrajectory x = rollout(spec, x0, result.controls);
    const ConstraintStack g = eval_constraints(spec, x, result.controls);

    OuterIterationRecord rec;
    rec.ell = ell;
    rec.rho = st.rho;
    rec.phi = total_cost(spec, x, result.controls);
    if (hq > 0) rec.phi += 0.5 * st.rho * (g.flat() + st.slack + st.dual).squaredNorm();
    rec.max_violation = max_violation(g);
    rec.inner = std::move(primal.diagnostics);

    const Vector slack = slack_update(g.flat(), st.dual);
    const Vector dual = dual_update(st.dual, g.flat(), slack);
    if (hq > 0) {
      rec.primal_residual = (g.flat() + slack).cwiseAbs().maxCoeff();
      rec.dual_residual = (st.rho * (slack - st.slack)).cwiseAbs().maxCoeff();
    }
    st.slack = slack;
    st.dual = dual;
    st.rho = rho_start * std::pow(admm_cfg.tau, static_cast<double>(ell + 1));
    st.iteration = ell + 1;

    if (observers.outer) observers.outer(rec, st);
    result.trace.push_back(std::move(rec));

    if (admm_cfg.early_stop && result.trace.back().primal_residual <= admm_cfg.eps_primal &&
        result.trace.back().dual_residual <= admm_cfg.eps_dual) {
      break;
    }
  }
  return result;
}

}  // namespace admm_eki
