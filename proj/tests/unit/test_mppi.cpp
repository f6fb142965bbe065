#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"

#include "admm_eki/mppi.hpp"

using namespace admm_eki;
using admm_eki::testing::scalar_chain;
using admm_eki::testing::vec;

TEST_CASE("importance weights") {
  const Vector w = mppi_weights(vec({0.0, std::log(2.0)}), 1.0);
  CHECK(w(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(w(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  for (int trial = 0; trial < 50; ++trial) {
    Vector c(40);
    for (Index i = 0; i < c.size(); ++i) c(i) = u(rng);
    c(7) = std::numeric_limits<double>::infinity();
    const Vector wc = mppi_weights(c, 0.5 + trial);
    CHECK(wc.allFinite());
    CHECK(std::abs(wc.sum() - 1.0) <= 1e-12);
    CHECK(wc.minCoeff() >= 0.0);
    CHECK(wc(7) == 0.0);
    const Vector shifted = mppi_weights((c.array() + 1e3).matrix(), 0.5 + trial);
    CHECK((shifted - wc).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS(mppi_weights(Vector::Constant(3, std::numeric_limits<double>::infinity()), 1.0));
}

TEST_CASE("penalized cost") {
  ProblemSpec spec({1, 1, 1, 1}, [](const Vector& x, const Vector& u) { return Vector(x + u); },
                   [](const Vector&, const Vector& u) { return Vector(u.array() - 1.0); },
                   Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                   StateTrajectory(2, 1));
  // J = 1/2 (1 + 9 + 4) = 7, violation 1 -> + 10/2.
  CHECK(mppi_cost(spec, vec({1}), spec.as_controls(vec({2})), 10.0) == doctest::Approx(12.0));
  CHECK(mppi_cost(spec, vec({1}), spec.as_controls(vec({0.5})), 10.0) ==
        doctest::Approx(0.5 * (1 + 2.25 + 0.25)));
  ProblemSpec blowup({1, 1, 0, 2}, [](const Vector& x, const Vector&) { return Vector(x * 1e300); },
                     nullptr, Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                     Matrix::Identity(1, 1), StateTrajectory(3, 1));
  CHECK(std::isinf(mppi_cost(blowup, vec({10}), blowup.zero_controls(), 1.0)));
}

TEST_CASE("mppi_update limits") {
  const ProblemSpec spec = scalar_chain(3);
  const ControlSequence mean(vec({0.3, -0.2, 0.1}), 3, 1);

  SUBCASE("huge temperature returns the plain sample mean") {
    MppiConfig cfg;
    cfg.samples = 25;
    cfg.iterations = 1;
    cfg.temperature = 1e300;
    Rng a(5), b(5);
    const GaussianSampler sampler(sampling_covariance(cfg.sampling(), spec));
    const Matrix samples = sample_ensemble(spec, mean, sampler, cfg.beta0, b, cfg.samples);
    const Vector expected = samples.rowwise().mean();
    const ControlSequence got = mppi_update(spec, vec({1}), mean, cfg, a);
    CHECK((got.flat() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("a single sample is returned as is") {
    MppiConfig cfg;
    cfg.samples = 1;
    cfg.iterations = 1;
    Rng a(8), b(8);
    const GaussianSampler sampler(sampling_covariance(cfg.sampling(), spec));
    const Matrix samples = sample_ensemble(spec, mean, sampler, cfg.beta0, b, 1);
    CHECK(mppi_update(spec, vec({1}), mean, cfg, a).flat() == samples.col(0));
  }
  SUBCASE("bounds are respected") {
    ProblemSpec bounded({1, 1, 0, 3}, [](const Vector& x, const Vector& u) { return Vector(x + u); },
                        nullptr, Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                        Matrix::Identity(1, 1), StateTrajectory(4, 1),
                        InputBounds{vec({-0.1}), vec({0.1})});
    MppiConfig cfg;
    cfg.sampling_std = vec({5.0});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      const ControlSequence u = mppi_update(bounded, vec({3.0}), bounded.zero_controls(), cfg, rng);
      CHECK(u.flat().maxCoeff() <= 0.1);
      CHECK(u.flat().minCoeff() >= -0.1);
    }
  }
  SUBCASE("diagnostics follow the shared annealing schedule") {
    MppiConfig cfg;
    cfg.iterations = 4;
    cfg.beta0 = 2.0;
    cfg.gamma = 0.3;
    Rng rng(1);
    std::vector<MppiIterationRecord> diag;
    mppi_update(spec, vec({1}), mean, cfg, rng, &diag);
    REQUIRE(diag.size() == 4);
    for (Index k = 0; k < 4; ++k) {
      CHECK(diag[k].beta == 2.0 * std::exp(-0.3 * static_cast<double>(k)));
      CHECK(diag[k].effective_samples >= 1.0);
      CHECK(diag[k].effective_samples <= cfg.samples + 1e-9);
    }
  }
  SUBCASE("invalid configs are rejected") {
    MppiConfig cfg;
    cfg.temperature = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.samples = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("all-infinite costs raise") {
  ProblemSpec blowup({1, 1, 0, 2}, [](const Vector& x, const Vector&) { return Vector(x * 1e300); },
                     nullptr, Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                     Matrix::Identity(1, 1), StateTrajectory(3, 1));
  Rng rng(0);
  CHECK_THROWS(mppi_update(blowup, vec({10}), blowup.zero_controls(), MppiConfig{}, rng));
}

TEST_CASE("one refinement moves toward the minimizer of a quadratic") {
  // J(u) = 1/2 x0^2 + 1/2 (x0 + u)^2 + 1/2 u^2, minimized at u = -x0 / 2.
  const ProblemSpec spec = scalar_chain(1);
  const double x0 = 1.0, u_star = -0.5, start = 2.0;
  MppiConfig cfg;
  cfg.samples = 2000;
  cfg.iterations = 1;
  int closer = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const ControlSequence u = mppi_update(spec, vec({x0}), spec.as_controls(vec({start})), cfg, rng);
    closer += std::abs(u.flat()(0) - u_star) < std::abs(start - u_star);
  }
  CHECK(closer >= 95);
}

TEST_CASE("MPPI and ADMM-EKI run through the same controller interface") {
  const ProblemSpec spec = scalar_chain(4);
  MppiConfig mcfg;
  mcfg.samples = 30;
  EkiConfig eki;
  eki.ensemble_size = 10;
  eki.iterations = 2;
  MppiSession mppi(spec, mcfg);
  MpcSession admm(spec, AdmmConfig{}, eki);
  for (Controller* c : std::vector<Controller*>{&mppi, &admm}) {
    Vector x = vec({1.5});
    for (int k = 0; k < 6; ++k) {
      const StepResult r = c->step(x);
      REQUIRE(r.input.size() == 1);
      CHECK(r.input.allFinite());
      x += r.input;
    }
    MESSAGE(c->name() << " final state " << x(0));
    CHECK(std::abs(x(0)) < 1.5);
  }
  CHECK(mppi.last_trace().size() == static_cast<std::size_t>(mcfg.iterations));

  MppiSession a(spec, mcfg), b(spec, mcfg);
  CHECK(mppi_mpc_step(a, vec({1.0})) == mppi_mpc_step(b, vec({1.0})));
}
