#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"

#include "admm_eki/racing.hpp"
#include "admm_eki/rastrigin.hpp"

using namespace admm_eki;
using admm_eki::testing::scalar_chain;
using admm_eki::testing::vec;

TEST_CASE("rollout of a single integrator telescopes") {
  const ProblemSpec spec = scalar_chain(3);
  const StateTrajectory x = rollout(spec, vec({0.0}), spec.as_controls(vec({1, 1, 1})));
  CHECK(x.flat() == vec({0, 1, 2, 3}));
  CHECK(x.stage(0)(0) == 0.0);
}

TEST_CASE("bicycle rollout at rest keeps the position") {
  racing::VehicleParams p;
  const Index H = 5;
  ProblemSpec spec({4, 2, 0, H},
                   [p](const Vector& x, const Vector& u) { return racing::bicycle_step(x, u, p); },
                   nullptr, Matrix::Identity(4, 4), Matrix::Identity(4, 4),
                   Matrix::Identity(2, 2), StateTrajectory(H + 1, 4));
  Vector x0 = vec({1.5, -2.0, 0.3, 0.0});
  Vector u(2 * H);
  for (Index t = 0; t < H; ++t) u.segment(2 * t, 2) = vec({0.2, 0.0});
  const StateTrajectory x = rollout(spec, x0, spec.as_controls(u));
  for (Index t = 0; t <= H; ++t) {
    CHECK(x.stage(t)(0) == 1.5);
    CHECK(x.stage(t)(1) == -2.0);
  }
}

TEST_CASE("bicycle one step along the x axis") {
  racing::VehicleParams p;
  const Vector next = racing::bicycle_step(vec({2.0, 3.0, 0.0, 1.0}), vec({0.0, 0.0}), p);
  CHECK(next(0) == doctest::Approx(2.025).epsilon(1e-15));
  CHECK(next(1) == 3.0);
}

TEST_CASE("rollout is deterministic and Markov consistent") {
  const ProblemSpec spec = scalar_chain(4, 0.9, 0.5);
  const ControlSequence u = spec.as_controls(vec({0.3, -1.2, 2.0, 0.7}));
  const StateTrajectory a = rollout(spec, vec({0.4}), u);
  const StateTrajectory b = rollout(spec, vec({0.4}), u);
  CHECK(a == b);
  for (Index t = 1; t <= 4; ++t) {
    const ProblemSpec shorter = scalar_chain(t, 0.9, 0.5);
    const StateTrajectory part =
        rollout(shorter, vec({0.4}), shorter.as_controls(u.flat().head(t)));
    CHECK(part.flat() == a.flat().head(t + 1));
  }
}

TEST_CASE("rollout divergence names the stage") {
  ProblemSpec spec({1, 1, 0, 4},
                   [](const Vector& x, const Vector& u) -> Vector {
                     return u(0) > 5 ? Vector::Constant(1, std::nan("")) : Vector(x + u);
                   },
                   nullptr, Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                   Matrix::Identity(1, 1), StateTrajectory(5, 1));
  try {
    rollout(spec, vec({0}), spec.as_controls(vec({1, 1, 9, 1})));
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.stage() == 3);
  }
}

TEST_CASE("total cost examples") {
  const ProblemSpec spec = scalar_chain(1);
  const ControlSequence u = spec.as_controls(vec({3}));
  CHECK(total_cost(spec, StateTrajectory(vec({0, 2}), 2, 1), u) == 6.5);
  CHECK(total_cost(spec, spec.reference(), spec.zero_controls()) == 0.0);

  const double c = 3.7;
  const ProblemSpec scaled = scalar_chain(1, 1, 1, Vector(), c, c, c);
  CHECK(total_cost(scaled, StateTrajectory(vec({0, 2}), 2, 1), u) ==
        doctest::Approx(c * 6.5).epsilon(1e-14));
}

TEST_CASE("total cost is nonnegative and zero only at the reference") {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const ProblemSpec spec = scalar_chain(3, 1, 1, vec({0.5, -1, 2, 0.1}), 2.0, 3.0, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const StateTrajectory x(vec({n(rng), n(rng), n(rng), n(rng)}), 4, 1);
    const ControlSequence u = spec.as_controls(vec({n(rng), n(rng), n(rng)}));
    CHECK(total_cost(spec, x, u) > 0.0);
  }
  CHECK(total_cost(spec, spec.reference(), spec.zero_controls()) == 0.0);
}

TEST_CASE("total cost rejects dimension mismatch") {
  const ProblemSpec spec = scalar_chain(2);
  CHECK_THROWS_AS(total_cost(spec, StateTrajectory(2, 1), spec.zero_controls()), DimensionError);
}

TEST_CASE("constraint stacking") {
  SUBCASE("q = 0 gives an empty vector") {
    const ProblemSpec spec = scalar_chain(3);
    CHECK(eval_constraints(spec, StateTrajectory(4, 1), spec.zero_controls()).flat().size() == 0);
    CHECK(max_violation(eval_constraints(spec, StateTrajectory(4, 1), spec.zero_controls())) == 0.0);
  }
  SUBCASE("rastrigin disk values") {
    const ProblemSpec spec = rastrigin::make_problem();
    const Vector x0 = rastrigin::initial_state();
    auto g_at = [&](Eigen::Vector2d p) {
      const ControlSequence u = spec.as_controls(Vector(p));
      return eval_constraints(spec, rollout(spec, x0, u), u).flat()(0);
    };
    CHECK(g_at({0.3, 0.0}) == doctest::Approx(0.36).epsilon(1e-15));
    CHECK(g_at({2.0, 0.6}) == 0.0);
  }
  SUBCASE("layout is time ordered and round-trips") {
    ProblemSpec spec({1, 1, 2, 3}, [](const Vector& x, const Vector& u) { return Vector(x + u); },
                     [](const Vector& x, const Vector& u) { return vec({x(0), 10 * u(0)}); },
                     Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                     StateTrajectory(4, 1));
    const ControlSequence u = spec.as_controls(vec({1, 2, 3}));
    const StateTrajectory x = rollout(spec, vec({0}), u);
    const ConstraintStack g = eval_constraints(spec, x, u);
    CHECK(g.flat() == vec({0, 10, 1, 20, 3, 30}));
    for (Index t = 0; t < 3; ++t) {
      for (Index j = 0; j < 2; ++j) CHECK(g.flat()(t * 2 + j) == g.stage(t)(j));
    }
    ConstraintStack rebuilt(3, 2);
    for (Index t = 0; t < 3; ++t) rebuilt.stage(t) = g.stage(t);
    CHECK(rebuilt == g);
  }
}

TEST_CASE("problem validation") {
  auto f = [](const Vector& x, const Vector& u) { return Vector(x + u); };
  const Matrix I = Matrix::Identity(1, 1);
  CHECK_THROWS_AS(ProblemSpec({1, 1, 0, 2}, f, nullptr, -I, I, I, StateTrajectory(3, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ProblemSpec({1, 1, 0, 2}, f, nullptr, I, I, I, StateTrajectory(2, 1)),
                  std::invalid_argument);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_FALSE(is_symmetric_positive_definite(asym));
  CHECK(is_symmetric_positive_definite(Matrix::Identity(3, 3)));
  Matrix tiny = Matrix::Identity(2, 2);
  tiny(1, 1) = 1e-12;
  CHECK_FALSE(is_symmetric_positive_definite(tiny));
  CHECK_THROWS_AS(ControlSequence(Vector::Zero(5), 2, 2), DimensionError);
}

TEST_CASE("clamping to input bounds") {
  ProblemSpec spec({1, 2, 0, 2}, [](const Vector& x, const Vector&) { return x; }, nullptr,
                   Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(2, 2),
                   StateTrajectory(3, 1), InputBounds{vec({-1, -2}), vec({1, 2})});
  Vector u = vec({5, -5, -0.5, 1.5});
  spec.clamp(u);
  CHECK(u == vec({1, -2, -0.5, 1.5}));
}
