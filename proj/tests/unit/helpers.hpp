#pragma once

#include <Eigen/Dense>

#include "admm_eki/problem.hpp"

namespace admm_eki::testing {

/// x_{t+1} = a x_t + b u_t (scalar), unit weights unless given.
inline ProblemSpec scalar_chain(Index horizon, double a = 1.0, double b = 1.0,
                                Vector reference = Vector(), double r = 1.0,
                                double r_h = 1.0, double q = 1.0) {
  if (reference.size() == 0) reference = Vector::Zero(horizon + 1);
  return ProblemSpec({1, 1, 0, horizon},
                     [a, b](const Vector& x, const Vector& u) -> Vector { return a * x + b * u; },
                     nullptr, Matrix::Constant(1, 1, r), Matrix::Constant(1, 1, r_h),
                     Matrix::Constant(1, 1, q), StateTrajectory(reference, horizon + 1, 1));
}

/// Closed-form minimizer of
///   1/2 sum_{t<H} r (x_t - z_t)^2 + 1/2 r_h (x_H - z_H)^2 + 1/2 q sum u_t^2
/// for x_{t+1} = a x_t + b u_t, written out with the transfer matrix
/// x_t = a^t x0 + sum_{s<t} a^{t-1-s} b u_s (normal equations).
inline Vector scalar_chain_minimizer(Index horizon, double x0, const Vector& z, double a,
                                     double b, double r, double r_h, double q) {
  Matrix T = Matrix::Zero(horizon + 1, horizon);
  Vector free(horizon + 1);
  for (Index t = 0; t <= horizon; ++t) {
    free(t) = std::pow(a, static_cast<double>(t)) * x0;
    for (Index s = 0; s < t; ++s) T(t, s) = std::pow(a, static_cast<double>(t - 1 - s)) * b;
  }
  Vector w = Vector::Constant(horizon + 1, r);
  w(horizon) = r_h;
  const Matrix lhs = T.transpose() * w.asDiagonal() * T + q * Matrix::Identity(horizon, horizon);
  const Vector rhs = T.transpose() * w.asDiagonal() * (z - free);
  return lhs.ldlt().solve(rhs);
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace admm_eki::testing
