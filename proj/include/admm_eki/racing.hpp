#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "admm_eki/mpc.hpp"

namespace admm_eki::racing {

/// State layout (x, y, heading, speed); input layout (steering, acceleration).
enum StateIndex : Index { kX = 0, kY = 1, kHeading = 2, kSpeed = 3 };
enum InputIndex : Index { kSteer = 0, kAccel = 1 };

struct VehicleParams {
  double wheelbase = 0.33;
  double dt = 0.025;
  double max_steer = 35.0 * 3.14159265358979323846 / 180.0;
  double max_accel = 8.0;
};

/// Oval: two straights joined by two semicircles, driven counter-clockwise.
struct TrackParams {
  double straight_length = 20.0;
  double radius = 6.0;
  double half_width = 1.5;
  double sample_spacing = 0.05;
};

/// Trapezoidal raceline speed: `straight_speed` on straights, `corner_speed`
/// on arcs, linear-in-v^2 ramps limited by `ramp_accel`.
struct SpeedParams {
  double straight_speed = 8.0;
  double corner_speed = 5.5;
  double ramp_accel = 4.0;
};

struct ObstacleParams {
  int count = 25;
  double radius_min = 0.15;
  double radius_max = 0.3;
  double margin = 0.2;  // epsilon_obs
  double lateral_offset_min = 0.0;
  double lateral_offset_max = 1.0;
  double min_gap = 1.5;          // arclength separation between obstacles
  double start_clearance = 4.0;  // obstacle-free arclength after the start line
  double vehicle_width = 0.3;
  int max_attempts = 10000;
};

struct Obstacle {
  Eigen::Vector2d center;
  double radius;
  double arclength;  // where it was placed along the raceline
  double lateral;    // signed offset (left positive)
};

struct RacePoint {
  double s;
  Eigen::Vector2d position;
  double heading;
  double speed;
};

/// Track, raceline, obstacle set and vehicle limits for one racing scenario.
/// Immutable after construction.
class RaceEnvironment {
 public:
  RaceEnvironment(TrackParams track, SpeedParams speed, VehicleParams vehicle,
                  double margin, std::vector<Obstacle> obstacles);

  const TrackParams& track() const { return track_; }
  const SpeedParams& speed_params() const { return speed_; }
  const VehicleParams& vehicle() const { return vehicle_; }
  double margin() const { return margin_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  const std::vector<RacePoint>& raceline() const { return raceline_; }
  double length() const { return length_; }

  /// Raceline pose and desired speed at arclength s (wrapped).
  RacePoint at(double s) const;
  /// Closest raceline arclength and the distance to it.
  std::pair<double, double> project(const Eigen::Vector2d& p) const;
  /// Signed lateral offset of p from the centerline (left positive).
  double lateral_offset(const Eigen::Vector2d& p) const;

  /// Stable 64-bit FNV-1a hash of the serialized geometry and obstacles.
  std::uint64_t hash() const;
  std::string to_json() const;
  static RaceEnvironment from_json(const std::string& text);

  /// Centerline pose at arclength s, independent of the sampled raceline.
  static RacePoint centerline(const TrackParams& track, double s);
  static double track_length(const TrackParams& track);

 private:
  TrackParams track_;
  SpeedParams speed_;
  VehicleParams vehicle_;
  double margin_;
  std::vector<Obstacle> obstacles_;
  std::vector<RacePoint> raceline_;
  double length_;
};

inline constexpr int kEnvironmentFormatVersion = 1;

/// x+ = x + v cos(th) dt, y+ = y + v sin(th) dt,
/// th+ = th + v / L tan(w) dt, v+ = v + a cos(th) dt
Vector bicycle_step(const Vector& state, const Vector& input, const VehicleParams& params);

/// g_j(p) = (r_j + eps_obs) - |p - o_j|, one entry per obstacle.
Vector obstacle_constraints(const Eigen::Vector2d& p, const RaceEnvironment& env);
/// min_j |p - o_j| - r_j (negative means collision).
double min_clearance(const Eigen::Vector2d& p, const RaceEnvironment& env);

/// Deterministic scenario generation with rejection sampling of obstacles.
RaceEnvironment build_race_environment(std::uint64_t seed, const TrackParams& track = {},
                                       const SpeedParams& speed = {},
                                       const VehicleParams& vehicle = {},
                                       const ObstacleParams& obstacles = {});

/// Width of the free lateral corridor next to an obstacle on the track.
double corridor_width(const Obstacle& o, double margin, double half_width);

struct CostWeights {
  double position = 20.0;
  double heading = 1.0;
  double speed = 1.0;
  double terminal_scale = 2.0;
  double steer = 0.01;
  double accel = 0.001;
};

/// Planning problem for a horizon of H stages; the reference is filled in
/// per step by `reference_window`.
ProblemSpec make_problem(const RaceEnvironment& env, Index horizon, const CostWeights& w);

/// H+1 reference states starting at the raceline point nearest to the
/// vehicle, spaced by the desired speed; headings unwrapped around the
/// vehicle's heading.
StateTrajectory reference_window(const RaceEnvironment& env, const Vector& state,
                                 Index horizon);

/// Initial state: at the start line, aligned with the raceline, at rest.
Vector start_state(const RaceEnvironment& env);

/// Closed-loop plant for a racing episode: exact bicycle model (same as the
/// planner), lap progress along the raceline, metrics for the run record.
/// The lap is complete when the start line is crossed after covering at
/// least `lap_fraction` of the track length.
class RaceSimulator : public Environment {
 public:
  RaceSimulator(const RaceEnvironment& env, Index horizon, double lap_fraction = 0.9);

  Vector reset() override;
  Vector advance(const Vector& input) override;
  StateTrajectory reference(const Vector& state) const override;
  StepMetrics metrics() const override;
  bool task_complete() const override { return complete_; }

  double progress() const { return progress_; }
  const Vector& state() const { return state_; }

 private:
  const RaceEnvironment& env_;
  Index horizon_;
  double lap_fraction_;
  Vector state_;
  double s_ = 0.0;
  double progress_ = 0.0;
  bool complete_ = false;
};

}  // namespace admm_eki::racing
