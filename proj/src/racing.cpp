#include "admm_eki/racing.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace admm_eki::racing {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_arclength(double s, double length) {
  s = std::fmod(s, length);
  return s < 0.0 ? s + length : s;
}

double circular_gap(double a, double b, double length) {
  const double d = std::abs(a - b);
  return std::min(d, length - d);
}

// Arclength distance from s to the nearest arc (zero on an arc).
double distance_to_corner(const TrackParams& t, double s) {
  const double arc = kPi * t.radius;
  const double a1 = t.straight_length;
  const double a2 = 2.0 * t.straight_length + arc;
  if (s >= a1 && s < a1 + arc) return 0.0;
  if (s >= a2) return 0.0;
  if (s < a1) return std::min(a1 - s, s);  // bottom straight, previous arc ends at 0
  return std::min(s - (a1 + arc), a2 - s);  // top straight
}

double desired_speed(const TrackParams& t, const SpeedParams& v, double s) {
  const double d = distance_to_corner(t, s);
  const double ramp = std::sqrt(v.corner_speed * v.corner_speed + 2.0 * v.ramp_accel * d);
  return std::min(v.straight_speed, ramp);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

double RaceEnvironment::track_length(const TrackParams& track) {
  return 2.0 * track.straight_length + kTwoPi * track.radius;
}

RacePoint RaceEnvironment::centerline(const TrackParams& t, double s) {
  const double len = track_length(t);
  s = wrap_arclength(s, len);
  const double ls = t.straight_length;
  const double r = t.radius;
  const double arc = kPi * r;
  RacePoint p{s, {}, 0.0, 0.0};
  if (s < ls) {
    p.position = {s, -r};
    p.heading = 0.0;
  } else if (s < ls + arc) {
    const double phi = -kPi / 2.0 + (s - ls) / r;
    p.position = {ls + r * std::cos(phi), r * std::sin(phi)};
    p.heading = phi + kPi / 2.0;
  } else if (s < 2.0 * ls + arc) {
    p.position = {ls - (s - ls - arc), r};
    p.heading = kPi;
  } else {
    const double phi = kPi / 2.0 + (s - 2.0 * ls - arc) / r;
    p.position = {r * std::cos(phi), r * std::sin(phi)};
    p.heading = phi + kPi / 2.0;
  }
  return p;
}

RaceEnvironment::RaceEnvironment(TrackParams track, SpeedParams speed,
                                 VehicleParams vehicle, double margin,
                                 std::vector<Obstacle> obstacles)
    : track_(track),
      speed_(speed),
      vehicle_(vehicle),
      margin_(margin),
      obstacles_(std::move(obstacles)),
      length_(track_length(track)) {
  if (!(track_.straight_length >= 0.0) || !(track_.radius > 0.0) ||
      !(track_.half_width > 0.0) || !(track_.sample_spacing > 0.0)) {
    throw std::invalid_argument("invalid track geometry");
  }
  if (!(speed_.corner_speed > 0.0) || speed_.straight_speed < speed_.corner_speed ||
      !(speed_.ramp_accel > 0.0)) {
    throw std::invalid_argument("invalid speed profile");
  }
  const auto samples = static_cast<Index>(std::ceil(length_ / track_.sample_spacing));
  raceline_.reserve(static_cast<size_t>(samples));
  for (Index i = 0; i < samples; ++i) {
    raceline_.push_back(at(length_ * static_cast<double>(i) / static_cast<double>(samples)));
  }
}

RacePoint RaceEnvironment::at(double s) const {
  RacePoint p = centerline(track_, s);
  p.speed = desired_speed(track_, speed_, p.s);
  return p;
}

std::pair<double, double> RaceEnvironment::project(const Eigen::Vector2d& p) const {
  const double ls = track_.straight_length;
  const double r = track_.radius;
  const double arc = kPi * r;
  if (p.x() >= 0.0 && p.x() <= ls) {
    const double d_bottom = std::abs(p.y() + r);
    const double d_top = std::abs(p.y() - r);
    if (d_bottom <= d_top) return {p.x(), d_bottom};
    return {ls + arc + (ls - p.x()), d_top};
  }
  const Eigen::Vector2d center = p.x() > ls ? Eigen::Vector2d(ls, 0.0) : Eigen::Vector2d(0.0, 0.0);
  const Eigen::Vector2d rel = p - center;
  const double dist = std::abs(rel.norm() - r);
  double phi = std::atan2(rel.y(), rel.x());
  double s;
  if (p.x() > ls) {
    // right arc spans phi in [-pi/2, pi/2]
    phi = std::clamp(phi, -kPi / 2.0, kPi / 2.0);
    s = ls + (phi + kPi / 2.0) * r;
  } else {
    // left arc spans phi in [pi/2, 3pi/2]
    if (phi < 0.0) phi += kTwoPi;
    phi = std::clamp(phi, kPi / 2.0, 3.0 * kPi / 2.0);
    s = 2.0 * ls + arc + (phi - kPi / 2.0) * r;
  }
  return {wrap_arclength(s, length_), dist};
}

double RaceEnvironment::lateral_offset(const Eigen::Vector2d& p) const {
  const RacePoint c = at(project(p).first);
  const Eigen::Vector2d left(-std::sin(c.heading), std::cos(c.heading));
  return (p - c.position).dot(left);
}

std::string RaceEnvironment::to_json() const {
  nlohmann::ordered_json j;
  j["format_version"] = kEnvironmentFormatVersion;
  j["track"] = {{"straight_length", track_.straight_length},
                {"radius", track_.radius},
                {"half_width", track_.half_width},
                {"sample_spacing", track_.sample_spacing}};
  j["speed"] = {{"straight_speed", speed_.straight_speed},
                {"corner_speed", speed_.corner_speed},
                {"ramp_accel", speed_.ramp_accel}};
  j["vehicle"] = {{"wheelbase", vehicle_.wheelbase},
                  {"dt", vehicle_.dt},
                  {"max_steer", vehicle_.max_steer},
                  {"max_accel", vehicle_.max_accel}};
  j["margin"] = margin_;
  j["obstacles"] = nlohmann::ordered_json::array();
  for (const Obstacle& o : obstacles_) {
    j["obstacles"].push_back({{"x", o.center.x()},
                              {"y", o.center.y()},
                              {"radius", o.radius},
                              {"s", o.arclength},
                              {"lateral", o.lateral}});
  }
  j["raceline"] = nlohmann::ordered_json::array();
  for (const RacePoint& p : raceline_) {
    j["raceline"].push_back({p.s, p.position.x(), p.position.y(), p.heading, p.speed});
  }
  return j.dump(1);
}

RaceEnvironment RaceEnvironment::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("format_version").get<int>() != kEnvironmentFormatVersion) {
    throw std::runtime_error("unsupported environment format version");
  }
  TrackParams track{j["track"].at("straight_length"), j["track"].at("radius"),
                    j["track"].at("half_width"), j["track"].at("sample_spacing")};
  SpeedParams speed{j["speed"].at("straight_speed"), j["speed"].at("corner_speed"),
                    j["speed"].at("ramp_accel")};
  VehicleParams vehicle{j["vehicle"].at("wheelbase"), j["vehicle"].at("dt"),
                        j["vehicle"].at("max_steer"), j["vehicle"].at("max_accel")};
  std::vector<Obstacle> obstacles;
  for (const auto& o : j.at("obstacles")) {
    obstacles.push_back({{o.at("x").get<double>(), o.at("y").get<double>()},
                         o.at("radius"), o.at("s"), o.at("lateral")});
  }
  return RaceEnvironment(track, speed, vehicle, j.at("margin").get<double>(),
                         std::move(obstacles));
}

std::uint64_t RaceEnvironment::hash() const { return fnv1a(to_json()); }

Vector bicycle_step(const Vector& state, const Vector& input, const VehicleParams& params) {
  const double th = state(kHeading);
  const double v = state(kSpeed);
  const double c = std::cos(th);
  Vector next(4);
  next(kX) = state(kX) + v * c * params.dt;
  next(kY) = state(kY) + v * std::sin(th) * params.dt;
  next(kHeading) = th + v / params.wheelbase * std::tan(input(kSteer)) * params.dt;
  next(kSpeed) = v + input(kAccel) * c * params.dt;
  return next;
}

Vector obstacle_constraints(const Eigen::Vector2d& p, const RaceEnvironment& env) {
  const auto& obs = env.obstacles();
  Vector g(static_cast<Index>(obs.size()));
  for (size_t j = 0; j < obs.size(); ++j) {
    g(static_cast<Index>(j)) = obs[j].radius + env.margin() - (p - obs[j].center).norm();
  }
  return g;
}

double min_clearance(const Eigen::Vector2d& p, const RaceEnvironment& env) {
  double best = std::numeric_limits<double>::infinity();
  for (const Obstacle& o : env.obstacles()) {
    best = std::min(best, (p - o.center).norm() - o.radius);
  }
  return best;
}

double corridor_width(const Obstacle& o, double margin, double half_width) {
  const double inflated = o.radius + margin;
  const double left = half_width - (o.lateral + inflated);
  const double right = (o.lateral - inflated) + half_width;
  return std::max(left, right);
}

RaceEnvironment build_race_environment(std::uint64_t seed, const TrackParams& track,
                                       const SpeedParams& speed,
                                       const VehicleParams& vehicle,
                                       const ObstacleParams& params) {
  if (params.count < 0 || params.radius_min <= 0.0 ||
      params.radius_max < params.radius_min || params.margin < 0.0 ||
      params.lateral_offset_min < 0.0 ||
      params.lateral_offset_max < params.lateral_offset_min) {
    throw std::invalid_argument("invalid obstacle parameters");
  }
  const double length = RaceEnvironment::track_length(track);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> arclength(params.start_clearance, length - 1.0);
  std::uniform_real_distribution<double> offset(params.lateral_offset_min,
                                                params.lateral_offset_max);
  std::uniform_real_distribution<double> radius(params.radius_min, params.radius_max);
  std::bernoulli_distribution left_side(0.5);
  const Eigen::Vector2d start = RaceEnvironment::centerline(track, 0.0).position;

  std::vector<Obstacle> placed;
  int attempts = 0;
  while (static_cast<int>(placed.size()) < params.count) {
    if (++attempts > params.max_attempts) {
      throw std::runtime_error("obstacle placement exceeded retry budget");
    }
    const double s = arclength(rng);
    const double lat = left_side(rng) ? offset(rng) : -offset(rng);
    const double r = radius(rng);
    const RacePoint c = RaceEnvironment::centerline(track, s);
    const Eigen::Vector2d left(-std::sin(c.heading), std::cos(c.heading));
    Obstacle o{c.position + lat * left, r, s, lat};

    if (corridor_width(o, params.margin, track.half_width) < params.vehicle_width) continue;
    if ((o.center - start).norm() < r + params.margin + params.vehicle_width) continue;
    bool ok = true;
    for (const Obstacle& other : placed) {
      const double gap = (o.center - other.center).norm() - (o.radius + params.margin) -
                         (other.radius + params.margin);
      if (circular_gap(s, other.arclength, length) < params.min_gap || gap < 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) placed.push_back(o);
  }
  return RaceEnvironment(track, speed, vehicle, params.margin, std::move(placed));
}

ProblemSpec make_problem(const RaceEnvironment& env, Index horizon, const CostWeights& w) {
  const Index q = static_cast<Index>(env.obstacles().size());
  auto obstacles = std::make_shared<const std::vector<Obstacle>>(env.obstacles());
  const double margin = env.margin();
  const VehicleParams vehicle = env.vehicle();

  auto dynamics = [vehicle](const Vector& x, const Vector& u) {
    return bicycle_step(x, u, vehicle);
  };
  auto constraints = [obstacles, margin](const Vector& x, const Vector&) {
    Vector g(static_cast<Index>(obstacles->size()));
    const Eigen::Vector2d p(x(kX), x(kY));
    for (size_t j = 0; j < obstacles->size(); ++j) {
      const Obstacle& o = (*obstacles)[j];
      g(static_cast<Index>(j)) = o.radius + margin - (p - o.center).norm();
    }
    return g;
  };

  Vector r_diag(4);
  r_diag << w.position, w.position, w.heading, w.speed;
  const Matrix r = r_diag.asDiagonal();
  Vector q_diag(2);
  q_diag << w.steer, w.accel;
  InputBounds bounds{Vector(2), Vector(2)};
  bounds.lower << -vehicle.max_steer, -vehicle.max_accel;
  bounds.upper << vehicle.max_steer, vehicle.max_accel;

  const Vector x0 = start_state(env);
  StateTrajectory reference = reference_window(env, x0, horizon);
  return ProblemSpec({4, 2, q, horizon}, dynamics, constraints, r, w.terminal_scale * r,
                     Matrix(q_diag.asDiagonal()), std::move(reference), bounds);
}

StateTrajectory reference_window(const RaceEnvironment& env, const Vector& state,
                                 Index horizon) {
  StateTrajectory z(horizon + 1, 4);
  double s = env.project(Eigen::Vector2d(state(kX), state(kY))).first;
  double prev_heading = state(kHeading);
  for (Index t = 0; t <= horizon; ++t) {
    const RacePoint p = env.at(s);
    const double heading =
        p.heading + kTwoPi * std::round((prev_heading - p.heading) / kTwoPi);
    z.stage(t) << p.position.x(), p.position.y(), heading, p.speed;
    prev_heading = heading;
    s += p.speed * env.vehicle().dt;
  }
  return z;
}

RaceSimulator::RaceSimulator(const RaceEnvironment& env, Index horizon, double lap_fraction)
    : env_(env), horizon_(horizon), lap_fraction_(lap_fraction) {
  if (!(lap_fraction > 0.0 && lap_fraction <= 1.0)) {
    throw std::invalid_argument("lap_fraction must be in (0, 1]");
  }
  reset();
}

Vector RaceSimulator::reset() {
  state_ = start_state(env_);
  s_ = env_.project(Eigen::Vector2d(state_(kX), state_(kY))).first;
  progress_ = 0.0;
  complete_ = false;
  return state_;
}

Vector RaceSimulator::advance(const Vector& input) {
  const VehicleParams& v = env_.vehicle();
  Vector u(2);
  u(kSteer) = std::clamp(input(kSteer), -v.max_steer, v.max_steer);
  u(kAccel) = std::clamp(input(kAccel), -v.max_accel, v.max_accel);
  state_ = bicycle_step(state_, u, v);
  if (!state_.allFinite()) return state_;
  const double s_new = env_.project(Eigen::Vector2d(state_(kX), state_(kY))).first;
  const double len = env_.length();
  double ds = s_new - s_;
  if (ds > 0.5 * len) ds -= len;
  if (ds < -0.5 * len) ds += len;
  const bool crossed_start = ds > 0.0 && s_new < s_;
  progress_ += ds;
  s_ = s_new;
  if (crossed_start && progress_ >= lap_fraction_ * len) complete_ = true;
  return state_;
}

StateTrajectory RaceSimulator::reference(const Vector& state) const {
  return reference_window(env_, state, horizon_);
}

StepMetrics RaceSimulator::metrics() const {
  const Eigen::Vector2d p(state_(kX), state_(kY));
  return {state_(kSpeed), env_.project(p).second, min_clearance(p, env_)};
}

Vector start_state(const RaceEnvironment& env) {
  const RacePoint p = env.at(0.0);
  Vector x(4);
  x << p.position.x(), p.position.y(), p.heading, 0.0;
  return x;
}

}  // namespace admm_eki::racing
