#include "admm_eki/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace admm_eki {

using json = nlohmann::ordered_json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector json_vec(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

json eki_json(const EkiConfig& e, bool with_std) {
  json j;
  j["ensemble_size"] = e.ensemble_size;
  j["inner_iterations"] = e.iterations;
  if (with_std) j["sampling_std"] = vec_json(e.sampling_std);
  j["beta0"] = e.beta0;
  j["gamma"] = e.gamma;
  j["woodbury_threshold"] = e.woodbury_threshold;
  return j;
}

json admm_json(const AdmmConfig& a) {
  json j;
  j["outer_iterations"] = a.iterations;
  j["rho0"] = a.rho0;
  j["tau"] = a.tau;
  j["early_stop"] = a.early_stop;
  j["eps_primal"] = a.eps_primal;
  j["eps_dual"] = a.eps_dual;
  return j;
}

json mppi_json(const MppiConfig& m) {
  json j;
  j["samples"] = m.samples;
  j["temperature"] = m.temperature;
  j["iterations"] = m.iterations;
  j["penalty_weight"] = m.penalty_weight;
  return j;
}

json rastrigin_json(const rastrigin::RastriginParams& p) {
  json j;
  j["prior_mean"] = vec_json(p.prior_mean);
  j["prior_variance"] = vec_json(p.prior_variance);
  j["misfit_weight"] = p.misfit_weight;
  j["input_weight"] = p.input_weight;
  j["box"] = p.box;
  return j;
}

json racing_json(const RacingConfig& r) {
  json j;
  j["horizon"] = r.horizon;
  j["max_steps"] = r.max_steps;
  j["stop_on_collision"] = r.stop_on_collision;
  j["lap_fraction"] = r.lap_fraction;
  j["track"] = {{"straight_length", r.track.straight_length},
                {"radius", r.track.radius},
                {"half_width", r.track.half_width},
                {"sample_spacing", r.track.sample_spacing}};
  j["speed"] = {{"straight_speed", r.speed.straight_speed},
                {"corner_speed", r.speed.corner_speed},
                {"ramp_accel", r.speed.ramp_accel}};
  j["vehicle"] = {{"wheelbase", r.vehicle.wheelbase},
                  {"dt", r.vehicle.dt},
                  {"max_steer_deg", r.vehicle.max_steer * 180.0 / kPi},
                  {"max_accel", r.vehicle.max_accel}};
  const auto& o = r.obstacles;
  j["obstacles"] = {{"count", o.count},
                    {"radius_min", o.radius_min},
                    {"radius_max", o.radius_max},
                    {"margin", o.margin},
                    {"lateral_offset_min", o.lateral_offset_min},
                    {"lateral_offset_max", o.lateral_offset_max},
                    {"min_gap", o.min_gap},
                    {"start_clearance", o.start_clearance},
                    {"vehicle_width", o.vehicle_width},
                    {"max_attempts", o.max_attempts}};
  j["weights"] = {{"position", r.weights.position},
                  {"heading", r.weights.heading},
                  {"speed", r.weights.speed},
                  {"terminal_scale", r.weights.terminal_scale},
                  {"steer", r.weights.steer},
                  {"accel", r.weights.accel}};
  return j;
}

json to_json_tree(const RunConfig& c) {
  json j;
  j["benchmark"] = to_string(c.benchmark);
  j["controller"] = to_string(c.controller);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["plot"] = c.plot;
  j["threads"] = c.threads;
  const bool racing = c.benchmark == Benchmark::kRacing;
  j["eki"] = eki_json(c.eki, racing);
  j["admm"] = admm_json(c.admm);
  j["mppi"] = mppi_json(c.mppi);
  if (racing) {
    j["racing"] = racing_json(c.racing);
  } else {
    j["rastrigin"] = rastrigin_json(c.rastrigin);
  }
  return j;
}

RunConfig defaults_for(Benchmark b) {
  RunConfig c;
  c.benchmark = b;
  if (b == Benchmark::kRastrigin) {
    c.eki = rastrigin::default_eki_config();
    c.admm = rastrigin::default_admm_config();
    c.mppi.samples = 50;
    c.mppi.iterations = c.eki.iterations;
    c.mppi.temperature = 1.0;
    c.mppi.penalty_weight = 1000.0;
  } else {
    c.eki.ensemble_size = 32;
    c.eki.iterations = 3;
    c.eki.sampling_std = Vector(2);
    c.eki.sampling_std << 0.2, 3.0;
    c.eki.beta0 = 1.0;
    c.eki.gamma = 0.5;
    c.admm.iterations = 4;
    c.admm.rho0 = 1.0;
    c.admm.tau = 2.0;
    c.mppi.samples = 64;
    c.mppi.iterations = 3;
    c.mppi.temperature = 1.0;
    c.mppi.penalty_weight = 1000.0;
  }
  return c;
}

const char* type_name(const json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

// Overlays `user` onto `base`; the schema is the shape of `base`.
void overlay(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = join(path, it.key());
    if (!base.contains(it.key())) throw ConfigError(key, "unknown key");
    json& slot = base[it.key()];
    const json& v = it.value();
    if (slot.is_object()) {
      overlay(slot, v, key);
    } else if (slot.is_array()) {
      if (!v.is_array()) throw ConfigError(key, std::string("expected array, got ") + type_name(v));
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(key, "array entries must be numbers");
      }
      slot = v;
    } else if (slot.is_number_integer() || slot.is_number_unsigned()) {
      if (!v.is_number_integer() && !v.is_number_unsigned()) {
        if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) {
          slot = static_cast<std::int64_t>(v.get<double>());
          continue;
        }
        throw ConfigError(key, std::string("expected integer, got ") + type_name(v));
      }
      slot = v;
    } else if (slot.is_number()) {
      if (!v.is_number()) throw ConfigError(key, std::string("expected number, got ") + type_name(v));
      slot = v.get<double>();
    } else if (slot.is_boolean()) {
      if (!v.is_boolean()) throw ConfigError(key, std::string("expected boolean, got ") + type_name(v));
      slot = v;
    } else if (slot.is_string()) {
      if (!v.is_string()) throw ConfigError(key, std::string("expected string, got ") + type_name(v));
      slot = v;
    }
  }
}

Benchmark parse_benchmark(const std::string& s) {
  if (s == "rastrigin") return Benchmark::kRastrigin;
  if (s == "racing") return Benchmark::kRacing;
  throw ConfigError("benchmark", "must be \"rastrigin\" or \"racing\", got \"" + s + "\"");
}

ControllerKind parse_controller(const std::string& s) {
  if (s == "admm-eki") return ControllerKind::kAdmmEki;
  if (s == "mppi-baseline") return ControllerKind::kMppi;
  throw ConfigError("controller", "must be \"admm-eki\" or \"mppi-baseline\", got \"" + s + "\"");
}

template <class T>
T get_int(const json& j, const char* key, const std::string& path) {
  const json& v = j.at(key);
  if (v.is_number_integer() && v.get<std::int64_t>() < 0 && std::is_unsigned_v<T>) {
    throw ConfigError(join(path, key), "must be non-negative");
  }
  return v.get<T>();
}

RunConfig from_tree(const json& j, Benchmark b) {
  RunConfig c = defaults_for(b);
  c.controller = parse_controller(j.at("controller").get<std::string>());
  c.seed = get_int<std::uint64_t>(j, "seed", "");
  c.output_dir = j.at("output_dir").get<std::string>();
  c.plot = j.at("plot").get<bool>();
  c.threads = j.at("threads").get<int>();

  const json& e = j.at("eki");
  c.eki.ensemble_size = e.at("ensemble_size").get<Index>();
  c.eki.iterations = e.at("inner_iterations").get<Index>();
  if (e.contains("sampling_std")) c.eki.sampling_std = json_vec(e.at("sampling_std"));
  c.eki.beta0 = e.at("beta0").get<double>();
  c.eki.gamma = e.at("gamma").get<double>();
  c.eki.woodbury_threshold = e.at("woodbury_threshold").get<Index>();

  const json& a = j.at("admm");
  c.admm.iterations = a.at("outer_iterations").get<Index>();
  c.admm.rho0 = a.at("rho0").get<double>();
  c.admm.tau = a.at("tau").get<double>();
  c.admm.early_stop = a.at("early_stop").get<bool>();
  c.admm.eps_primal = a.at("eps_primal").get<double>();
  c.admm.eps_dual = a.at("eps_dual").get<double>();

  const json& m = j.at("mppi");
  c.mppi.samples = m.at("samples").get<Index>();
  c.mppi.temperature = m.at("temperature").get<double>();
  c.mppi.iterations = m.at("iterations").get<Index>();
  c.mppi.penalty_weight = m.at("penalty_weight").get<double>();
  c.mppi.sampling_std = c.eki.sampling_std;
  c.mppi.beta0 = c.eki.beta0;
  c.mppi.gamma = c.eki.gamma;

  if (b == Benchmark::kRastrigin) {
    const json& r = j.at("rastrigin");
    for (const char* key : {"prior_mean", "prior_variance"}) {
      if (r.at(key).size() != 2) throw ConfigError(join("rastrigin", key), "must have 2 entries");
    }
    c.rastrigin.prior_mean = json_vec(r.at("prior_mean"));
    c.rastrigin.prior_variance = json_vec(r.at("prior_variance"));
    c.rastrigin.misfit_weight = r.at("misfit_weight").get<double>();
    c.rastrigin.input_weight = r.at("input_weight").get<double>();
    c.rastrigin.box = r.at("box").get<double>();
  } else {
    const json& r = j.at("racing");
    RacingConfig& rc = c.racing;
    rc.horizon = r.at("horizon").get<Index>();
    rc.max_steps = r.at("max_steps").get<Index>();
    rc.stop_on_collision = r.at("stop_on_collision").get<bool>();
    rc.lap_fraction = r.at("lap_fraction").get<double>();
    const json& t = r.at("track");
    rc.track.straight_length = t.at("straight_length").get<double>();
    rc.track.radius = t.at("radius").get<double>();
    rc.track.half_width = t.at("half_width").get<double>();
    rc.track.sample_spacing = t.at("sample_spacing").get<double>();
    const json& s = r.at("speed");
    rc.speed.straight_speed = s.at("straight_speed").get<double>();
    rc.speed.corner_speed = s.at("corner_speed").get<double>();
    rc.speed.ramp_accel = s.at("ramp_accel").get<double>();
    const json& v = r.at("vehicle");
    rc.vehicle.wheelbase = v.at("wheelbase").get<double>();
    rc.vehicle.dt = v.at("dt").get<double>();
    rc.vehicle.max_steer = v.at("max_steer_deg").get<double>() * kPi / 180.0;
    rc.vehicle.max_accel = v.at("max_accel").get<double>();
    const json& o = r.at("obstacles");
    rc.obstacles.count = o.at("count").get<int>();
    rc.obstacles.radius_min = o.at("radius_min").get<double>();
    rc.obstacles.radius_max = o.at("radius_max").get<double>();
    rc.obstacles.margin = o.at("margin").get<double>();
    rc.obstacles.lateral_offset_min = o.at("lateral_offset_min").get<double>();
    rc.obstacles.lateral_offset_max = o.at("lateral_offset_max").get<double>();
    rc.obstacles.min_gap = o.at("min_gap").get<double>();
    rc.obstacles.start_clearance = o.at("start_clearance").get<double>();
    rc.obstacles.vehicle_width = o.at("vehicle_width").get<double>();
    rc.obstacles.max_attempts = o.at("max_attempts").get<int>();
    const json& w = r.at("weights");
    rc.weights.position = w.at("position").get<double>();
    rc.weights.heading = w.at("heading").get<double>();
    rc.weights.speed = w.at("speed").get<double>();
    rc.weights.terminal_scale = w.at("terminal_scale").get<double>();
    rc.weights.steer = w.at("steer").get<double>();
    rc.weights.accel = w.at("accel").get<double>();
  }
  return c;
}

void require(bool ok, const char* key, const std::string& msg) {
  if (!ok) throw ConfigError(key, msg);
}

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> d = {
      {"benchmark", "Scenario: \"rastrigin\" (2D demo) or \"racing\" (bicycle on an oval)."},
      {"controller", "\"admm-eki\" or \"mppi-baseline\"."},
      {"seed", "Run seed; sampling and environment streams are derived from it."},
      {"output_dir", "Directory receiving CSV traces, summary and plots."},
      {"plot", "Write SVG plots when true."},
      {"threads", "Worker threads for rollout evaluation (results do not depend on it)."},
      {"eki.ensemble_size", "Particles N per inner iteration."},
      {"eki.inner_iterations", "EKI iterations M+1 per ADMM primal step."},
      {"eki.sampling_std", "Per-input standard deviation of the sampling covariance (racing)."},
      {"eki.beta0", "Initial annealing scale beta_0."},
      {"eki.gamma", "Annealing decay: beta_k = beta_0 exp(-gamma k)."},
      {"eki.woodbury_threshold", "Use the Woodbury gain when residual size d > threshold * N."},
      {"admm.outer_iterations", "ADMM iterations L+1."},
      {"admm.rho0", "Initial penalty rho_0."},
      {"admm.tau", "Penalty growth factor, rho_l = rho_0 tau^l (>= 1)."},
      {"admm.early_stop", "Stop when primal and dual residuals fall below eps."},
      {"admm.eps_primal", "Tolerance on max |G + S|."},
      {"admm.eps_dual", "Tolerance on max |rho (S - S_prev)|."},
      {"mppi.samples", "Samples per MPPI iteration."},
      {"mppi.temperature", "Softmax temperature lambda."},
      {"mppi.iterations", "Refinement iterations; annealing uses eki.beta0/eki.gamma."},
      {"mppi.penalty_weight", "Soft constraint penalty rho_pen in J + rho_pen/2 |[G]+|^2."},
      {"rastrigin.prior_mean", "Initial ensemble mean m_0."},
      {"rastrigin.prior_variance", "Diagonal of the sampling covariance C_0."},
      {"rastrigin.misfit_weight", "Weight on the misfit to the target level."},
      {"rastrigin.input_weight", "Small regularizing weight on the inputs."},
      {"rastrigin.box", "Inputs are clamped to [-box, box]^2."},
      {"racing.horizon", "Planning horizon H (stages)."},
      {"racing.max_steps", "Episode step budget."},
      {"racing.stop_on_collision", "End the episode at the first collision."},
      {"racing.lap_fraction", "Fraction of the track that must be covered before the finish counts."},
      {"racing.track.straight_length", "Length of each straight [m]."},
      {"racing.track.radius", "Radius of the semicircular ends [m]."},
      {"racing.track.half_width", "Half width of the drivable corridor [m]."},
      {"racing.track.sample_spacing", "Raceline sample spacing [m]."},
      {"racing.speed.straight_speed", "Reference speed on straights [m/s]."},
      {"racing.speed.corner_speed", "Reference speed on arcs [m/s]."},
      {"racing.speed.ramp_accel", "Acceleration limit of the speed profile ramps [m/s^2]."},
      {"racing.vehicle.wheelbase", "Wheelbase L [m]."},
      {"racing.vehicle.dt", "Integration step [s]."},
      {"racing.vehicle.max_steer_deg", "Steering bound [deg]."},
      {"racing.vehicle.max_accel", "Acceleration bound [m/s^2]."},
      {"racing.obstacles.count", "Number of obstacles."},
      {"racing.obstacles.radius_min", "Smallest obstacle radius [m]."},
      {"racing.obstacles.radius_max", "Largest obstacle radius [m]."},
      {"racing.obstacles.margin", "Safety margin eps_obs added to each radius [m]."},
      {"racing.obstacles.lateral_offset_min", "Smallest |lateral offset| from the raceline [m]."},
      {"racing.obstacles.lateral_offset_max", "Largest |lateral offset| from the raceline [m]."},
      {"racing.obstacles.min_gap", "Minimum arclength between obstacles [m]."},
      {"racing.obstacles.start_clearance", "Obstacle-free arclength after the start [m]."},
      {"racing.obstacles.vehicle_width", "Free corridor width required beside each obstacle [m]."},
      {"racing.obstacles.max_attempts", "Rejection-sampling budget."},
      {"racing.weights.position", "Stage weight on x and y tracking error."},
      {"racing.weights.heading", "Stage weight on heading error."},
      {"racing.weights.speed", "Stage weight on speed error."},
      {"racing.weights.terminal_scale", "Terminal weight multiplier."},
      {"racing.weights.steer", "Input weight on steering."},
      {"racing.weights.accel", "Input weight on acceleration."},
  };
  return d;
}

void flatten(const json& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = join(prefix, it.key());
    if (it.value().is_object()) {
      flatten(it.value(), key, out);
    } else {
      out.emplace_back(key, it.value().dump());
    }
  }
}

}  // namespace

std::string to_string(Benchmark b) {
  return b == Benchmark::kRastrigin ? "rastrigin" : "racing";
}

std::string to_string(ControllerKind c) {
  return c == ControllerKind::kAdmmEki ? "admm-eki" : "mppi-baseline";
}

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
  std::uint64_t z = seed + static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string default_config_json(Benchmark benchmark) {
  return to_json_tree(defaults_for(benchmark)).dump(2) + "\n";
}

std::string config_reference_markdown() {
  std::ostringstream os;
  os << "# Configuration reference\n\n"
     << "Generated by `admm_eki_cli print-defaults --reference`. Keys missing from a\n"
     << "config file take the defaults below; unknown keys are rejected.\n";
  for (Benchmark b : {Benchmark::kRastrigin, Benchmark::kRacing}) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(to_json_tree(defaults_for(b)), "", rows);
    os << "\n## " << to_string(b) << "\n\n| key | default | description |\n|---|---|---|\n";
    for (const auto& [key, value] : rows) {
      auto it = descriptions().find(key);
      os << "| `" << key << "` | `" << value << "` | "
         << (it == descriptions().end() ? "" : it->second) << " |\n";
    }
  }
  return os.str();
}

RunConfig parse_config_text(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("", "top level must be an object");
  Benchmark b = Benchmark::kRastrigin;
  if (user.contains("benchmark")) {
    if (!user["benchmark"].is_string()) throw ConfigError("benchmark", "expected string");
    b = parse_benchmark(user["benchmark"].get<std::string>());
  }
  json tree = to_json_tree(defaults_for(b));
  overlay(tree, user, "");
  RunConfig cfg = from_tree(tree, b);
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_json(const RunConfig& cfg) { return to_json_tree(cfg).dump(2) + "\n"; }

void validate(const RunConfig& c) {
  require(c.threads >= 1, "threads", "must be >= 1");
  require(c.eki.ensemble_size >= 2, "eki.ensemble_size", "must be >= 2");
  require(c.eki.iterations >= 1, "eki.inner_iterations", "must be >= 1");
  require(c.eki.beta0 > 0.0, "eki.beta0", "must be > 0");
  require(c.eki.gamma >= 0.0, "eki.gamma", "must be >= 0");
  require(c.eki.woodbury_threshold >= 0, "eki.woodbury_threshold", "must be >= 0");
  require(c.admm.iterations >= 1, "admm.outer_iterations", "must be >= 1");
  require(c.admm.rho0 > 0.0, "admm.rho0", "must be > 0");
  require(c.admm.tau >= 1.0, "admm.tau", "must be >= 1");
  require(c.admm.eps_primal > 0.0, "admm.eps_primal", "must be > 0");
  require(c.admm.eps_dual > 0.0, "admm.eps_dual", "must be > 0");
  require(c.mppi.samples >= 1, "mppi.samples", "must be >= 1");
  require(c.mppi.temperature > 0.0, "mppi.temperature", "must be > 0");
  require(c.mppi.iterations >= 1, "mppi.iterations", "must be >= 1");
  require(c.mppi.penalty_weight >= 0.0, "mppi.penalty_weight", "must be >= 0");

  if (c.benchmark == Benchmark::kRastrigin) {
    const auto& r = c.rastrigin;
    require((r.prior_variance.array() > 0.0).all(), "rastrigin.prior_variance",
            "entries must be > 0");
    require(r.misfit_weight > 0.0, "rastrigin.misfit_weight", "must be > 0");
    require(r.input_weight > 0.0, "rastrigin.input_weight", "must be > 0");
    require(r.box > 0.0, "rastrigin.box", "must be > 0");
    return;
  }
  const auto& r = c.racing;
  require(c.eki.sampling_std.size() == 1 || c.eki.sampling_std.size() == 2,
          "eki.sampling_std", "must have 1 or 2 entries");
  require((c.eki.sampling_std.array() > 0.0).all(), "eki.sampling_std", "entries must be > 0");
  require(r.horizon >= 1, "racing.horizon", "must be >= 1");
  require(r.max_steps >= 1, "racing.max_steps", "must be >= 1");
  require(r.lap_fraction > 0.0 && r.lap_fraction <= 1.0, "racing.lap_fraction",
          "must be in (0, 1]");
  require(r.track.straight_length > 0.0, "racing.track.straight_length", "must be > 0");
  require(r.track.radius > r.track.half_width, "racing.track.radius",
          "must exceed racing.track.half_width");
  require(r.track.half_width > 0.0, "racing.track.half_width", "must be > 0");
  require(r.track.sample_spacing > 0.0, "racing.track.sample_spacing", "must be > 0");
  require(r.speed.straight_speed > 0.0, "racing.speed.straight_speed", "must be > 0");
  require(r.speed.corner_speed > 0.0, "racing.speed.corner_speed", "must be > 0");
  require(r.speed.ramp_accel > 0.0, "racing.speed.ramp_accel", "must be > 0");
  require(r.vehicle.wheelbase > 0.0, "racing.vehicle.wheelbase", "must be > 0");
  require(r.vehicle.dt > 0.0, "racing.vehicle.dt", "must be > 0");
  require(r.vehicle.max_steer > 0.0 && r.vehicle.max_steer < kPi / 2,
          "racing.vehicle.max_steer_deg", "must be in (0, 90)");
  require(r.vehicle.max_accel > 0.0, "racing.vehicle.max_accel", "must be > 0");
  const auto& o = r.obstacles;
  require(o.count >= 0, "racing.obstacles.count", "must be >= 0");
  require(o.radius_min > 0.0, "racing.obstacles.radius_min", "must be > 0");
  require(o.radius_max >= o.radius_min, "racing.obstacles.radius_max",
          "must be >= racing.obstacles.radius_min");
  require(o.margin >= 0.0, "racing.obstacles.margin", "must be >= 0");
  require(o.lateral_offset_min >= 0.0, "racing.obstacles.lateral_offset_min", "must be >= 0");
  require(o.lateral_offset_max >= o.lateral_offset_min, "racing.obstacles.lateral_offset_max",
          "must be >= racing.obstacles.lateral_offset_min");
  require(o.min_gap >= 0.0, "racing.obstacles.min_gap", "must be >= 0");
  require(o.start_clearance >= 0.0, "racing.obstacles.start_clearance", "must be >= 0");
  require(o.vehicle_width >= 0.0, "racing.obstacles.vehicle_width", "must be >= 0");
  require(o.max_attempts >= 1, "racing.obstacles.max_attempts", "must be >= 1");
  const auto& w = r.weights;
  require(w.position > 0.0, "racing.weights.position", "must be > 0");
  require(w.heading > 0.0, "racing.weights.heading", "must be > 0");
  require(w.speed > 0.0, "racing.weights.speed", "must be > 0");
  require(w.terminal_scale > 0.0, "racing.weights.terminal_scale", "must be > 0");
  require(w.steer > 0.0, "racing.weights.steer", "must be > 0");
  require(w.accel > 0.0, "racing.weights.accel", "must be > 0");
}

}  // namespace admm_eki
