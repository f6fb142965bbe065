#include "admm_eki/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "admm_eki/svg.hpp"
#include "json.hpp"

namespace admm_eki {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(Index v) { return std::to_string(v); }

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path.string()) {
    out_.open(path, std::ios::binary);
    if (!out_) throw std::runtime_error("cannot write '" + path_ + "'");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  ~Csv() { out_.close(); }

  void close() {
    out_.close();
    if (out_.fail()) throw std::runtime_error("write failed for '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
  }
}

void write_summary(const fs::path& dir, const SummaryTable& t) {
  Csv csv(dir / "summary.csv", t.header);
  for (const auto& r : t.rows) csv.row(r);
  csv.close();
}

void write_status(const fs::path& dir, const RunOutcome& o) {
  json j;
  j["controller"] = o.controller;
  j["status"] = o.status;
  j["exit_code"] = o.exit_code;
  j["message"] = o.message;
  if (o.environment_hash) j["environment_hash"] = hex(*o.environment_hash);
  if (o.record) j["lap_completed"] = o.record->task_completed;
  write_text(dir / "status.json", j.dump(2) + "\n");
}

const std::vector<std::string> kAdmmHeader = {
    "step", "ell", "phi", "max_violation", "rho", "primal_residual", "dual_residual"};
const std::vector<std::string> kEkiHeader = {"step", "ell",           "k",     "beta",
                                             "phi",  "max_violation", "spread"};
const std::vector<std::string> kMppiHeader = {"step", "k", "beta", "min_cost",
                                              "effective_samples"};

void write_outer(Csv& admm, Csv& eki, Index step, const std::vector<OuterIterationRecord>& trace) {
  for (const auto& o : trace) {
    admm.row({fmt(step), fmt(o.ell), fmt(o.phi), fmt(o.max_violation), fmt(o.rho),
              fmt(o.primal_residual), fmt(o.dual_residual)});
    for (const auto& i : o.inner) {
      eki.row({fmt(step), fmt(o.ell), fmt(i.k), fmt(i.beta), fmt(i.phi), fmt(i.max_violation),
               fmt(i.spread)});
    }
  }
}

void write_mppi(Csv& csv, Index step, const std::vector<MppiIterationRecord>& trace) {
  for (const auto& r : trace) {
    csv.row({fmt(step), fmt(r.k), fmt(r.beta), fmt(r.min_cost), fmt(r.effective_samples)});
  }
}

EkiConfig eki_for(const RunConfig& cfg) {
  EkiConfig e = cfg.eki;
  e.seed = derive_seed(cfg.seed, SeedStream::kSampling);
  e.threads = cfg.threads;
  return e;
}

MppiConfig mppi_for(const RunConfig& cfg) {
  MppiConfig m = cfg.mppi;
  m.sampling_std = cfg.eki.sampling_std;
  m.sampling_covariance = cfg.eki.sampling_covariance;
  m.beta0 = cfg.eki.beta0;
  m.gamma = cfg.eki.gamma;
  m.seed = derive_seed(cfg.seed, SeedStream::kSampling);
  m.threads = cfg.threads;
  return m;
}

racing::RaceEnvironment environment_for(const RunConfig& cfg) {
  const RacingConfig& r = cfg.racing;
  return racing::build_race_environment(derive_seed(cfg.seed, SeedStream::kEnvironment), r.track,
                                        r.speed, r.vehicle, r.obstacles);
}

RunOutcome run_rastrigin(const RunConfig& cfg, const fs::path& dir) {
  RunOutcome out;
  out.controller = to_string(cfg.controller);
  const auto& params = cfg.rastrigin;
  Eigen::Vector2d x;
  try {
    if (cfg.controller == ControllerKind::kAdmmEki) {
      rastrigin::DemoResult demo =
          rastrigin::run_demo(derive_seed(cfg.seed, SeedStream::kSampling), params, eki_for(cfg),
                              cfg.admm, true);
      Csv admm(dir / "admm_trace.csv", kAdmmHeader);
      Csv eki(dir / "eki_trace.csv", kEkiHeader);
      write_outer(admm, eki, 0, demo.trace);
      admm.close();
      eki.close();
      Csv snaps(dir / "snapshots.csv", {"outer", "inner", "particle", "x1", "x2"});
      Csv means(dir / "snapshot_means.csv", {"outer", "inner", "x1", "x2"});
      for (const auto& s : demo.snapshots) {
        for (Index p = 0; p < s.particles.cols(); ++p) {
          snaps.row({fmt(s.outer), fmt(s.inner), fmt(p), fmt(s.particles(0, p)),
                     fmt(s.particles(1, p))});
        }
        means.row({fmt(s.outer), fmt(s.inner), fmt(s.mean.x()), fmt(s.mean.y())});
      }
      snaps.close();
      means.close();
      if (cfg.plot) svg::rastrigin_snapshots((dir / "snapshots.svg").string(), params, demo.snapshots);
      x = demo.final_mean;
      out.demo = std::move(demo);
    } else {
      const ProblemSpec spec = rastrigin::make_problem(params);
      MppiConfig m = mppi_for(cfg);
      m.sampling_covariance = params.prior_variance.asDiagonal();
      Rng rng(m.seed);
      std::vector<MppiIterationRecord> trace;
      const ControlSequence solved =
          mppi_update(spec, rastrigin::initial_state(), spec.as_controls(Vector(params.prior_mean)),
                      m, rng, &trace);
      Csv csv(dir / "mppi_trace.csv", kMppiHeader);
      write_mppi(csv, 0, trace);
      csv.close();
      x = solved.flat();
    }
    out.status = "ok";
  } catch (const DivergenceError& e) {
    out.exit_code = kExitDiverged;
    out.status = "diverged";
    out.message = e.what();
    x.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  const double g = rastrigin::disk_penalty(x, params);
  out.solution = x;
  out.summary.header = rastrigin_summary_columns();
  out.summary.rows.push_back({out.controller, fmt(x.x()), fmt(x.y()), fmt(rastrigin::forward(x)),
                              fmt(rastrigin::misfit(x)), fmt(g), g == 0.0 ? "1" : "0"});
  return out;
}

RunOutcome run_racing(const RunConfig& cfg, const fs::path& dir,
                      const racing::RaceEnvironment& env) {
  RunOutcome out;
  out.controller = to_string(cfg.controller);
  out.environment_hash = env.hash();
  write_text(dir / "environment.json", env.to_json() + "\n");

  const RacingConfig& rc = cfg.racing;
  racing::RaceSimulator sim(env, rc.horizon, rc.lap_fraction);
  const ProblemSpec spec = racing::make_problem(env, rc.horizon, rc.weights);

  Csv steps(dir / "steps.csv", {"step", "steer", "accel", "x", "y", "heading", "speed",
                                "tracking_error", "min_clearance", "phi", "max_violation"});
  Csv timing(dir / "timing.csv", {"step", "solve_seconds"});
  std::optional<Csv> admm_csv, eki_csv, mppi_csv;

  std::unique_ptr<Controller> controller;
  MpcSession* admm_session = nullptr;
  MppiSession* mppi_session = nullptr;
  if (cfg.controller == ControllerKind::kAdmmEki) {
    auto s = std::make_unique<MpcSession>(spec, cfg.admm, eki_for(cfg));
    admm_session = s.get();
    controller = std::move(s);
    admm_csv.emplace(dir / "admm_trace.csv", kAdmmHeader);
    eki_csv.emplace(dir / "eki_trace.csv", kEkiHeader);
  } else {
    auto s = std::make_unique<MppiSession>(spec, mppi_for(cfg));
    mppi_session = s.get();
    controller = std::move(s);
    mppi_csv.emplace(dir / "mppi_trace.csv", kMppiHeader);
  }

  EpisodeOptions opts;
  opts.max_steps = rc.max_steps;
  opts.stop_on_collision = rc.stop_on_collision;
  opts.on_step = [&](const StepRow& r) {
    steps.row({fmt(r.step), fmt(r.input(racing::kSteer)), fmt(r.input(racing::kAccel)),
               fmt(r.state(racing::kX)), fmt(r.state(racing::kY)), fmt(r.state(racing::kHeading)),
               fmt(r.state(racing::kSpeed)), fmt(r.tracking_error), fmt(r.min_clearance),
               fmt(r.phi), fmt(r.max_violation)});
    timing.row({fmt(r.step), fmt(r.solve_seconds)});
    if (admm_session) write_outer(*admm_csv, *eki_csv, r.step, admm_session->last_trace());
    if (mppi_session) write_mppi(*mppi_csv, r.step, mppi_session->last_trace());
  };
  RunRecord record = run_episode(*controller, sim, opts);
  steps.close();
  timing.close();
  if (admm_csv) admm_csv->close();
  if (eki_csv) eki_csv->close();
  if (mppi_csv) mppi_csv->close();

  const EpisodeSummary& s = record.summary;
  out.summary.header = racing_summary_columns();
  out.summary.rows.push_back({record.controller, fmt(s.mean_speed), fmt(s.max_speed),
                              fmt(s.mean_error), fmt(s.max_error), fmt(s.total_steps),
                              fmt(s.collisions)});
  if (record.failure) {
    out.exit_code = kExitDiverged;
    out.status = "diverged";
    out.message = *record.failure;
  } else if (s.collisions > 0) {
    out.exit_code = kExitCollision;
    out.status = "collision";
    out.message = "collision at step " + std::to_string(record.rows.back().step);
  } else if (!record.task_completed) {
    out.exit_code = kExitIncomplete;
    out.status = "incomplete";
    out.message = "lap not completed within " + std::to_string(rc.max_steps) + " steps";
  } else {
    out.status = "ok";
  }
  if (cfg.plot) svg::race_track((dir / "track.svg").string(), env, record.rows);
  out.record = std::move(record);
  return out;
}

RunOutcome run_in(const RunConfig& cfg, const fs::path& dir,
                  const racing::RaceEnvironment* env) {
  validate(cfg);
  prepare_dir(dir);
  write_text(dir / "config.json", config_to_json(cfg));
  RunOutcome out;
  if (cfg.benchmark == Benchmark::kRastrigin) {
    out = run_rastrigin(cfg, dir);
  } else if (env) {
    out = run_racing(cfg, dir, *env);
  } else {
    out = run_racing(cfg, dir, environment_for(cfg));
  }
  write_summary(dir, out.summary);
  write_status(dir, out);
  return out;
}

std::string environment_key(const RunConfig& c) {
  RunConfig e;
  e.benchmark = c.benchmark;
  e.racing.track = c.racing.track;
  e.racing.speed = c.racing.speed;
  e.racing.vehicle = c.racing.vehicle;
  e.racing.obstacles = c.racing.obstacles;
  e.rastrigin = c.rastrigin;
  return config_to_json(e);
}

}  // namespace

const std::vector<std::string>& racing_summary_columns() {
  static const std::vector<std::string> cols = {
      "controller", "mean_speed", "max_speed", "mean_error", "max_error", "total_steps",
      "collisions"};
  return cols;
}

const std::vector<std::string>& rastrigin_summary_columns() {
  static const std::vector<std::string> cols = {"controller", "x1", "x2", "h", "misfit",
                                                "constraint", "feasible"};
  return cols;
}

RunOutcome run(const RunConfig& cfg) { return run_in(cfg, cfg.output_dir, nullptr); }

CompareOutcome compare(const RunConfig& a, const RunConfig& b) {
  if (a.benchmark != b.benchmark) {
    throw ConfigError("benchmark", "compare needs the same benchmark in both configs (" +
                                       to_string(a.benchmark) + " vs " + to_string(b.benchmark) +
                                       ")");
  }
  if (a.seed != b.seed) {
    throw ConfigError("seed", "compare needs the same seed in both configs (" +
                                  std::to_string(a.seed) + " vs " + std::to_string(b.seed) + ")");
  }
  if (environment_key(a) != environment_key(b)) {
    throw ConfigError(a.benchmark == Benchmark::kRacing ? "racing" : "rastrigin",
                      "environment parameters differ between the two configs");
  }
  validate(a);
  validate(b);
  const fs::path root(a.output_dir);
  prepare_dir(root);

  CompareOutcome out;
  std::optional<racing::RaceEnvironment> env;
  if (a.benchmark == Benchmark::kRacing) {
    env.emplace(environment_for(a));
    out.environment_hash = env->hash();
  }
  const racing::RaceEnvironment* shared = env ? &*env : nullptr;
  out.a = run_in(a, root / ("a_" + to_string(a.controller)), shared);
  out.b = run_in(b, root / ("b_" + to_string(b.controller)), shared);
  out.exit_code = std::max(out.a.exit_code, out.b.exit_code);

  out.table.header = out.a.summary.header;
  if (out.environment_hash) out.table.header.push_back("environment_hash");
  for (const RunOutcome* o : {&out.a, &out.b}) {
    std::vector<std::string> row = o->summary.rows.front();
    if (o->environment_hash) row.push_back(hex(*o->environment_hash));
    out.table.rows.push_back(std::move(row));
  }
  Csv csv(root / "comparison.csv", out.table.header);
  for (const auto& r : out.table.rows) csv.row(r);
  csv.close();
  return out;
}

std::string format_table(const SummaryTable& t) {
  std::vector<std::size_t> width(t.header.size(), 0);
  auto grow = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], r[i].size());
    }
  };
  grow(t.header);
  for (const auto& r : t.rows) grow(r);
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      os << (i ? "  " : "") << r[i] << std::string(width[i] - r[i].size(), ' ');
    }
    os << '\n';
  };
  emit(t.header);
  for (const auto& r : t.rows) emit(r);
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace admm_eki
