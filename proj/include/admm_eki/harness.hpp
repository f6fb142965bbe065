#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "admm_eki/config.hpp"

namespace admm_eki {

/// Process exit codes used by `run` and `compare`.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,      // config, usage or IO error
  kExitDiverged = 2,    // solver or plant divergence
  kExitCollision = 3,   // episode ended by a collision
  kExitIncomplete = 4,  // lap not finished within max_steps
};

/// Header and formatted values of summary.csv for one run.
struct SummaryTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// The racing summary columns, in order.
const std::vector<std::string>& racing_summary_columns();
const std::vector<std::string>& rastrigin_summary_columns();

struct RunOutcome {
  int exit_code = kExitOk;
  std::string status;  // "ok", "diverged", "collision", "incomplete"
  std::string message;
  std::string controller;
  SummaryTable summary;
  std::optional<std::uint64_t> environment_hash;  // racing only
  std::optional<RunRecord> record;                // racing only
  std::optional<rastrigin::DemoResult> demo;      // rastrigin admm-eki only
  std::optional<Eigen::Vector2d> solution;        // rastrigin only
};

/// Runs one configured experiment and writes its artifacts to
/// `cfg.output_dir`:
///   summary.csv, status.json, config.json,
///   rastrigin: admm_trace.csv, eki_trace.csv, snapshots.csv (or mppi_trace.csv),
///   racing: steps.csv, timing.csv, environment.json, admm_trace.csv and
///           eki_trace.csv (or mppi_trace.csv),
///   plots (when enabled): snapshots.svg or track.svg.
/// Everything except timing.csv is a deterministic function of the config.
RunOutcome run(const RunConfig& cfg);

struct CompareOutcome {
  int exit_code = kExitOk;  // worst of the two runs
  RunOutcome a;
  RunOutcome b;
  SummaryTable table;  // merged, one row per controller
  std::optional<std::uint64_t> environment_hash;
};

/// Runs both configs on the same environment instance; artifacts go to
/// `<a.output_dir>/a_<controller>` and `<a.output_dir>/b_<controller>`, the
/// merged table to `<a.output_dir>/comparison.csv`.
/// Throws ConfigError when benchmark or seed differ.
CompareOutcome compare(const RunConfig& a, const RunConfig& b);

/// Fixed-width text rendering of a summary table.
std::string format_table(const SummaryTable& table);

/// Reads a whole file (used by tests and the CLI).
std::string read_file(const std::string& path);

}  // namespace admm_eki
