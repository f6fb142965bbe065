#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "admm_eki/admm.hpp"
#include "admm_eki/mppi.hpp"
#include "admm_eki/racing.hpp"
#include "admm_eki/rastrigin.hpp"

namespace admm_eki {

enum class Benchmark { kRastrigin, kRacing };
enum class ControllerKind { kAdmmEki, kMppi };

std::string to_string(Benchmark b);
std::string to_string(ControllerKind c);

/// Schema or range violation; `key()` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RacingConfig {
  racing::TrackParams track;
  racing::SpeedParams speed;
  racing::VehicleParams vehicle;
  racing::ObstacleParams obstacles;
  racing::CostWeights weights;
  Index horizon = 20;
  Index max_steps = 1500;
  bool stop_on_collision = true;
  double lap_fraction = 0.9;
};

struct RunConfig {
  Benchmark benchmark = Benchmark::kRastrigin;
  ControllerKind controller = ControllerKind::kAdmmEki;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool plot = false;
  int threads = 1;
  EkiConfig eki;
  AdmmConfig admm;
  MppiConfig mppi;
  rastrigin::RastriginParams rastrigin;
  RacingConfig racing;
};

/// Independent RNG streams derived from the run seed.
enum class SeedStream : std::uint64_t { kSampling = 1, kEnvironment = 2 };

/// splitmix64(seed + stream * golden-ratio increment): a counter-based
/// derivation, so each subsystem can be replayed on its own.
std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream);

/// Full default configuration for a benchmark, as JSON text.
std::string default_config_json(Benchmark benchmark);
/// Markdown table of every key with its default and meaning, both benchmarks.
std::string config_reference_markdown();

/// Parses and validates a configuration; unspecified keys take the
/// benchmark's defaults, unknown keys are rejected.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);
/// Re-serializes a resolved configuration (round-trips through parse).
std::string config_to_json(const RunConfig& cfg);
/// Range checks on a resolved configuration.
void validate(const RunConfig& cfg);

}  // namespace admm_eki
