// Command-line driver: run, compare, validate-config, print-defaults.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "admm_eki/harness.hpp"

using namespace admm_eki;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<bool> plot;

  void apply(RunConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (output_dir) cfg.output_dir = *output_dir;
    if (plot) cfg.plot = *plot;
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--output-dir,-o", o.output_dir, "Override the output directory");
  cmd->add_flag("--plot,!--no-plot", o.plot, "Write (or suppress) SVG plots");
}

void report(const RunOutcome& r) {
  std::cout << format_table(r.summary);
  std::cout << "status: " << r.status;
  if (!r.message.empty()) std::cout << " (" << r.message << ")";
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ADMM-EKI constrained MPC experiments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides run_over;
  auto* run_cmd = app.add_subcommand("run", "Run one configured experiment");
  run_cmd->add_option("--config,-c", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  add_overrides(run_cmd, run_over);

  std::vector<std::string> compare_paths;
  Overrides cmp_over;
  auto* cmp_cmd = app.add_subcommand("compare", "Run two configs on the same environment");
  cmp_cmd->add_option("--config,-c", compare_paths, "Two config files, e.g. -c a.json -c b.json")
      ->required()
      ->expected(2)
      ->check(CLI::ExistingFile);
  add_overrides(cmp_cmd, cmp_over);

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate-config", "Parse and validate a config file");
  val_cmd->add_option("--config,-c", validate_path, "Config file (JSON)")->required();

  std::string benchmark = "rastrigin";
  bool reference = false;
  auto* def_cmd = app.add_subcommand("print-defaults", "Print the default config or key reference");
  def_cmd->add_option("--benchmark,-b", benchmark, "rastrigin or racing")
      ->check(CLI::IsMember({"rastrigin", "racing"}));
  def_cmd->add_flag("--reference", reference, "Print the Markdown reference of every key");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      RunConfig cfg = parse_config(config_path);
      run_over.apply(cfg);
      const RunOutcome r = run(cfg);
      report(r);
      return r.exit_code;
    }
    if (*cmp_cmd) {
      RunConfig a = parse_config(compare_paths.at(0));
      RunConfig b = parse_config(compare_paths.at(1));
      cmp_over.apply(a);
      cmp_over.apply(b);
      const CompareOutcome c = compare(a, b);
      std::cout << format_table(c.table);
      for (const RunOutcome* r : {&c.a, &c.b}) {
        std::cout << r->controller << ": " << r->status;
        if (!r->message.empty()) std::cout << " (" << r->message << ")";
        std::cout << "\n";
      }
      return c.exit_code;
    }
    if (*val_cmd) {
      const RunConfig cfg = parse_config(validate_path);
      std::cout << "ok: " << to_string(cfg.benchmark) << " / " << to_string(cfg.controller)
                << ", seed " << cfg.seed << "\n";
      return kExitOk;
    }
    if (*def_cmd) {
      if (reference) {
        std::cout << config_reference_markdown();
      } else {
        std::cout << default_config_json(benchmark == "racing" ? Benchmark::kRacing
                                                               : Benchmark::kRastrigin);
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
