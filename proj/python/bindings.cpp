#include <optional>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "admm_eki/harness.hpp"

namespace py = pybind11;
using namespace admm_eki;

namespace {

RunConfig load(const std::string& path, std::optional<std::uint64_t> seed,
               std::optional<std::string> output_dir, std::optional<bool> plot) {
  RunConfig cfg = parse_config(path);
  if (seed) cfg.seed = *seed;
  if (output_dir) cfg.output_dir = *output_dir;
  if (plot) cfg.plot = *plot;
  return cfg;
}

py::dict outcome_dict(const RunOutcome& o) {
  py::dict d;
  d["exit_code"] = o.exit_code;
  d["status"] = o.status;
  d["message"] = o.message;
  d["controller"] = o.controller;
  d["header"] = o.summary.header;
  d["rows"] = o.summary.rows;
  if (o.environment_hash) d["environment_hash"] = *o.environment_hash;
  if (o.solution) d["solution"] = Vector(*o.solution);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ADMM-EKI solver core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  m.def("rastrigin_forward", [](const Eigen::Vector2d& x) { return rastrigin::forward(x); });
  m.def("rastrigin_misfit", [](const Eigen::Vector2d& x) { return rastrigin::misfit(x); });
  m.def("disk_penalty", [](const Eigen::Vector2d& x) { return rastrigin::disk_penalty(x); });
  m.def(
      "run_rastrigin_demo",
      [](std::uint64_t seed) {
        const auto r = rastrigin::run_demo(seed, {}, rastrigin::default_eki_config(),
                                           rastrigin::default_admm_config(), false);
        py::list rho;
        for (const auto& t : r.trace) rho.append(t.rho);
        py::dict d;
        d["final_mean"] = Vector(r.final_mean);
        d["rho"] = rho;
        return d;
      },
      py::arg("seed") = 0);

  m.def(
      "bicycle_step",
      [](const Vector& state, const Vector& input, double wheelbase, double dt) {
        racing::VehicleParams p;
        p.wheelbase = wheelbase;
        p.dt = dt;
        return racing::bicycle_step(state, input, p);
      },
      py::arg("state"), py::arg("input"), py::arg("wheelbase") = racing::VehicleParams{}.wheelbase,
      py::arg("dt") = racing::VehicleParams{}.dt);
  m.def(
      "race_environment",
      [](std::uint64_t seed) {
        const auto env = racing::build_race_environment(seed);
        return py::make_tuple(env.hash(), env.to_json());
      },
      py::arg("seed"), "(hash, json) of the default scenario for a generator seed");

  m.def("slack_update", &slack_update, py::arg("g"), py::arg("dual"));
  m.def("dual_update", &dual_update, py::arg("dual"), py::arg("g"), py::arg("slack"));
  m.def(
      "annealing_beta",
      [](double beta0, double gamma, Index k) {
        EkiConfig c;
        c.beta0 = beta0;
        c.gamma = gamma;
        return annealing_beta(c, k);
      },
      py::arg("beta0"), py::arg("gamma"), py::arg("k"));

  m.def(
      "derive_seed",
      [](std::uint64_t seed, const std::string& stream) {
        if (stream == "sampling") return derive_seed(seed, SeedStream::kSampling);
        if (stream == "environment") return derive_seed(seed, SeedStream::kEnvironment);
        throw py::value_error("stream must be 'sampling' or 'environment'");
      },
      py::arg("seed"), py::arg("stream"));

  m.def(
      "default_config",
      [](const std::string& benchmark) {
        return default_config_json(benchmark == "racing" ? Benchmark::kRacing
                                                         : Benchmark::kRastrigin);
      },
      py::arg("benchmark") = "rastrigin");
  m.def(
      "validate_config", [](const std::string& text) { return config_to_json(parse_config_text(text)); },
      py::arg("text"), "Parses and validates JSON text; returns the resolved config.");
  m.def(
      "run",
      [](const std::string& path, std::optional<std::uint64_t> seed,
         std::optional<std::string> output_dir, std::optional<bool> plot) {
        const RunConfig cfg = load(path, seed, output_dir, plot);
        py::gil_scoped_release release;
        RunOutcome o = run(cfg);
        py::gil_scoped_acquire acquire;
        return outcome_dict(o);
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("output_dir") = py::none(),
      py::arg("plot") = py::none());
  m.def(
      "compare",
      [](const std::string& a, const std::string& b, std::optional<std::uint64_t> seed,
         std::optional<std::string> output_dir) {
        const RunConfig ca = load(a, seed, output_dir, std::nullopt);
        const RunConfig cb = load(b, seed, output_dir, std::nullopt);
        const CompareOutcome c = compare(ca, cb);
        py::dict d;
        d["exit_code"] = c.exit_code;
        d["header"] = c.table.header;
        d["rows"] = c.table.rows;
        if (c.environment_hash) d["environment_hash"] = *c.environment_hash;
        d["a"] = outcome_dict(c.a);
        d["b"] = outcome_dict(c.b);
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("seed") = py::none(), py::arg("output_dir") = py::none());
}
