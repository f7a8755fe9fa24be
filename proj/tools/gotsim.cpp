// gotsim: config-driven experiment runner.
//
//   gotsim validate <config>
//   gotsim compare <config> [--threads N]
//   gotsim timeseries <config> --policy <name> [--horizon N]
//   gotsim solve <config> --policy <name>
//   gotsim tensor <config> --classify
//   gotsim selfcheck [--inject-fault asymmetry]
//
// Global flags: --seed <u64>, --out <dir>.
// Exit codes: 0 success, 1 validation error, 2 runtime error, 3 selfcheck failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "got/config.hpp"
#include "got/error.hpp"
#include "got/harness.hpp"
#include "got/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitSelfcheck = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

got::ExperimentConfig load(const std::string& path, const Globals& g) {
  got::ExperimentConfig cfg = got::validate_config(path);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.output_dir = *g.out;
  return cfg;
}

// Writes `text` to <out>/<name> when an output directory was given, else to stdout.
void emit(const Globals& g, const std::string& name, const std::string& text) {
  if (g.out) {
    got::write_text_file(std::filesystem::path(*g.out) / name, text);
  } else {
    std::cout << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-oriented sampling experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  std::string out;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out, "Output directory");

  std::string config;
  std::string policy;
  unsigned threads = 1;
  std::uint64_t horizon = 0;
  bool classify = false;
  std::string fault;

  auto* validate = app.add_subcommand("validate", "Parse and validate a config");
  validate->add_option("config", config)->required();

  auto* compare = app.add_subcommand("compare", "Exact and Monte-Carlo comparison of all configured policies");
  compare->add_option("config", config)->required();
  compare->add_option("--threads", threads, "Replication worker threads")->check(CLI::PositiveNumber);

  auto* timeseries = app.add_subcommand("timeseries", "Per-slot trace of one policy (replication 0)");
  timeseries->add_option("config", config)->required();
  timeseries->add_option("--policy", policy)->required();
  auto* horizon_opt = timeseries->add_option("--horizon", horizon, "Override the config horizon");

  auto* solve = app.add_subcommand("solve", "Solve and dump the MDP solution of an optimal policy");
  solve->add_option("config", config)->required();
  solve->add_option("--policy", policy)->required();

  auto* tensor = app.add_subcommand("tensor", "Tensor structure report");
  tensor->add_option("config", config)->required();
  tensor->add_flag("--classify", classify, "Classify the tensor structure")->required();

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the built-in property checks");
  selfcheck->add_option("--inject-fault", fault, "Corrupt a fixture to exercise a failure path")
      ->check(CLI::IsMember({"asymmetry"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  if (*seed_opt) g.seed = seed;
  if (*out_opt) g.out = out;

  try {
    if (*validate) {
      const auto cfg = load(config, g);
      std::cout << "ok: |S|=" << cfg.system.n_status() << " |V|=" << cfg.system.env.n_env()
                << " |D|=" << cfg.system.source.n_decisions() << " tensor=" << cfg.tensor_source
                << " policies=" << cfg.policies.size() << '\n';
    } else if (*compare) {
      const auto cfg = load(config, g);
      const auto report = got::run_compare(cfg, threads);
      const std::string csv = got::report_csv(report);
      if (g.out) {
        got::write_text_file(std::filesystem::path(*g.out) / "compare.csv", csv);
        got::write_text_file(std::filesystem::path(*g.out) / "compare.json", got::report_json(report).dump(2) + "\n");
      }
      std::cout << csv;
    } else if (*timeseries) {
      const auto cfg = load(config, g);
      const auto& spec = got::find_policy(cfg, policy);
      const auto pol = got::build_policy(cfg, spec);
      std::ostringstream os;
      got::run_timeseries(cfg, pol, os, *horizon_opt ? std::optional<std::uint64_t>(horizon) : std::nullopt);
      emit(g, "timeseries_" + spec.label() + ".csv", os.str());
    } else if (*solve) {
      const auto cfg = load(config, g);
      const auto& spec = got::find_policy(cfg, policy);
      emit(g, "solution_" + spec.label() + ".json", got::solve_report_json(cfg, spec).dump(2) + "\n");
    } else if (*tensor) {
      const auto cfg = load(config, g);
      emit(g, "tensor_report.json", got::tensor_report_json(cfg).dump(2) + "\n");
    } else if (*selfcheck) {
      got::SelfcheckOptions opts;
      if (g.seed) opts.seed = *g.seed;
      opts.inject_asymmetry = fault == "asymmetry";
      const auto results = got::run_selfcheck(opts);
      emit(g, "selfcheck.csv", got::selfcheck_table(results));
      for (const auto& r : results)
        if (!r.passed) return kExitSelfcheck;
    }
  } catch (const got::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
