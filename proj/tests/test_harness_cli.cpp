#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "got/config.hpp"
#include "got/error.hpp"
#include "got/harness.hpp"
#include "got/io.hpp"

using namespace got;
using nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string f; std::getline(is, f, ',');) out.push_back(f);
  return out;
}

std::string config_error_field(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped reference config") {
  const json file = read_json_file(std::filesystem::path(GOT_SOURCE_DIR) / "configs/reference.json");
  CHECK(file == reference_config_json());
  const auto cfg = validate_config(std::filesystem::path(GOT_SOURCE_DIR) / "configs/reference.json");
  CHECK(cfg.system.n_status() == 3);
  CHECK(cfg.system.source.n_decisions() == 3);
  CHECK(cfg.policies.size() == 6);
  CHECK(cfg.tensor_source == "cost_model");
  CHECK(cfg.tensor == build_got(reference_cost_model()));
  CHECK(cfg.replications == 20);
  CHECK(cfg.horizon == 100000);
  // Scenario values from the design table: ignition 0.05, escalation/extinguish per squad count.
  const double escalate[] = {0.30, 0.10, 0.05}, extinguish[] = {0.10, 0.50, 0.70}, deescalate[] = {0.05, 0.30, 0.60};
  for (std::size_t d = 0; d < 3; ++d) {
    CHECK(cfg.system.source.prob(d, 0, 1) == 0.05);
    CHECK(cfg.system.source.prob(d, 1, 2) == escalate[d]);
    CHECK(cfg.system.source.prob(d, 1, 0) == extinguish[d]);
    CHECK(cfg.system.source.prob(d, 2, 1) == deescalate[d]);
  }
}

TEST_CASE("config validation errors name the field") {
  json doc = reference_config_json();
  doc["system"]["kernels"][1][2] = {0.0, 0.2, 0.7};
  CHECK(config_error_field(doc) == "system.kernels[1][2]");

  doc = reference_config_json();
  doc["tensor"] = json::object();
  CHECK(config_error_field(doc) == "tensor");

  doc = reference_config_json();
  doc["replications"] = 0;
  CHECK(config_error_field(doc) == "replications");

  doc = reference_config_json();
  doc["policies"][0]["kind"] = "sometimes";
  CHECK(config_error_field(doc) == "policies[0].kind");

  doc = reference_config_json();
  doc["tensor"]["cost_model"]["c1"] = {{0}, {20}};
  CHECK(config_error_field(doc) == "tensor.cost_model.c1");

  doc = reference_config_json();
  doc["system"]["delta"] = {0, 1, 5};
  CHECK(config_error_field(doc) == "system.delta[2]");

  doc = reference_config_json();
  doc["tensor"] = {{"file", "does_not_exist.json"}};
  CHECK(config_error_field(doc) == "tensor.file");

  CHECK_THROWS_AS(validate_config("/nonexistent/config.json"), ValidationError);
}

TEST_CASE("near-stochastic rows are renormalized") {
  json doc = reference_config_json();
  doc["system"]["kernels"][0][0] = {0.95 + 5e-10, 0.05, 0.0};
  const auto cfg = parse_config(doc);
  const auto row = cfg.system.source.row(0, 0);
  CHECK(std::abs(row[0] + row[1] + row[2] - 1.0) <= 1e-12);
}

TEST_CASE("embedded and file tensor sources") {
  json doc = reference_config_json();
  doc["tensor"] = {{"embed", {{"kind", "mse"}}}};
  auto cfg = parse_config(doc);
  CHECK(cfg.tensor_source == "embed:mse");
  CHECK(cfg.tensor.at(2, 0, 0) == 4.0);
  CHECK_FALSE(cfg.cost_model.has_value());

  doc["tensor"] = {{"embed", {{"kind", "aoii"}, {"max_aos", 4}, {"penalty", {{"kind", "exponential"}, {"rate", 0.5}}}}}};
  doc["system"]["environment"] = {{"mode", "derived_age"}, {"cap", 4}};
  cfg = parse_config(doc);
  CHECK(cfg.tensor.n_env() == 5);
  CHECK(cfg.system.env.mode() == EnvMode::derived_age);

  const auto dir = std::filesystem::temp_directory_path() / "gotkit_test_tensor";
  std::filesystem::create_directories(dir);
  save_tensor(dir / "t.json", build_got(reference_cost_model()));
  doc = reference_config_json();
  doc["tensor"] = {{"file", "t.json"}};
  cfg = parse_config(doc, dir);
  CHECK(cfg.tensor == build_got(reference_cost_model()));
  CHECK(cfg.tensor_source == "file:t.json");
}

TEST_CASE("serialization round trips") {
  const auto t = build_got(reference_cost_model());
  CHECK(tensor_from_json(tensor_to_json(t)) == t);
  const GoalTensor odd(2, 1, {0.1, 1.0 / 3.0, 2.0 / 7.0, 1e-300});
  CHECK(tensor_from_json(json::parse(tensor_to_json(odd).dump())) == odd);

  MdpSolution s{1.0 / 3.0, {0.0, 0.7, 2.0 / 9.0}, {Action::idle, Action::sample, Action::idle}, 12, 1e-10};
  const auto back = solution_from_json(json::parse(solution_to_json(s).dump()));
  CHECK(back.gain == s.gain);
  CHECK(back.bias == s.bias);
  CHECK(back.policy == s.policy);
  CHECK_THROWS_AS(solution_from_json(json{{"gain", 1}}), ValidationError);

  const auto cfg = reference_config();
  const auto sim = simulate(cfg.system, cfg.tensor, build_policy(cfg, cfg.policies[0]), {300, 5, 1.0, true});
  std::stringstream ss;
  write_trajectory_csv(ss, sim.trajectory);
  CHECK(read_trajectory_csv(ss) == sim.trajectory);
  std::istringstream bad("t,x\n0,1\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad), ValidationError);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("estimate") {
  const auto e = estimate(std::vector<double>{1, 2, 3, 4});
  CHECK(e.mean == 2.5);
  CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-15));
  CHECK(e.half_width == doctest::Approx(1.96 * e.se).epsilon(1e-15));
  CHECK(e.agrees(2.5 + 2.9 * e.se));
  CHECK_FALSE(e.agrees(2.5 + 3.1 * e.se));
  const auto c = estimate(std::vector<double>{2, 2});
  CHECK(c.se == 0.0);
  CHECK(c.agrees(2.0));
  CHECK_FALSE(c.agrees(2.1));
}

TEST_CASE("comparison report is deterministic and ordered") {
  ExperimentConfig cfg = reference_config();
  cfg.replications = 2;
  cfg.horizon = 3000;
  const auto a = run_compare(cfg);
  const auto b = run_compare(cfg, 4);
  CHECK(report_csv(a) == report_csv(b));
  CHECK(report_json(a).dump() == report_json(b).dump());
  REQUIRE(a.rows.size() == cfg.policies.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].name == cfg.policies[i].label());

  cfg.seed = 2;
  const auto c = run_compare(cfg);
  CHECK(report_csv(a) != report_csv(c));
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].exact.average_cost == c.rows[i].exact.average_cost);
    CHECK(a.rows[i].exact.sample_rate == c.rows[i].exact.sample_rate);
  }
  const auto lines = lines_of(report_csv(a));
  CHECK(lines.size() == 1 + cfg.policies.size());
  CHECK(split(lines[0]).size() == split(lines[1]).size());
}

TEST_CASE("reference comparison ordering") {
  const auto cfg = reference_config();
  std::vector<ExactResult> ex;
  for (const auto& s : cfg.policies) ex.push_back(exact_average(cfg.system, cfg.tensor, build_policy(cfg, s), cfg.lambda));
  const auto& best = ex.back();
  REQUIRE(cfg.policies.back().kind == PolicyKind::optimal_got);
  for (std::size_t i = 0; i + 1 < ex.size(); ++i) {
    CHECK(best.average_cost <= ex[i].average_cost);
    CHECK(best.sample_rate <= ex[i].sample_rate);
  }
}

TEST_CASE("time series output") {
  ExperimentConfig cfg = reference_config();
  std::ostringstream os;
  run_timeseries(cfg, build_policy(cfg, cfg.policies[0]), os, 250);
  const auto lines = lines_of(os.str());
  CHECK(lines[0] == "t,x,x_hat,instant_cost,sampled,delivered,cum_avg_cost");
  CHECK(lines.size() == 251);

  // Always sampling on a lossless channel: diagonal cost plus lambda in every slot.
  cfg.system.channel.epsilon = 0.0;
  PolicySpec always;
  always.kind = PolicyKind::uniform;
  always.period = 1;
  std::ostringstream os2;
  run_timeseries(cfg, build_policy(cfg, always), os2, 500);
  const auto l2 = lines_of(os2.str());
  for (std::size_t i = 1; i < l2.size(); ++i) {
    const auto f = split(l2[i]);
    const std::size_t x = std::stoul(f[1]);
    CHECK(f[1] == f[2]);
    CHECK(std::stod(f[3]) == cfg.tensor.at(x, x, 0) + cfg.lambda);
  }
}

TEST_CASE("never-sample running average approaches the exact value") {
  ExperimentConfig cfg = reference_config();
  PolicySpec never;
  never.kind = PolicyKind::never;
  const Policy p = build_policy(cfg, never);
  const double exact = exact_average(cfg.system, cfg.tensor, p, cfg.lambda).average_cost;
  std::ostringstream os;
  run_timeseries(cfg, p, os, 200000);
  const auto lines = lines_of(os.str());
  const double final_avg = std::stod(split(lines.back())[6]);
  CHECK(std::abs(final_avg - exact) <= 0.05 * exact);
  for (std::size_t i = 2; i < lines.size(); ++i) CHECK(split(lines[i])[4] == "0");
}

TEST_CASE("tensor and solve reports") {
  const auto cfg = reference_config();
  const auto rep = tensor_report_json(cfg);
  CHECK(rep["diagonally_symmetric"] == false);
  CHECK(rep["step5"]["identical"] == false);
  CHECK(rep["step5"]["differences"].size() == 1);
  CHECK(rep["step5"]["differences"][0]["literal"] == 8.0);

  const auto sol = solve_report_json(cfg, find_policy(cfg, "optimal_got"));
  CHECK(sol["policy"] == json({0, 1, 1, 1, 0, 0, 1, 1, 0}));
  CHECK(sol["states"].size() == 9);
  CHECK_THROWS_AS(solve_report_json(cfg, find_policy(cfg, "uniform")), ValidationError);
  CHECK_THROWS_AS(find_policy(cfg, "missing"), ValidationError);
}

TEST_CASE("random instances respect the size bound") {
  Rng rng(41);
  for (int k = 0; k < 50; ++k) {
    const auto inst = random_instance(rng, 12);
    const auto m = compile_sampling_mdp(inst.system, inst.tensor, inst.lambda);
    CHECK(m.n_states <= 12);
    CHECK(inst.system.channel.epsilon <= 0.9);
  }
}

TEST_CASE("selfcheck") {
  const auto clean = run_selfcheck();
  for (const auto& r : clean) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.passed);
  }
  SelfcheckOptions opts;
  opts.inject_asymmetry = true;
  const auto faulty = run_selfcheck(opts);
  std::size_t failed = 0;
  for (const auto& r : faulty)
    if (!r.passed) {
      ++failed;
      CHECK(r.name == "mse_tensor_reductions");
    }
  CHECK(failed == 1);
  const auto table = lines_of(selfcheck_table(faulty));
  CHECK(table[0] == "check,status,detail");
  CHECK(table.size() == faulty.size() + 1);
}
