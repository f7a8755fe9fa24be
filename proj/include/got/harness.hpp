#pragma once

// Experiment runner: policy comparison, per-slot time series, tensor
// classification reports and the built-in self-check suite.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "got/config.hpp"
#include "got/mdp.hpp"
#include "got/policies.hpp"
#include "got/rng.hpp"
#include "got/simulator.hpp"

namespace got {

/// Sample mean over replications with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;          ///< sample standard deviation / sqrt(R); 0 when R = 1
  double half_width = 0.0;  ///< 1.96 * se

  /// |value - mean| <= k * se, with a 1e-12 relative floor when se is 0.
  [[nodiscard]] bool agrees(double value, double k = 3.0) const;
};

Estimate estimate(std::span<const double> samples);

struct PolicyRow {
  std::string name;
  PolicyKind kind = PolicyKind::uniform;
  ExactResult exact;
  Estimate loss;         ///< includes lambda * rate
  Estimate tensor_loss;
  Estimate rate;
  Estimate fires;        ///< ignitions per replication
  bool loss_consistent = false;  ///< exact loss within 3 SE of the Monte-Carlo mean
  bool rate_consistent = false;
};

struct ComparisonReport {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  std::size_t replications = 0;
  std::vector<PolicyRow> rows;  ///< config order
};

/// Builds one configured policy, loading a cached solution when the spec names one.
Policy build_policy(const ExperimentConfig& cfg, const PolicySpec& spec);

/// Policy spec whose label or kind name equals `name`; throws ValidationError if none.
const PolicySpec& find_policy(const ExperimentConfig& cfg, std::string_view name);

/// For every configured policy: exact averages plus `cfg.replications`
/// simulations seeded with replication_seed(cfg.seed, r). Replications may
/// run on up to `threads` threads; results do not depend on scheduling.
ComparisonReport run_compare(const ExperimentConfig& cfg, unsigned threads = 1);

/// One line per policy, floats at 17 significant digits.
std::string report_csv(const ComparisonReport& report);
nlohmann::json report_json(const ComparisonReport& report);

/// CSV `t,x,x_hat,instant_cost,sampled,delivered,cum_avg_cost` for replication 0.
void run_timeseries(const ExperimentConfig& cfg, const Policy& policy, std::ostream& os,
                    std::optional<std::uint64_t> horizon = std::nullopt);

/// Structure report of the configured tensor; includes the intent/literal
/// comparison when the tensor came from a cost model.
nlohmann::json tensor_report_json(const ExperimentConfig& cfg, double tol = 1e-9);

/// MdpSolution plus decoded states and the settings it was solved with.
nlohmann::json solve_report_json(const ExperimentConfig& cfg, const PolicySpec& spec);

/// A small compiled sampling problem with random kernels, tensor, epsilon and lambda.
struct RandomInstance {
  SystemModel system;
  GoalTensor tensor;
  double lambda = 0.0;
};

/// |S|^2 * E <= max_states with E environment states in the MDP (max_states >= 4).
RandomInstance random_instance(Rng& rng, std::size_t max_states);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelfcheckOptions {
  std::uint64_t seed = 1;
  bool inject_asymmetry = false;  ///< corrupt the symmetric fixture to exercise the failure path
};

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opts = {});

/// `check,status,detail` lines.
std::string selfcheck_table(std::span<const CheckResult> results);

}  // namespace got
