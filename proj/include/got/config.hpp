#pragma once

// Experiment configuration: JSON document describing the system, the tensor
// source, the policies to compare and the Monte-Carlo settings.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "got/error.hpp"
#include "got/goal_tensor.hpp"
#include "got/mdp.hpp"
#include "got/policies.hpp"
#include "got/system.hpp"

namespace got {

/// Validation failure located at a field path such as `system.kernels[1][2]`.
class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : ValidationError(field + ": " + message), field_(field) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  SystemModel system;
  std::vector<double> embedding;  ///< numeric status values (default 0..|S|-1)
  GoalTensor tensor;
  std::optional<CostModel> cost_model;  ///< present when the tensor came from one
  Step5Formula formula = Step5Formula::intent;
  std::string tensor_source;  ///< "cost_model", "embed:<kind>" or "file:<path>"
  double lambda = 1.0;
  std::vector<PolicySpec> policies;
  std::uint64_t horizon = 100'000;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;
  std::filesystem::path base_dir;  ///< relative file references resolve here
  RviConfig rvi;

  /// Resolves a config-relative path.
  [[nodiscard]] std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
};

/// Parses and fully validates a config document. Kernel rows within 1e-9
/// of stochastic are renormalized; larger deviations are errors.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads, parses and validates a config file.
ExperimentConfig validate_config(const std::filesystem::path& path);

/// The fire-monitoring reference scenario shipped as configs/reference.json.
nlohmann::json reference_config_json();
ExperimentConfig reference_config();

/// Reference cost model (C1, C2, C3, delta) of the fire scenario.
CostModel reference_cost_model();

}  // namespace got
