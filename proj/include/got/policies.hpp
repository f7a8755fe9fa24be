#pragma once

// Sampling policies consumed by the simulator and the exact evaluator.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "got/goal_tensor.hpp"
#include "got/mdp.hpp"
#include "got/system.hpp"

namespace got {

enum class PolicyKind {
  uniform,       ///< sample iff t mod period == 0
  age_aware,     ///< sample iff AoI >= threshold
  change_aware,  ///< sample at t = 0 and whenever x(t) != x(t-1)
  optimal_mmse,  ///< MDP-optimal for the squared-error tensor
  optimal_aoii,  ///< sample iff x != x_hat_prev
  optimal_got,   ///< MDP-optimal for the scenario tensor
  never,         ///< never samples (baseline)
};

std::string_view to_string(PolicyKind kind);
/// Parses the names printed by to_string; throws ValidationError otherwise.
PolicyKind parse_policy_kind(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::uniform;
  std::size_t period = 5;     ///< uniform
  std::size_t threshold = 5;  ///< age_aware
  std::string name;           ///< report label; defaults to to_string(kind)
  std::optional<std::string> solution_file;  ///< cached MdpSolution for optimal_mmse / optimal_got

  [[nodiscard]] std::string label() const { return name.empty() ? std::string(to_string(kind)) : name; }
};

/// What a policy sees at the start of slot t, before sampling.
struct Observation {
  std::uint64_t t = 0;
  std::size_t x = 0;
  std::size_t x_hat_prev = 0;
  std::size_t phi = 0;      ///< environment state at the start of the slot
  std::uint64_t aoi = 0;    ///< AoI if nothing is delivered in this slot
};

/// Per-run mutable memory; owned by a single simulation.
struct PolicyState {
  std::optional<std::size_t> previous_source_status;

  friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

/// Tensors the optimal policies are compiled against.
struct TensorContext {
  const GoalTensor* got = nullptr;  ///< scenario tensor
  std::vector<double> embedding;    ///< numeric status values for the MSE tensor
};

/// Immutable, reusable decision rule.
class Policy {
 public:
  [[nodiscard]] PolicyKind kind() const noexcept { return spec_.kind; }
  [[nodiscard]] const PolicySpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::string label() const { return spec_.label(); }

  [[nodiscard]] PolicyState initial_state() const { return {}; }
  /// Throws ValidationError if an optimal kind has no compiled solution.
  [[nodiscard]] Action decide(const PolicyState& state, const Observation& obs) const;
  /// Records the slot just decided.
  void advance(PolicyState& state, const Observation& obs) const;

  /// Maps (obs, state) onto a representative with the same present and future
  /// decisions: t, aoi and memory are collapsed to what this kind reads. Used
  /// to keep exact evaluation on a finite chain.
  void canonicalize(Observation& obs, PolicyState& state) const;

  /// Compiled solution for optimal_mmse / optimal_got, else null.
  [[nodiscard]] const MdpSolution* solution() const noexcept { return solution_.get(); }

  /// Rule-based policy; throws ValidationError for optimal_mmse / optimal_got
  /// or non-positive parameters.
  static Policy rule(const PolicySpec& spec);
  /// Table policy over compiled MDP states.
  static Policy compiled(const PolicySpec& spec, const StateCodec& codec, MdpSolution solution);

 private:
  explicit Policy(PolicySpec spec) : spec_(std::move(spec)) {}

  PolicySpec spec_;
  std::shared_ptr<const MdpSolution> solution_;
  std::optional<StateCodec> codec_;
};

/// Builds a ready policy. Optimal MMSE compiles the squared-error tensor on
/// `ctx.embedding`; Optimal GoT compiles `*ctx.got`; both are solved with
/// relative value iteration at sampling cost `lambda`. A preloaded
/// solution, when given, replaces the solve after a size check.
Policy make_policy(const PolicySpec& spec, const SystemModel& sys, const TensorContext& ctx, double lambda,
                   const RviConfig& rvi = {}, std::optional<MdpSolution> cached = std::nullopt);

/// The tensor an optimal kind is compiled against (MSE or GoT).
GoalTensor objective_tensor(PolicyKind kind, const SystemModel& sys, const TensorContext& ctx);

}  // namespace got
