#pragma once

// Average-cost sampling MDP: compilation from a system + tensor, relative
// value iteration, exact policy evaluation and an exhaustive oracle.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "got/goal_tensor.hpp"
#include "got/markov_chain.hpp"
#include "got/system.hpp"

namespace got {

inline constexpr std::size_t kNumActions = 2;

struct MdpState {
  std::size_t x = 0;
  std::size_t x_hat_prev = 0;
  std::size_t phi = 0;

  friend bool operator==(const MdpState&, const MdpState&) = default;
};

/// s = (x * |S| + x_hat_prev) * E + e, where E is the number of environment
/// states carried in the MDP state (1 in constant mode, |V| otherwise).
class StateCodec {
 public:
  StateCodec(std::size_t n_status, const EnvModel& env);

  [[nodiscard]] std::size_t size() const noexcept { return n_status_ * n_status_ * n_env_states_; }
  [[nodiscard]] std::size_t encode(const MdpState& s) const;
  [[nodiscard]] MdpState decode(std::size_t s) const;
  [[nodiscard]] std::size_t n_status() const noexcept { return n_status_; }

 private:
  std::size_t n_status_;
  std::size_t n_env_states_;
  std::size_t constant_phi_;
  bool constant_;
};

struct MdpModel {
  std::size_t n_states = 0;
  std::array<TransitionRows, kNumActions> transitions;  ///< [action][state]
  std::vector<std::array<double, kNumActions>> cost;    ///< [state][action]
  std::optional<StateCodec> codec;
  std::size_t initial_state = 0;

  /// Stochastic rows within 1e-12, finite costs, consistent sizes.
  void validate() const;
};

/// States are (x, x_hat_prev[, phi]) with phi the pre-decision environment
/// state. Per slot:
///   c(s, idle)   = T[x, x_hat_prev, phi]
///   c(s, sample) = lambda + (1 - eps) T[x, x, phi_d] + eps T[x, x_hat_prev, phi]
/// where phi_d is phi after a delivery (0 in derived-age mode, else phi).
/// Idle keeps x_hat_prev and actuates delta(x_hat_prev); a delivered sample
/// moves the estimate to x and actuates delta(x).
MdpModel compile_sampling_mdp(const SystemModel& sys, const GoalTensor& tensor, double lambda);

struct RviConfig {
  double span_tol = 1e-9;
  std::size_t max_iter = 1'000'000;
  std::size_t reference_state = 0;
  /// Aperiodicity transform weight tau in (0, 1]: iterate on
  /// tau * P + (1 - tau) * I. 1 is plain relative value iteration.
  double aperiodicity = 1.0;
};

struct MdpSolution {
  double gain = 0.0;
  std::vector<double> bias;  ///< bias[reference_state] == 0
  std::vector<Action> policy;
  std::size_t iterations = 0;
  double final_span = 0.0;
};

/// Relative value iteration stopped on span(h_{k+1} - h_k) <= span_tol.
/// Greedy ties go to idle. Throws SolverError on non-finite costs or when
/// max_iter is reached (the message carries the final span).
MdpSolution rvi_solve(const MdpModel& model, const RviConfig& cfg = {});

struct PolicyEvaluation {
  double gain = 0.0;
  std::vector<double> distribution;  ///< over all model states
};

/// Exact gain of a deterministic stationary policy on the chain reachable
/// from the initial state. Throws MultichainError if that chain is not unichain.
PolicyEvaluation policy_evaluate(const MdpModel& model, std::span<const Action> policy);

/// Long-run fraction of slots in which `policy` samples, given its distribution.
double sampling_frequency(const PolicyEvaluation& eval, std::span<const Action> policy);

struct BruteForceResult {
  double gain = 0.0;
  std::vector<Action> policy;
};

/// Evaluates all 2^n deterministic stationary policies from the initial
/// state (multichain policies by absorption-weighted class gains) and returns
/// the minimum, lexicographically smallest on ties. Requires n <= 20.
BruteForceResult brute_force_optimal(const MdpModel& model);

}  // namespace got
