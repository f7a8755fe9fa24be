#pragma once

// Monte-Carlo simulation of the sampling loop and its exact long-run
// counterpart on the induced Markov chain.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "got/goal_tensor.hpp"
#include "got/metrics.hpp"
#include "got/policies.hpp"
#include "got/system.hpp"

namespace got {

struct SimConfig {
  std::uint64_t horizon = 100'000;
  std::uint64_t seed = 0;
  double lambda = 0.0;             ///< cost per transmission
  bool record_trajectory = true;   ///< keep per-slot records and costs
};

struct SimResult {
  Trajectory trajectory;           ///< empty unless recorded
  std::vector<double> slot_costs;  ///< empty unless recorded; includes lambda
  double average_cost = 0.0;       ///< tensor cost + lambda * rate
  double average_tensor_cost = 0.0;
  double sample_rate = 0.0;
  double delivery_rate = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t fire_occurrences = 0;
};

/// Runs `cfg.horizon` slots from the synchronized state x = x_hat = 0 with
/// a generator seeded by `cfg.seed`. Identical inputs give identical results.
SimResult simulate(const SystemModel& sys, const GoalTensor& tensor, const Policy& policy, const SimConfig& cfg);

struct ExactResult {
  double average_cost = 0.0;  ///< includes lambda * sample_rate
  double tensor_cost = 0.0;
  double sample_rate = 0.0;
  double delivery_rate = 0.0;
  double fire_rate = 0.0;     ///< expected ignitions (0 -> >0 transitions) per slot
  std::size_t chain_states = 0;
};

/// Long-run averages of `policy` from the stationary distribution of the
/// induced chain over (x, x_hat_prev, phi, policy memory), built by
/// enumerating the states reachable from the initial one. Throws
/// MultichainError naming the closed classes if there is more than one,
/// and SolverError if the chain exceeds `max_states`.
ExactResult exact_average(const SystemModel& sys, const GoalTensor& tensor, const Policy& policy, double lambda,
                          std::size_t max_states = 2'000'000);

/// Slots t > 0 with x(t-1) = 0 and x(t) > 0.
std::uint64_t fire_occurrence_count(const Trajectory& traj);

}  // namespace got
