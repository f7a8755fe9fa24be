#pragma once

// Finite Markov chains stored as sparse transition rows.

#include <cstddef>
#include <span>
#include <vector>

namespace got {

struct Transition {
  std::size_t to = 0;
  double prob = 0.0;
};

using SparseRow = std::vector<Transition>;
using TransitionRows = std::vector<SparseRow>;

/// States reachable from `start` (including it), in ascending order.
std::vector<std::size_t> reachable_from(const TransitionRows& rows, std::size_t start);

/// Closed communicating classes among the states reachable from `start`.
/// Each class is sorted; classes are ordered by their smallest member.
std::vector<std::vector<std::size_t>> closed_classes(const TransitionRows& rows, std::size_t start);

/// Stationary distribution of the chain restricted to one closed class,
/// returned over all rows.size() states (zero outside the class).
std::vector<double> class_stationary(const TransitionRows& rows, std::span<const std::size_t> cls);

/// Stationary distribution of the chain seen from `start`. Throws
/// MultichainError, listing the classes, when more than one closed class
/// is reachable.
std::vector<double> unichain_stationary(const TransitionRows& rows, std::size_t start);

/// Probability of eventual absorption into each of `classes` from `start`.
std::vector<double> absorption_probabilities(const TransitionRows& rows, std::size_t start,
                                             const std::vector<std::vector<std::size_t>>& classes);

/// Long-run average of `cost` from `start`: each reachable closed class
/// contributes its stationary average weighted by its absorption probability.
double average_cost_from(const TransitionRows& rows, std::span<const double> cost, std::size_t start);

}  // namespace got
