#pragma once

// The monitored loop: a decision-controlled Markov source, an environment
// process, an erasure channel with same-slot feedback, and the actuator map.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "got/goal_tensor.hpp"
#include "got/metrics.hpp"
#include "got/rng.hpp"

namespace got {

enum class Action : std::uint8_t { idle = 0, sample = 1 };

/// One row-stochastic |S| x |S| kernel per decision.
class SourceModel {
 public:
  /// Single status, single decision.
  SourceModel() : SourceModel(1, 1, {{1.0}}) {}
  /// kernels[d] is row-major: kernels[d][x * |S| + y] = P_d(y | x).
  /// Rows must sum to 1 within 1e-12.
  SourceModel(std::size_t n_status, std::size_t n_decisions, std::vector<std::vector<double>> kernels);

  [[nodiscard]] std::size_t n_status() const noexcept { return n_status_; }
  [[nodiscard]] std::size_t n_decisions() const noexcept { return n_decisions_; }
  [[nodiscard]] std::span<const double> row(std::size_t d, std::size_t x) const {
    return std::span<const double>(kernels_[d]).subspan(x * n_status_, n_status_);
  }
  [[nodiscard]] double prob(std::size_t d, std::size_t x, std::size_t y) const {
    return kernels_[d][x * n_status_ + y];
  }

 private:
  std::size_t n_status_;
  std::size_t n_decisions_;
  std::vector<std::vector<double>> kernels_;
};

enum class EnvMode { constant, markov, derived_age };

/// Environment status process.
///   constant     phi stays at `value` for ever
///   markov       phi' ~ Q(phi, .), starting from phi = 0
///   derived_age  phi is the AoS truncated at `cap`, so |V| = cap + 1
class EnvModel {
 public:
  EnvModel() : EnvModel(EnvMode::constant, 1, 0, {}) {}
  static EnvModel constant(std::size_t n_env = 1, std::size_t value = 0);
  static EnvModel markov(std::size_t n_env, std::vector<double> q);
  static EnvModel derived_age(std::size_t cap = kDefaultAgeCap);

  [[nodiscard]] EnvMode mode() const noexcept { return mode_; }
  /// Size of the tensor's environment axis.
  [[nodiscard]] std::size_t n_env() const noexcept { return n_env_; }
  [[nodiscard]] std::size_t value() const noexcept { return value_; }
  [[nodiscard]] std::size_t cap() const noexcept { return n_env_ - 1; }
  [[nodiscard]] std::span<const double> q_row(std::size_t phi) const {
    return std::span<const double>(q_).subspan(phi * n_env_, n_env_);
  }
  /// phi at the start of slot 0.
  [[nodiscard]] std::size_t initial() const noexcept { return mode_ == EnvMode::constant ? value_ : 0; }

  /// phi in force for the slot once the delivery outcome is known. Only
  /// derived_age depends on delivery: a delivery synchronizes, so AoS = 0.
  [[nodiscard]] std::size_t in_slot(std::size_t phi_pre, bool delivered) const noexcept {
    return mode_ == EnvMode::derived_age && delivered ? 0 : phi_pre;
  }

  /// Calls emit(phi_next, prob) for each successor of the in-slot phi,
  /// given the next source status and the estimate held after this slot.
  template <class Emit>
  void successors(std::size_t phi, std::size_t x_next, std::size_t x_hat, Emit&& emit) const {
    switch (mode_) {
      case EnvMode::constant: emit(phi, 1.0); break;
      case EnvMode::markov: {
        const auto row = q_row(phi);
        for (std::size_t j = 0; j < n_env_; ++j)
          if (row[j] > 0.0) emit(j, row[j]);
        break;
      }
      case EnvMode::derived_age:
        emit(x_next == x_hat ? 0 : std::min(phi + 1, cap()), 1.0);
        break;
    }
  }

 private:
  EnvModel(EnvMode mode, std::size_t n_env, std::size_t value, std::vector<double> q);

  EnvMode mode_;
  std::size_t n_env_;
  std::size_t value_;
  std::vector<double> q_;
};

/// Each transmitted update is erased independently with probability epsilon.
struct ChannelModel {
  double epsilon = 0.0;
};

struct SystemModel {
  SourceModel source;
  EnvModel env;
  ChannelModel channel;
  std::vector<std::size_t> delta;  ///< decision taken for each estimate

  [[nodiscard]] std::size_t n_status() const noexcept { return source.n_status(); }
  [[nodiscard]] std::size_t decision(std::size_t x_hat) const { return delta[x_hat]; }

  /// Checks delta, epsilon and environment consistency.
  void validate() const;
  /// Additionally checks that the tensor matches |S| and |V|.
  void validate_against(const GoalTensor& tensor) const;
};

struct SlotOutcome {
  SlotRecord record;
  double cost = 0.0;         ///< tensor cost + lambda * sampled
  double tensor_cost = 0.0;  ///< T[x, x_hat, phi]
  std::size_t x_next = 0;
  std::size_t phi_next = 0;
};

/// Runs one slot:
///  1. on sample, deliver with probability 1 - epsilon (one uniform draw);
///     x_hat := x on delivery, else x_hat_prev
///  2. actuate d := delta(x_hat)
///  3. cost := T[x, x_hat, phi] + lambda * [sample]
///  4. x_next ~ P_d(. | x) (one draw), then phi_next (one draw in markov mode)
/// `phi` is the environment state at the start of the slot.
SlotOutcome step(const SystemModel& sys, const GoalTensor& tensor, double lambda, std::uint64_t t,
                 std::size_t x, std::size_t x_hat_prev, std::size_t phi, Action action, Rng& rng);

}  // namespace got
