#pragma once

// Slotted trajectories and the classical information-importance metrics
// (AoI, VoI, MSE, AoS, AoII, UoI) evaluated over them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace got {

/// One slot of a monitored link. `x_hat` is the receiver's estimate after
/// any delivery in this slot; `phi` is the environment index in effect.
struct SlotRecord {
  std::uint64_t t = 0;
  std::size_t x = 0;
  std::size_t x_hat = 0;
  std::size_t phi = 0;
  bool sampled = false;
  bool delivered = false;

  friend bool operator==(const SlotRecord&, const SlotRecord&) = default;
};

/// Ordered slot records with t = 0, 1, 2, ... and delivered => sampled.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<SlotRecord> records);

  /// Appends a record; throws ValidationError if it breaks contiguity or flag consistency.
  void push_back(const SlotRecord& record);
  void reserve(std::size_t n) { records_.reserve(n); }

  [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
  [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
  const SlotRecord& operator[](std::size_t i) const { return records_[i]; }
  [[nodiscard]] auto begin() const noexcept { return records_.begin(); }
  [[nodiscard]] auto end() const noexcept { return records_.end(); }
  [[nodiscard]] std::span<const SlotRecord> records() const noexcept { return records_; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<SlotRecord> records_;
};

enum class PenaltyKind { linear, exponential, logarithmic };

/// Nondecreasing age penalty with f(0) = 0:
///   linear       f(u) = a*u
///   exponential  f(u) = exp(a*u) - 1
///   logarithmic  f(u) = log(1 + a*u)
class PenaltyFn {
 public:
  PenaltyFn(PenaltyKind kind, double rate);

  static PenaltyFn linear(double rate = 1.0) { return {PenaltyKind::linear, rate}; }
  static PenaltyFn exponential(double rate = 1.0) { return {PenaltyKind::exponential, rate}; }
  static PenaltyFn logarithmic(double rate = 1.0) { return {PenaltyKind::logarithmic, rate}; }

  /// Throws SolverError if the result overflows.
  double operator()(double age) const;

  [[nodiscard]] PenaltyKind kind() const noexcept { return kind_; }
  [[nodiscard]] double rate() const noexcept { return rate_; }

 private:
  PenaltyKind kind_;
  double rate_;
};

/// Error gap g(x, x_hat) stored as an |S| x |S| table, row index x.
/// Zero diagonal, finite nonnegative entries. Symmetry is not required.
class ErrorGapFn {
 public:
  ErrorGapFn(std::size_t n_status, std::vector<double> table);

  /// g(x, y) = [x != y]
  static ErrorGapFn indicator(std::size_t n_status);
  /// g(x, y) = (e(x) - e(y))^2
  static ErrorGapFn squared(std::span<const double> embedding);

  double operator()(std::size_t x, std::size_t x_hat) const;
  [[nodiscard]] std::size_t n_status() const noexcept { return n_; }
  [[nodiscard]] std::span<const double> table() const noexcept { return table_; }

 private:
  std::size_t n_;
  std::vector<double> table_;
};

/// Environment weight Phi(phi), one finite nonnegative entry per environment status.
class EnvWeightFn {
 public:
  explicit EnvWeightFn(std::vector<double> weights);

  double operator()(std::size_t phi) const;
  [[nodiscard]] std::size_t n_env() const noexcept { return weights_.size(); }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

/// AoI(t): slots since generation of the freshest delivered update.
/// AoI(0) = 0; a delivery in slot t gives AoI(t) = 0.
std::vector<std::uint64_t> aoi_process(const Trajectory& traj);

/// AoS(t) = t - max{tau <= t : x(tau) = x_hat(tau)}, or t + 1 if no such tau.
std::vector<std::uint64_t> aos_process(const Trajectory& traj);

std::vector<double> voi(std::span<const std::uint64_t> aoi, const PenaltyFn& f);

/// Squared error on the numeric embedding e of each status.
std::vector<double> mse(const Trajectory& traj, std::span<const double> embedding);

/// f(AoS(t)) * g(x(t), x_hat(t)).
std::vector<double> aoii(const Trajectory& traj, const PenaltyFn& f, const ErrorGapFn& g);

/// Phi(phi(t)) * g(x(t), x_hat(t)).
std::vector<double> uoi(const Trajectory& traj, const EnvWeightFn& w, const ErrorGapFn& g);

/// Arithmetic mean; throws ValidationError on empty input.
double long_run_average(std::span<const double> seq);

}  // namespace got
