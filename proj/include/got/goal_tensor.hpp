#pragma once

// Goal-oriented tensors: a nonnegative cost for every
// (source status x, estimate x_hat, environment status phi) triple.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "got/metrics.hpp"

namespace got {

/// Default truncation cap for age-like environment indices.
inline constexpr std::size_t kDefaultAgeCap = 64;

/// Dense |S| x |S| x |V| tensor, immutable after construction.
///
/// Layout: x varies fastest, then x_hat, then phi:
///   index(x, x_hat, phi) = (phi * |S| + x_hat) * |S| + x
/// so each environment slice is one contiguous |S|*|S| block.
class GoalTensor {
 public:
  /// 1 x 1 x 1 zero tensor.
  GoalTensor();
  GoalTensor(std::size_t n_status, std::size_t n_env, std::vector<double> values);

  /// Fills every entry from fn(x, x_hat, phi).
  template <class Fn>
  static GoalTensor generate(std::size_t n_status, std::size_t n_env, Fn&& fn) {
    std::vector<double> v(n_status * n_status * n_env);
    for (std::size_t phi = 0; phi < n_env; ++phi)
      for (std::size_t xh = 0; xh < n_status; ++xh)
        for (std::size_t x = 0; x < n_status; ++x)
          v[(phi * n_status + xh) * n_status + x] = fn(x, xh, phi);
    return {n_status, n_env, std::move(v)};
  }

  [[nodiscard]] std::size_t n_status() const noexcept { return n_status_; }
  [[nodiscard]] std::size_t n_env() const noexcept { return n_env_; }
  [[nodiscard]] std::array<std::size_t, 3> dims() const noexcept {
    return {n_status_, n_status_, n_env_};
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// Checked lookup; throws ValidationError on an out-of-range index.
  [[nodiscard]] double at(std::size_t x, std::size_t x_hat, std::size_t phi) const;
  /// As `at`, but phi beyond the last slice reads the last slice (age truncation).
  [[nodiscard]] double at_saturating(std::size_t x, std::size_t x_hat, std::size_t phi) const;
  /// Unchecked lookup for hot loops.
  [[nodiscard]] double operator()(std::size_t x, std::size_t x_hat, std::size_t phi) const noexcept {
    return values_[(phi * n_status_ + x_hat) * n_status_ + x];
  }
  /// Slice phi as |S|*|S| values, x fastest.
  [[nodiscard]] std::span<const double> slice(std::size_t phi) const;
  [[nodiscard]] double max_entry() const noexcept;

  friend bool operator==(const GoalTensor&, const GoalTensor&) = default;

 private:
  std::size_t n_status_;
  std::size_t n_env_;
  std::vector<double> values_;
};

/// Status-inherent, decision-gain, and decision-inherent costs plus the
/// estimate-to-decision map.
struct CostModel {
  std::size_t n_status = 0;
  std::size_t n_env = 0;
  std::size_t n_decisions = 0;
  std::vector<double> c1;          ///< [x][phi], >= 0
  std::vector<double> c2;          ///< [x][phi][d], <= 0
  std::vector<double> c3;          ///< [d], >= 0
  std::vector<std::size_t> delta;  ///< decision for each estimate

  [[nodiscard]] double status_cost(std::size_t x, std::size_t phi) const {
    return c1[x * n_env + phi];
  }
  [[nodiscard]] double decision_gain(std::size_t x, std::size_t phi, std::size_t d) const {
    return c2[(x * n_env + phi) * n_decisions + d];
  }
  [[nodiscard]] double decision_cost(std::size_t d) const { return c3[d]; }

  /// Throws ValidationError naming the first violated constraint.
  void validate() const;
};

/// How the three cost tables combine into a tensor entry.
enum class Step5Formula {
  intent,   ///< max(c1 + c2, 0) + c3: mitigation never drives severity below zero
  literal,  ///< max(c1 + c3, 0) + c2: the as-written form, kept for comparison
};

GoalTensor build_got(const CostModel& cm, Step5Formula formula = Step5Formula::intent);

struct Step5Difference {
  bool identical = true;
  double max_abs_difference = 0.0;
  /// (x, x_hat, phi, intent value, literal value) for each differing entry.
  struct Entry {
    std::size_t x, x_hat, phi;
    double intent, literal;
  };
  std::vector<Entry> entries;
};

/// Entry-wise comparison of the two formulas on one cost model.
Step5Difference compare_step5(const CostModel& cm);

/// phi is the truncated AoI: T = phi.
GoalTensor embed_aoi(std::size_t n_status, std::size_t max_age);
/// T = (e(x) - e(x_hat))^2 on every slice.
GoalTensor embed_mse(std::span<const double> embedding, std::size_t n_env);
/// phi is the truncated AoS: T = f(phi) * g(x, x_hat).
GoalTensor embed_aoii(const PenaltyFn& f, const ErrorGapFn& g, std::size_t max_aos);
/// T = Phi(phi) * g(x, x_hat).
GoalTensor embed_uoi(const EnvWeightFn& w, const ErrorGapFn& g);

/// T[:, :, phi] = coefficients[phi] * base_slice.
struct EnvFactorization {
  std::size_t base_index = 0;
  std::vector<double> base_slice;  ///< x fastest, like GoalTensor::slice
  std::vector<double> coefficients;
};

struct StructureReport {
  bool diagonally_symmetric = false;
  std::optional<EnvFactorization> multiplicative_env;
  bool content_independent = false;
};

/// |T[x, y, phi] - T[y, x, phi]| <= tol * max(1, max|T|) everywhere.
bool check_diagonal_symmetry(const GoalTensor& t, double tol);

/// Rank-1 factorization across phi, if one exists within relative tolerance
/// tol * max|T|. The base is the lowest-index slice holding the global
/// maximum, so its coefficient is exactly 1.
std::optional<EnvFactorization> check_multiplicative_env(const GoalTensor& t, double tol);

/// Every slice constant in (x, x_hat) within tol * max(1, max|T|).
bool check_content_independent(const GoalTensor& t, double tol);

StructureReport classify(const GoalTensor& t, double tol);

inline double got_lookup(const GoalTensor& t, std::size_t x, std::size_t x_hat, std::size_t phi) {
  return t.at(x, x_hat, phi);
}

}  // namespace got
