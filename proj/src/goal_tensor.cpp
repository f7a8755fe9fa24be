#include "got/goal_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "got/error.hpp"

namespace got {

namespace {

std::string triple(std::size_t x, std::size_t xh, std::size_t phi) {
  return "(" + std::to_string(x) + ", " + std::to_string(xh) + ", " + std::to_string(phi) + ")";
}

void require_tol(double tol) {
  if (!(tol >= 0.0) || !std::isfinite(tol)) throw ValidationError("tolerance must be finite and >= 0");
}

}  // namespace

GoalTensor::GoalTensor() : n_status_(1), n_env_(1), values_(1, 0.0) {}

GoalTensor::GoalTensor(std::size_t n_status, std::size_t n_env, std::vector<double> values)
    : n_status_(n_status), n_env_(n_env), values_(std::move(values)) {
  if (n_status_ == 0 || n_env_ == 0) throw ValidationError("tensor: dimensions must be positive");
  if (values_.size() != n_status_ * n_status_ * n_env_) {
    throw ValidationError("tensor: " + std::to_string(values_.size()) + " values for dims [" +
                          std::to_string(n_status_) + ", " + std::to_string(n_status_) + ", " +
                          std::to_string(n_env_) + "]");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      const std::size_t x = i % n_status_;
      const std::size_t xh = (i / n_status_) % n_status_;
      const std::size_t phi = i / (n_status_ * n_status_);
      throw ValidationError("tensor: entry " + triple(x, xh, phi) + " = " +
                            std::to_string(values_[i]) + " is not finite and >= 0");
    }
  }
}

double GoalTensor::at(std::size_t x, std::size_t x_hat, std::size_t phi) const {
  if (x >= n_status_ || x_hat >= n_status_ || phi >= n_env_) {
    throw ValidationError("tensor: index " + triple(x, x_hat, phi) + " out of range");
  }
  return (*this)(x, x_hat, phi);
}

double GoalTensor::at_saturating(std::size_t x, std::size_t x_hat, std::size_t phi) const {
  return at(x, x_hat, std::min(phi, n_env_ - 1));
}

std::span<const double> GoalTensor::slice(std::size_t phi) const {
  if (phi >= n_env_) throw ValidationError("tensor: slice " + std::to_string(phi) + " out of range");
  const std::size_t n = n_status_ * n_status_;
  return std::span<const double>(values_).subspan(phi * n, n);
}

double GoalTensor::max_entry() const noexcept {
  return *std::max_element(values_.begin(), values_.end());
}

void CostModel::validate() const {
  if (n_status == 0 || n_env == 0 || n_decisions == 0) {
    throw ValidationError("cost model: dimensions must be positive");
  }
  if (c1.size() != n_status * n_env) throw ValidationError("cost model: c1 must have |S|*|V| entries");
  if (c2.size() != n_status * n_env * n_decisions) {
    throw ValidationError("cost model: c2 must have |S|*|V|*|D| entries");
  }
  if (c3.size() != n_decisions) throw ValidationError("cost model: c3 must have |D| entries");
  if (delta.size() != n_status) throw ValidationError("cost model: delta must have |S| entries");
  for (std::size_t i = 0; i < c1.size(); ++i) {
    if (!std::isfinite(c1[i]) || c1[i] < 0.0) {
      throw ValidationError("cost model: c1[" + std::to_string(i / n_env) + "][" +
                            std::to_string(i % n_env) + "] must be finite and >= 0");
    }
  }
  for (std::size_t i = 0; i < c2.size(); ++i) {
    if (!std::isfinite(c2[i]) || c2[i] > 0.0) {
      throw ValidationError("cost model: c2 entry " + std::to_string(i) + " must be finite and <= 0");
    }
  }
  for (std::size_t d = 0; d < c3.size(); ++d) {
    if (!std::isfinite(c3[d]) || c3[d] < 0.0) {
      throw ValidationError("cost model: c3[" + std::to_string(d) + "] must be finite and >= 0");
    }
  }
  for (std::size_t x = 0; x < delta.size(); ++x) {
    if (delta[x] >= n_decisions) {
      throw ValidationError("cost model: delta[" + std::to_string(x) + "] = " +
                            std::to_string(delta[x]) + " is not a decision index");
    }
  }
}

GoalTensor build_got(const CostModel& cm, Step5Formula formula) {
  cm.validate();
  std::vector<double> v(cm.n_status * cm.n_status * cm.n_env);
  for (std::size_t phi = 0; phi < cm.n_env; ++phi) {
    for (std::size_t xh = 0; xh < cm.n_status; ++xh) {
      const std::size_t d = cm.delta[xh];
      for (std::size_t x = 0; x < cm.n_status; ++x) {
        const double c1 = cm.status_cost(x, phi);
        const double c2 = cm.decision_gain(x, phi, d);
        const double c3 = cm.decision_cost(d);
        double cost = formula == Step5Formula::intent ? std::max(c1 + c2, 0.0) + c3
                                                      : std::max(c1 + c3, 0.0) + c2;
        if (cost < 0.0) {
          throw ValidationError("cost model: literal formula gives negative cost at " +
                                triple(x, xh, phi));
        }
        v[(phi * cm.n_status + xh) * cm.n_status + x] = cost;
      }
    }
  }
  return {cm.n_status, cm.n_env, std::move(v)};
}

Step5Difference compare_step5(const CostModel& cm) {
  cm.validate();
  Step5Difference diff;
  for (std::size_t phi = 0; phi < cm.n_env; ++phi) {
    for (std::size_t xh = 0; xh < cm.n_status; ++xh) {
      const std::size_t d = cm.delta[xh];
      for (std::size_t x = 0; x < cm.n_status; ++x) {
        const double c1 = cm.status_cost(x, phi);
        const double c2 = cm.decision_gain(x, phi, d);
        const double c3 = cm.decision_cost(d);
        const double a = std::max(c1 + c2, 0.0) + c3;
        const double b = std::max(c1 + c3, 0.0) + c2;
        if (a != b) {
          diff.identical = false;
          diff.max_abs_difference = std::max(diff.max_abs_difference, std::abs(a - b));
          diff.entries.push_back({x, xh, phi, a, b});
        }
      }
    }
  }
  return diff;
}

GoalTensor embed_aoi(std::size_t n_status, std::size_t max_age) {
  return GoalTensor::generate(n_status, max_age + 1,
                              [](std::size_t, std::size_t, std::size_t phi) { return double(phi); });
}

GoalTensor embed_mse(std::span<const double> embedding, std::size_t n_env) {
  if (embedding.empty()) throw ValidationError("embed_mse: status embedding is missing");
  const auto g = ErrorGapFn::squared(embedding);
  return GoalTensor::generate(embedding.size(), n_env,
                              [&](std::size_t x, std::size_t xh, std::size_t) { return g(x, xh); });
}

GoalTensor embed_aoii(const PenaltyFn& f, const ErrorGapFn& g, std::size_t max_aos) {
  std::vector<double> weight(max_aos + 1);
  for (std::size_t a = 0; a <= max_aos; ++a) weight[a] = f(static_cast<double>(a));
  return GoalTensor::generate(g.n_status(), max_aos + 1,
                              [&](std::size_t x, std::size_t xh, std::size_t phi) {
                                return weight[phi] * g(x, xh);
                              });
}

GoalTensor embed_uoi(const EnvWeightFn& w, const ErrorGapFn& g) {
  return GoalTensor::generate(g.n_status(), w.n_env(),
                              [&](std::size_t x, std::size_t xh, std::size_t phi) {
                                return w(phi) * g(x, xh);
                              });
}

bool check_diagonal_symmetry(const GoalTensor& t, double tol) {
  require_tol(tol);
  const double bound = tol * std::max(1.0, t.max_entry());
  const std::size_t n = t.n_status();
  for (std::size_t phi = 0; phi < t.n_env(); ++phi)
    for (std::size_t xh = 0; xh < n; ++xh)
      for (std::size_t x = xh + 1; x < n; ++x)
        if (std::abs(t(x, xh, phi) - t(xh, x, phi)) > bound) return false;
  return true;
}

std::optional<EnvFactorization> check_multiplicative_env(const GoalTensor& t, double tol) {
  require_tol(tol);
  const std::size_t n = t.n_status() * t.n_status();
  const double peak = t.max_entry();
  EnvFactorization out;
  if (peak == 0.0) {
    out.base_slice.assign(n, 0.0);
    out.coefficients.assign(t.n_env(), 1.0);
    return out;
  }

  for (std::size_t phi = 0; phi < t.n_env(); ++phi) {
    const auto s = t.slice(phi);
    if (*std::max_element(s.begin(), s.end()) == peak) {
      out.base_index = phi;
      break;
    }
  }
  const auto base = t.slice(out.base_index);
  out.base_slice.assign(base.begin(), base.end());

  double base_norm2 = 0.0;
  for (double b : base) base_norm2 += b * b;

  const double bound = tol * peak;
  out.coefficients.resize(t.n_env());
  for (std::size_t phi = 0; phi < t.n_env(); ++phi) {
    const auto s = t.slice(phi);
    double c = 1.0;
    if (phi != out.base_index) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += s[i] * base[i];
      c = dot / base_norm2;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(s[i] - c * base[i]) > bound) return std::nullopt;
    }
    out.coefficients[phi] = c;
  }
  return out;
}

bool check_content_independent(const GoalTensor& t, double tol) {
  require_tol(tol);
  const double bound = tol * std::max(1.0, t.max_entry());
  for (std::size_t phi = 0; phi < t.n_env(); ++phi) {
    const auto s = t.slice(phi);
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    if (*hi - *lo > bound) return false;
  }
  return true;
}

StructureReport classify(const GoalTensor& t, double tol) {
  StructureReport r;
  r.diagonally_symmetric = check_diagonal_symmetry(t, tol);
  r.multiplicative_env = check_multiplicative_env(t, tol);
  r.content_independent = check_content_independent(t, tol);
  return r;
}

}  // namespace got
