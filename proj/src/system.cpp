#include "got/system.hpp"

#include <cmath>
#include <string>

#include "got/error.hpp"

namespace got {

namespace {

void check_stochastic(std::span<const double> m, std::size_t n, const std::string& what) {
  for (std::size_t r = 0; r < n; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double p = m[r * n + c];
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError(what + " row " + std::to_string(r) + ": entry " + std::to_string(c) +
                              " is not a probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ValidationError(what + " row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

}  // namespace

SourceModel::SourceModel(std::size_t n_status, std::size_t n_decisions,
                         std::vector<std::vector<double>> kernels)
    : n_status_(n_status), n_decisions_(n_decisions), kernels_(std::move(kernels)) {
  if (n_status_ == 0 || n_decisions_ == 0) throw ValidationError("source: |S| and |D| must be positive");
  if (kernels_.size() != n_decisions_) {
    throw ValidationError("source: expected " + std::to_string(n_decisions_) + " kernels, got " +
                          std::to_string(kernels_.size()));
  }
  for (std::size_t d = 0; d < n_decisions_; ++d) {
    if (kernels_[d].size() != n_status_ * n_status_) {
      throw ValidationError("source: kernel " + std::to_string(d) + " is not |S| x |S|");
    }
    check_stochastic(kernels_[d], n_status_, "source: kernel " + std::to_string(d));
  }
}

EnvModel::EnvModel(EnvMode mode, std::size_t n_env, std::size_t value, std::vector<double> q)
    : mode_(mode), n_env_(n_env), value_(value), q_(std::move(q)) {}

EnvModel EnvModel::constant(std::size_t n_env, std::size_t value) {
  if (n_env == 0) throw ValidationError("environment: |V| must be positive");
  if (value >= n_env) throw ValidationError("environment: constant value outside [0, |V|)");
  return {EnvMode::constant, n_env, value, {}};
}

EnvModel EnvModel::markov(std::size_t n_env, std::vector<double> q) {
  if (n_env == 0) throw ValidationError("environment: |V| must be positive");
  if (q.size() != n_env * n_env) throw ValidationError("environment: Q must be |V| x |V|");
  check_stochastic(q, n_env, "environment: Q");
  return {EnvMode::markov, n_env, 0, std::move(q)};
}

EnvModel EnvModel::derived_age(std::size_t cap) {
  if (cap < 1) throw ValidationError("environment: derived-age cap must be >= 1");
  return {EnvMode::derived_age, cap + 1, 0, {}};
}

void SystemModel::validate() const {
  if (delta.size() != source.n_status()) {
    throw ValidationError("system: delta has " + std::to_string(delta.size()) + " entries, expected " +
                          std::to_string(source.n_status()));
  }
  for (std::size_t x = 0; x < delta.size(); ++x) {
    if (delta[x] >= source.n_decisions()) {
      throw ValidationError("system: delta[" + std::to_string(x) + "] is not a decision index");
    }
  }
  if (!(channel.epsilon >= 0.0 && channel.epsilon <= 1.0)) {
    throw ValidationError("system: epsilon must lie in [0, 1]");
  }
}

void SystemModel::validate_against(const GoalTensor& tensor) const {
  validate();
  if (tensor.n_status() != source.n_status()) {
    throw ValidationError("system: tensor has |S| = " + std::to_string(tensor.n_status()) +
                          ", source has " + std::to_string(source.n_status()));
  }
  if (tensor.n_env() != env.n_env()) {
    throw ValidationError("system: tensor has |V| = " + std::to_string(tensor.n_env()) +
                          ", environment has " + std::to_string(env.n_env()));
  }
}

SlotOutcome step(const SystemModel& sys, const GoalTensor& tensor, double lambda, std::uint64_t t,
                 std::size_t x, std::size_t x_hat_prev, std::size_t phi, Action action, Rng& rng) {
  const std::size_t n = sys.n_status();
  if (x >= n || x_hat_prev >= n || phi >= sys.env.n_env()) {
    throw ValidationError("step: state index out of range");
  }
  SlotOutcome out;
  const bool sampled = action == Action::sample;
  const bool delivered = sampled && bernoulli(1.0 - sys.channel.epsilon, rng);
  const std::size_t x_hat = delivered ? x : x_hat_prev;
  const std::size_t phi_now = sys.env.in_slot(phi, delivered);
  const std::size_t d = sys.decision(x_hat);

  out.record = {t, x, x_hat, phi_now, sampled, delivered};
  out.tensor_cost = tensor(x, x_hat, phi_now);
  out.cost = out.tensor_cost + (sampled ? lambda : 0.0);
  out.x_next = sample_categorical(sys.source.row(d, x), rng);

  switch (sys.env.mode()) {
    case EnvMode::constant: out.phi_next = phi_now; break;
    case EnvMode::markov: out.phi_next = sample_categorical(sys.env.q_row(phi_now), rng); break;
    case EnvMode::derived_age:
      sys.env.successors(phi_now, out.x_next, x_hat, [&](std::size_t p, double) { out.phi_next = p; });
      break;
  }
  return out;
}

}  // namespace got
