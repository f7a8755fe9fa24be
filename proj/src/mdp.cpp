#include "got/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "got/error.hpp"

namespace got {

namespace {

// Accumulates probability mass per target state, keeping first-seen order.
void add_mass(SparseRow& row, std::size_t to, double p) {
  if (p <= 0.0) return;
  for (auto& tr : row) {
    if (tr.to == to) {
      tr.prob += p;
      return;
    }
  }
  row.push_back({to, p});
}

bool prefer_sample(double q_idle, double q_sample) {
  return q_sample < q_idle - 1e-12 * std::max(1.0, std::abs(q_idle));
}

TransitionRows induced_rows(const MdpModel& model, std::span<const Action> policy) {
  TransitionRows rows(model.n_states);
  for (std::size_t s = 0; s < model.n_states; ++s) {
    rows[s] = model.transitions[static_cast<std::size_t>(policy[s])][s];
  }
  return rows;
}

std::vector<double> induced_cost(const MdpModel& model, std::span<const Action> policy) {
  std::vector<double> c(model.n_states);
  for (std::size_t s = 0; s < model.n_states; ++s) c[s] = model.cost[s][static_cast<std::size_t>(policy[s])];
  return c;
}

}  // namespace

StateCodec::StateCodec(std::size_t n_status, const EnvModel& env)
    : n_status_(n_status),
      n_env_states_(env.mode() == EnvMode::constant ? 1 : env.n_env()),
      constant_phi_(env.value()),
      constant_(env.mode() == EnvMode::constant) {}

std::size_t StateCodec::encode(const MdpState& s) const {
  if (s.x >= n_status_ || s.x_hat_prev >= n_status_) throw ValidationError("codec: status out of range");
  std::size_t e = s.phi;
  if (constant_) {
    if (s.phi != constant_phi_) throw ValidationError("codec: phi differs from the constant environment");
    e = 0;
  } else if (e >= n_env_states_) {
    throw ValidationError("codec: phi out of range");
  }
  return (s.x * n_status_ + s.x_hat_prev) * n_env_states_ + e;
}

MdpState StateCodec::decode(std::size_t s) const {
  if (s >= size()) throw ValidationError("codec: state index out of range");
  const std::size_t e = s % n_env_states_;
  const std::size_t rest = s / n_env_states_;
  return {rest / n_status_, rest % n_status_, constant_ ? constant_phi_ : e};
}

void MdpModel::validate() const {
  if (n_states == 0) throw ValidationError("mdp: no states");
  if (cost.size() != n_states) throw ValidationError("mdp: cost table size mismatch");
  if (initial_state >= n_states) throw ValidationError("mdp: initial state out of range");
  for (std::size_t a = 0; a < kNumActions; ++a) {
    if (transitions[a].size() != n_states) throw ValidationError("mdp: transition table size mismatch");
    for (std::size_t s = 0; s < n_states; ++s) {
      double sum = 0.0;
      for (const auto& tr : transitions[a][s]) {
        if (tr.to >= n_states || !(tr.prob >= 0.0)) {
          throw ValidationError("mdp: bad transition from state " + std::to_string(s));
        }
        sum += tr.prob;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        throw ValidationError("mdp: row " + std::to_string(s) + " of action " + std::to_string(a) +
                              " sums to " + std::to_string(sum));
      }
      if (!std::isfinite(cost[s][a])) {
        throw SolverError("mdp: non-finite cost at state " + std::to_string(s));
      }
    }
  }
}

MdpModel compile_sampling_mdp(const SystemModel& sys, const GoalTensor& tensor, double lambda) {
  sys.validate_against(tensor);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("mdp: lambda must be finite and >= 0");

  const StateCodec codec(sys.n_status(), sys.env);
  const double eps = sys.channel.epsilon;
  MdpModel m;
  m.n_states = codec.size();
  m.codec = codec;
  m.initial_state = codec.encode({0, 0, sys.env.initial()});
  m.cost.resize(m.n_states);
  for (auto& rows : m.transitions) rows.resize(m.n_states);

  // Successors of one slot whose estimate after delivery is x_hat and whose
  // in-slot environment index is phi_now, weighted by `w`.
  auto emit_slot = [&](SparseRow& row, std::size_t x, std::size_t x_hat, std::size_t phi_now, double w) {
    const auto kernel = sys.source.row(sys.decision(x_hat), x);
    for (std::size_t y = 0; y < kernel.size(); ++y) {
      if (kernel[y] <= 0.0) continue;
      sys.env.successors(phi_now, y, x_hat, [&](std::size_t phi_next, double q) {
        add_mass(row, codec.encode({y, x_hat, phi_next}), w * kernel[y] * q);
      });
    }
  };

  for (std::size_t s = 0; s < m.n_states; ++s) {
    const auto [x, xhp, phi] = codec.decode(s);
    const std::size_t phi_lost = sys.env.in_slot(phi, false);
    const std::size_t phi_got = sys.env.in_slot(phi, true);

    m.cost[s][0] = tensor(x, xhp, phi_lost);
    m.cost[s][1] = lambda + (1.0 - eps) * tensor(x, x, phi_got) + eps * tensor(x, xhp, phi_lost);

    emit_slot(m.transitions[0][s], x, xhp, phi_lost, 1.0);
    if (eps < 1.0) emit_slot(m.transitions[1][s], x, x, phi_got, 1.0 - eps);
    if (eps > 0.0) emit_slot(m.transitions[1][s], x, xhp, phi_lost, eps);
  }
  return m;
}

MdpSolution rvi_solve(const MdpModel& model, const RviConfig& cfg) {
  model.validate();
  if (!(cfg.span_tol > 0.0)) throw ValidationError("rvi: span_tol must be > 0");
  if (cfg.max_iter == 0) throw ValidationError("rvi: max_iter must be positive");
  if (cfg.reference_state >= model.n_states) throw ValidationError("rvi: reference state out of range");
  if (!(cfg.aperiodicity > 0.0 && cfg.aperiodicity <= 1.0)) {
    throw ValidationError("rvi: aperiodicity weight must lie in (0, 1]");
  }

  const std::size_t n = model.n_states;
  const double tau = cfg.aperiodicity;
  std::vector<double> h(n, 0.0), next(n, 0.0);
  std::vector<Action> greedy(n, Action::idle);
  double span = std::numeric_limits<double>::infinity();

  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t s = 0; s < n; ++s) {
      std::array<double, kNumActions> q{};
      for (std::size_t a = 0; a < kNumActions; ++a) {
        double v = model.cost[s][a];
        for (const auto& tr : model.transitions[a][s]) v += tr.prob * h[tr.to];
        q[a] = v;
      }
      const bool sample = prefer_sample(q[0], q[1]);
      greedy[s] = sample ? Action::sample : Action::idle;
      const double th = sample ? q[1] : q[0];
      next[s] = (1.0 - tau) * h[s] + tau * th;
      const double diff = next[s] - h[s];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    span = hi - lo;
    if (!std::isfinite(span)) throw SolverError("rvi: iteration diverged to a non-finite value");
    if (span <= cfg.span_tol) {
      MdpSolution sol;
      sol.gain = 0.5 * (lo + hi) / tau;
      const double ref = h[cfg.reference_state];
      sol.bias.resize(n);
      for (std::size_t s = 0; s < n; ++s) sol.bias[s] = h[s] - ref;
      sol.policy = greedy;
      sol.iterations = k;
      sol.final_span = span;
      return sol;
    }
    const double ref = next[cfg.reference_state];
    for (std::size_t s = 0; s < n; ++s) h[s] = next[s] - ref;
  }
  throw SolverError("rvi: no convergence after " + std::to_string(cfg.max_iter) +
                    " iterations (final span " + std::to_string(span) + ")");
}

PolicyEvaluation policy_evaluate(const MdpModel& model, std::span<const Action> policy) {
  model.validate();
  if (policy.size() != model.n_states) throw ValidationError("policy_evaluate: policy size mismatch");
  const auto rows = induced_rows(model, policy);
  const auto cost = induced_cost(model, policy);
  PolicyEvaluation out;
  out.distribution = unichain_stationary(rows, model.initial_state);
  for (std::size_t s = 0; s < model.n_states; ++s) out.gain += out.distribution[s] * cost[s];
  return out;
}

double sampling_frequency(const PolicyEvaluation& eval, std::span<const Action> policy) {
  if (policy.size() != eval.distribution.size()) throw ValidationError("sampling_frequency: size mismatch");
  double r = 0.0;
  for (std::size_t s = 0; s < policy.size(); ++s)
    if (policy[s] == Action::sample) r += eval.distribution[s];
  return r;
}

BruteForceResult brute_force_optimal(const MdpModel& model) {
  model.validate();
  const std::size_t n = model.n_states;
  if (n > 20) throw SolverError("brute force: " + std::to_string(n) + " states exceed the 2^20 policy limit");

  BruteForceResult best;
  best.gain = std::numeric_limits<double>::infinity();
  std::vector<Action> policy(n);
  TransitionRows rows(n);
  std::vector<double> cost(n);
  // Mask bit (n - 1 - s) holds the action of state s, so increasing masks
  // enumerate action vectors in lexicographic order.
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (std::size_t s = 0; s < n; ++s) {
      const auto a = static_cast<std::size_t>((mask >> (n - 1 - s)) & 1U);
      policy[s] = static_cast<Action>(a);
      rows[s] = model.transitions[a][s];
      cost[s] = model.cost[s][a];
    }
    const double g = average_cost_from(rows, cost, model.initial_state);
    if (g < best.gain - 1e-12 * std::max(1.0, std::abs(best.gain)) || best.policy.empty()) {
      best.gain = g;
      best.policy = policy;
    }
  }
  return best;
}

}  // namespace got
