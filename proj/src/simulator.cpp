#include "got/simulator.hpp"

#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "got/error.hpp"
#include "got/markov_chain.hpp"

namespace got {

SimResult simulate(const SystemModel& sys, const GoalTensor& tensor, const Policy& policy, const SimConfig& cfg) {
  sys.validate_against(tensor);
  if (cfg.horizon == 0) throw ValidationError("simulate: horizon must be >= 1");
  if (!(cfg.lambda >= 0.0)) throw ValidationError("simulate: lambda must be >= 0");

  SimResult res;
  if (cfg.record_trajectory) {
    res.trajectory.reserve(cfg.horizon);
    res.slot_costs.reserve(cfg.horizon);
  }
  Rng rng(cfg.seed);
  PolicyState state = policy.initial_state();
  std::size_t x = 0;
  std::size_t x_hat = 0;
  std::size_t phi = sys.env.initial();
  std::uint64_t aoi = 0;
  double total = 0.0;
  double total_tensor = 0.0;

  for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
    const Observation obs{t, x, x_hat, phi, aoi};
    const Action a = policy.decide(state, obs);
    const SlotOutcome out = step(sys, tensor, cfg.lambda, t, x, x_hat, phi, a, rng);
    policy.advance(state, obs);

    total += out.cost;
    total_tensor += out.tensor_cost;
    res.samples += out.record.sampled;
    res.deliveries += out.record.delivered;
    if (cfg.record_trajectory) {
      res.trajectory.push_back(out.record);
      res.slot_costs.push_back(out.cost);
    }
    if (t + 1 < cfg.horizon && x == 0 && out.x_next > 0) ++res.fire_occurrences;

    aoi = (out.record.delivered ? 0 : aoi) + 1;
    x = out.x_next;
    x_hat = out.record.x_hat;
    phi = out.phi_next;
  }
  const auto h = static_cast<double>(cfg.horizon);
  res.average_cost = total / h;
  res.average_tensor_cost = total_tensor / h;
  res.sample_rate = static_cast<double>(res.samples) / h;
  res.delivery_rate = static_cast<double>(res.deliveries) / h;
  return res;
}

namespace {

constexpr std::size_t kNoStatus = std::numeric_limits<std::size_t>::max();

struct ChainKey {
  std::size_t x, x_hat_prev, phi;
  std::uint64_t t, aoi;
  std::size_t previous;

  auto tie() const { return std::tie(x, x_hat_prev, phi, t, aoi, previous); }
  bool operator<(const ChainKey& o) const { return tie() < o.tie(); }
};

ChainKey make_key(const Policy& policy, Observation obs, PolicyState st) {
  policy.canonicalize(obs, st);
  return {obs.x, obs.x_hat_prev, obs.phi, obs.t, obs.aoi, st.previous_source_status.value_or(kNoStatus)};
}

std::string describe(const std::vector<std::vector<std::size_t>>& classes, const std::vector<ChainKey>& keys) {
  std::string s;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    s += k ? "; {" : "{";
    for (std::size_t i = 0; i < classes[k].size() && i < 6; ++i) {
      const auto& key = keys[classes[k][i]];
      s += (i ? ", (" : "(") + std::to_string(key.x) + "," + std::to_string(key.x_hat_prev) + "," +
           std::to_string(key.phi) + ")";
    }
    if (classes[k].size() > 6) s += ", ...";
    s += "}";
  }
  return s;
}

}  // namespace

ExactResult exact_average(const SystemModel& sys, const GoalTensor& tensor, const Policy& policy, double lambda,
                          std::size_t max_states) {
  sys.validate_against(tensor);
  if (!(lambda >= 0.0)) throw ValidationError("exact_average: lambda must be >= 0");
  const double eps = sys.channel.epsilon;

  std::map<ChainKey, std::size_t> index;
  std::vector<ChainKey> keys;
  std::vector<PolicyState> states;
  TransitionRows rows;
  std::vector<double> cost, tensor_cost, rate, delivery, fire;

  auto intern = [&](const ChainKey& key, const PolicyState& st) {
    auto [it, fresh] = index.emplace(key, keys.size());
    if (fresh) {
      if (keys.size() >= max_states) {
        throw SolverError("exact_average: induced chain exceeds " + std::to_string(max_states) + " states");
      }
      keys.push_back(key);
      states.push_back(st);
    }
    return it->second;
  };

  {
    Observation obs0{0, 0, 0, sys.env.initial(), 0};
    PolicyState st0 = policy.initial_state();
    policy.canonicalize(obs0, st0);
    intern(make_key(policy, obs0, st0), st0);
  }

  for (std::size_t i = 0; i < keys.size(); ++i) {
    const ChainKey key = keys[i];
    const PolicyState st = states[i];
    const Observation obs{key.t, key.x, key.x_hat_prev, key.phi, key.aoi};
    const Action a = policy.decide(st, obs);
    const bool sample = a == Action::sample;

    SparseRow row;
    double c = 0.0, f = 0.0;
    PolicyState st_next = st;
    policy.advance(st_next, obs);

    struct Branch {
      double weight;
      bool delivered;
    };
    std::vector<Branch> branches;
    if (sample && eps < 1.0) branches.push_back({1.0 - eps, true});
    if (!sample || eps > 0.0) branches.push_back({sample ? eps : 1.0, false});

    for (const auto& br : branches) {
      const std::size_t x_hat = br.delivered ? key.x : key.x_hat_prev;
      const std::size_t phi_now = sys.env.in_slot(key.phi, br.delivered);
      c += br.weight * tensor(key.x, x_hat, phi_now);
      const std::uint64_t aoi_next = (br.delivered ? 0 : key.aoi) + 1;
      const auto kernel = sys.source.row(sys.decision(x_hat), key.x);
      for (std::size_t y = 0; y < kernel.size(); ++y) {
        if (kernel[y] <= 0.0) continue;
        if (key.x == 0 && y > 0) f += br.weight * kernel[y];
        sys.env.successors(phi_now, y, x_hat, [&](std::size_t phi_next, double q) {
          const Observation next{key.t + 1, y, x_hat, phi_next, aoi_next};
          const std::size_t to = intern(make_key(policy, next, st_next), st_next);
          const double p = br.weight * kernel[y] * q;
          for (auto& tr : row) {
            if (tr.to == to) {
              tr.prob += p;
              return;
            }
          }
          row.push_back({to, p});
        });
      }
    }
    rows.push_back(std::move(row));
    tensor_cost.push_back(c);
    cost.push_back(c + (sample ? lambda : 0.0));
    rate.push_back(sample ? 1.0 : 0.0);
    delivery.push_back(sample ? 1.0 - eps : 0.0);
    fire.push_back(f);
  }

  const auto classes = closed_classes(rows, 0);
  if (classes.size() != 1) {
    throw MultichainError("exact_average: policy " + policy.label() + " induces " +
                          std::to_string(classes.size()) + " recurrent classes " + describe(classes, keys));
  }
  const auto pi = class_stationary(rows, classes.front());

  ExactResult r;
  r.chain_states = keys.size();
  for (std::size_t s = 0; s < keys.size(); ++s) {
    r.average_cost += pi[s] * cost[s];
    r.tensor_cost += pi[s] * tensor_cost[s];
    r.sample_rate += pi[s] * rate[s];
    r.delivery_rate += pi[s] * delivery[s];
    r.fire_rate += pi[s] * fire[s];
  }
  return r;
}

std::uint64_t fire_occurrence_count(const Trajectory& traj) {
  std::uint64_t n = 0;
  for (std::size_t t = 1; t < traj.size(); ++t)
    if (traj[t - 1].x == 0 && traj[t].x > 0) ++n;
  return n;
}

}  // namespace got
