#include <doctest.h>

#include <cmath>
#include <vector>

#include "got/config.hpp"
#include "got/error.hpp"
#include "got/harness.hpp"
#include "got/mdp.hpp"

using namespace got;

namespace {

MdpModel make_model(std::vector<std::vector<double>> p_idle, std::vector<std::vector<double>> p_sample,
                    std::vector<std::array<double, 2>> cost) {
  MdpModel m;
  m.n_states = cost.size();
  const std::vector<std::vector<double>>* dense[2] = {&p_idle, &p_sample};
  for (std::size_t a = 0; a < 2; ++a) {
    for (const auto& row : *dense[a]) {
      SparseRow r;
      for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] > 0) r.push_back({j, row[j]});
      m.transitions[a].push_back(r);
    }
  }
  m.cost = std::move(cost);
  return m;
}

double dense_prob(const SparseRow& row, std::size_t to) {
  double p = 0;
  for (const auto& t : row)
    if (t.to == to) p += t.prob;
  return p;
}

SystemModel hand_system(double eps) {
  return {SourceModel(2, 2, {{0.9, 0.1, 0.4, 0.6}, {0.7, 0.3, 0.8, 0.2}}), EnvModel::constant(), ChannelModel{eps},
          {0, 1}};
}

// T[x][x_hat] = [[0, 2], [5, 1]]
const GoalTensor kHandTensor(2, 1, {0, 5, 2, 1});

}  // namespace

TEST_CASE("state codec round trip") {
  const StateCodec c(3, EnvModel::derived_age(4));
  CHECK(c.size() == 45);
  for (std::size_t s = 0; s < c.size(); ++s) CHECK(c.encode(c.decode(s)) == s);
  CHECK(c.encode({2, 1, 3}) == (2 * 3 + 1) * 5 + 3);
  const StateCodec k(3, EnvModel::constant(4, 2));
  CHECK(k.size() == 9);
  CHECK(k.decode(4).phi == 2);
  CHECK_THROWS_AS((void)k.encode({0, 0, 1}), ValidationError);
}

TEST_CASE("compiled model matches hand enumeration") {
  const auto m = compile_sampling_mdp(hand_system(0.25), kHandTensor, 0.5);
  const double p_idle[4][4] = {{0.9, 0, 0.1, 0}, {0, 0.7, 0, 0.3}, {0.4, 0, 0.6, 0}, {0, 0.8, 0, 0.2}};
  const double p_sample[4][4] = {
      {0.9, 0, 0.1, 0}, {0.675, 0.175, 0.075, 0.075}, {0.1, 0.6, 0.15, 0.15}, {0, 0.8, 0, 0.2}};
  const double cost[4][2] = {{0, 0.5}, {2, 1}, {5, 2.5}, {1, 1.5}};
  REQUIRE(m.n_states == 4);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(dense_prob(m.transitions[0][s], j) == doctest::Approx(p_idle[s][j]).epsilon(1e-15));
      CHECK(dense_prob(m.transitions[1][s], j) == doctest::Approx(p_sample[s][j]).epsilon(1e-15));
    }
    CHECK(m.cost[s][0] == doctest::Approx(cost[s][0]).epsilon(1e-15));
    CHECK(m.cost[s][1] == doctest::Approx(cost[s][1]).epsilon(1e-15));
  }
  const auto bf = brute_force_optimal(m);
  CHECK(bf.gain == doctest::Approx(0.3769470404984412).epsilon(1e-12));
  CHECK(bf.policy == std::vector<Action>{Action::idle, Action::sample, Action::sample, Action::idle});
  const auto sol = rvi_solve(m);
  CHECK(std::abs(sol.gain - bf.gain) < 1e-8);
  CHECK(sol.policy == bf.policy);
}

TEST_CASE("compiled model channel extremes") {
  const auto lossless = compile_sampling_mdp(hand_system(0.0), kHandTensor, 0.7);
  const StateCodec codec(2, EnvModel::constant());
  for (std::size_t s = 0; s < 4; ++s) {
    const auto st = codec.decode(s);
    CHECK(lossless.cost[s][1] == doctest::Approx(0.7 + kHandTensor.at(st.x, st.x, 0)).epsilon(1e-15));
  }
  const auto lossy = compile_sampling_mdp(hand_system(1.0), kHandTensor, 0.7);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(dense_prob(lossy.transitions[0][s], j) == dense_prob(lossy.transitions[1][s], j));
    CHECK(lossy.cost[s][1] - lossy.cost[s][0] == doctest::Approx(0.7).epsilon(1e-14));
  }
  CHECK_THROWS_AS(compile_sampling_mdp(hand_system(0.1), kHandTensor, -1.0), ValidationError);
}

TEST_CASE("trivial models") {
  const auto zero = make_model({{0.5, 0.5}, {1, 0}}, {{0, 1}, {0.5, 0.5}}, {{0, 0}, {0, 0}});
  const auto z = rvi_solve(zero);
  CHECK(z.gain == 0.0);
  CHECK(z.policy == std::vector<Action>{Action::idle, Action::idle});

  const auto single = make_model({{1}}, {{1}}, {{3, 5}});
  const auto s = rvi_solve(single);
  CHECK(s.gain == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.policy == std::vector<Action>{Action::idle});
  const auto bf = brute_force_optimal(make_model({{1}}, {{1}}, {{4, 2}}));
  CHECK(bf.gain == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(bf.policy == std::vector<Action>{Action::sample});
}

TEST_CASE("two-state model with known optimum") {
  const auto m = make_model({{0.5, 0.5}, {0.2, 0.8}}, {{0.9, 0.1}, {0.6, 0.4}}, {{4, 6}, {1, 3}});
  const auto bf = brute_force_optimal(m);
  CHECK(bf.gain == doctest::Approx(1.8571428571428577).epsilon(1e-12));
  CHECK(bf.policy == std::vector<Action>{Action::idle, Action::idle});
}

TEST_CASE("policy evaluation on a deterministic cycle") {
  const std::vector<double> c{1, 7, 4, 2};
  std::vector<std::vector<double>> p(4, std::vector<double>(4, 0));
  std::vector<std::array<double, 2>> cost;
  for (std::size_t i = 0; i < 4; ++i) {
    p[i][(i + 1) % 4] = 1;
    cost.push_back({c[i], c[i]});
  }
  const auto m = make_model(p, p, cost);
  const std::vector<Action> idle(4, Action::idle);
  const auto ev = policy_evaluate(m, idle);
  CHECK(ev.gain == doctest::Approx(3.5).epsilon(1e-12));
  for (double d : ev.distribution) CHECK(d >= 0.0);
  CHECK(sampling_frequency(ev, idle) == 0.0);

  RviConfig cfg;
  cfg.aperiodicity = 0.5;
  CHECK(rvi_solve(m, cfg).gain == doctest::Approx(3.5).epsilon(1e-8));
  cfg.aperiodicity = 0.0;
  CHECK_THROWS_AS(rvi_solve(m, cfg), ValidationError);
  cfg = {};
  cfg.max_iter = 50;
  CHECK_THROWS_AS(rvi_solve(m, cfg), SolverError);
}

TEST_CASE("model validation") {
  auto m = make_model({{0.5, 0.4}, {1, 0}}, {{0, 1}, {1, 0}}, {{0, 0}, {0, 0}});
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = make_model({{1, 0}, {1, 0}}, {{0, 1}, {1, 0}}, {{0, std::nan("")}, {0, 0}});
  CHECK_THROWS_AS(m.validate(), SolverError);
}

TEST_CASE("reference optimum and lambda sweep match the scenario oracle") {
  ExperimentConfig cfg = reference_config();
  const auto m = compile_sampling_mdp(cfg.system, cfg.tensor, 1.0);
  const auto sol = rvi_solve(m);
  const std::vector<int> expect{0, 1, 1, 1, 0, 0, 1, 1, 0};
  for (std::size_t s = 0; s < 9; ++s) CHECK(static_cast<int>(sol.policy[s]) == expect[s]);
  CHECK(sol.gain == doctest::Approx(3.9296727777267115).epsilon(1e-9));
  CHECK(sol.bias[0] == 0.0);

  const auto mmse = compile_sampling_mdp(cfg.system, embed_mse(cfg.embedding, 1), 1.0);
  const std::vector<int> expect_mmse{0, 1, 1, 1, 0, 1, 1, 1, 0};
  const auto ms = rvi_solve(mmse);
  for (std::size_t s = 0; s < 9; ++s) CHECK(static_cast<int>(ms.policy[s]) == expect_mmse[s]);

  const double lambdas[] = {0, 0.5, 1, 2, 5};
  const double gains[] = {3.8240399897119248, 3.8768563837193182, 3.9296727777267115, 4.0353055657414982,
                          4.3522039297858583};
  double prev_gain = -1, prev_rate = 2;
  for (int i = 0; i < 5; ++i) {
    const auto mi = compile_sampling_mdp(cfg.system, cfg.tensor, lambdas[i]);
    const auto si = rvi_solve(mi);
    const auto ev = policy_evaluate(mi, si.policy);
    CHECK(ev.gain == doctest::Approx(gains[i]).epsilon(1e-12));
    const double rate = sampling_frequency(ev, si.policy);
    CHECK(rate == doctest::Approx(0.10563278801478709).epsilon(1e-10));
    CHECK(ev.gain >= prev_gain);
    CHECK(rate <= prev_rate + 1e-12);
    prev_gain = ev.gain;
    prev_rate = rate;
  }
}

TEST_CASE("brute force limits") {
  MdpModel m;
  m.n_states = 21;
  for (std::size_t s = 0; s < 21; ++s) {
    m.transitions[0].push_back({{s, 1.0}});
    m.transitions[1].push_back({{s, 1.0}});
    m.cost.push_back({0, 0});
  }
  CHECK_THROWS_AS(brute_force_optimal(m), SolverError);
}
