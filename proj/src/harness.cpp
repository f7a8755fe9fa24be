#include "got/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "got/error.hpp"
#include "got/io.hpp"

namespace got {

bool Estimate::agrees(double value, double k) const {
  const double diff = std::abs(value - mean);
  if (se == 0.0) return diff <= 1e-12 * std::max(1.0, std::abs(mean));
  return diff <= k * se;
}

Estimate estimate(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("estimate: no samples");
  Estimate e;
  const auto n = static_cast<double>(samples.size());
  e.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - e.mean) * (v - e.mean);
    e.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  e.half_width = 1.96 * e.se;
  return e;
}

Policy build_policy(const ExperimentConfig& cfg, const PolicySpec& spec) {
  std::optional<MdpSolution> cached;
  if (spec.solution_file) cached = load_solution(cfg.resolve(*spec.solution_file));
  const TensorContext ctx{&cfg.tensor, cfg.embedding};
  return make_policy(spec, cfg.system, ctx, cfg.lambda, cfg.rvi, std::move(cached));
}

const PolicySpec& find_policy(const ExperimentConfig& cfg, std::string_view name) {
  for (const auto& p : cfg.policies)
    if (p.label() == name) return p;
  for (const auto& p : cfg.policies)
    if (to_string(p.kind) == name) return p;
  throw ValidationError("no policy named '" + std::string(name) + "' in the config");
}

ComparisonReport run_compare(const ExperimentConfig& cfg, unsigned threads) {
  ComparisonReport report;
  report.lambda = cfg.lambda;
  report.seed = cfg.seed;
  report.horizon = cfg.horizon;
  report.replications = cfg.replications;

  for (const auto& spec : cfg.policies) {
    const Policy policy = build_policy(cfg, spec);
    PolicyRow row;
    row.name = spec.label();
    row.kind = spec.kind;
    row.exact = exact_average(cfg.system, cfg.tensor, policy, cfg.lambda);

    const std::size_t reps = cfg.replications;
    std::vector<SimResult> results(reps);
    auto run = [&](std::size_t r) {
      SimConfig sc{cfg.horizon, replication_seed(cfg.seed, r), cfg.lambda, false};
      results[r] = simulate(cfg.system, cfg.tensor, policy, sc);
    };
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(reps)));
    if (workers == 1) {
      for (std::size_t r = 0; r < reps; ++r) run(r);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t r = w; r < reps; r += workers) run(r);
        });
      }
    }

    std::vector<double> loss, tensor_loss, rate, fires;
    for (const auto& s : results) {
      loss.push_back(s.average_cost);
      tensor_loss.push_back(s.average_tensor_cost);
      rate.push_back(s.sample_rate);
      fires.push_back(static_cast<double>(s.fire_occurrences));
    }
    row.loss = estimate(loss);
    row.tensor_loss = estimate(tensor_loss);
    row.rate = estimate(rate);
    row.fires = estimate(fires);
    row.loss_consistent = row.loss.agrees(row.exact.average_cost);
    row.rate_consistent = row.rate.agrees(row.exact.sample_rate);
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string report_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "policy,exact_loss,exact_tensor_loss,exact_rate,exact_fire_rate,"
        "mc_loss,mc_loss_hw,mc_tensor_loss,mc_tensor_loss_hw,mc_rate,mc_rate_hw,mc_fires,mc_fires_hw,"
        "loss_consistent,rate_consistent\n";
  for (const auto& r : report.rows) {
    os << r.name << ',' << format_double(r.exact.average_cost) << ',' << format_double(r.exact.tensor_cost) << ','
       << format_double(r.exact.sample_rate) << ',' << format_double(r.exact.fire_rate) << ','
       << format_double(r.loss.mean) << ',' << format_double(r.loss.half_width) << ','
       << format_double(r.tensor_loss.mean) << ',' << format_double(r.tensor_loss.half_width) << ','
       << format_double(r.rate.mean) << ',' << format_double(r.rate.half_width) << ','
       << format_double(r.fires.mean) << ',' << format_double(r.fires.half_width) << ','
       << (r.loss_consistent ? 1 : 0) << ',' << (r.rate_consistent ? 1 : 0) << '\n';
  }
  return os.str();
}

namespace {

nlohmann::json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"se", e.se}, {"half_width_95", e.half_width}};
}

}  // namespace

nlohmann::json report_json(const ComparisonReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"policy", r.name},
                    {"kind", std::string(to_string(r.kind))},
                    {"exact",
                     {{"loss", r.exact.average_cost},
                      {"tensor_loss", r.exact.tensor_cost},
                      {"sample_rate", r.exact.sample_rate},
                      {"delivery_rate", r.exact.delivery_rate},
                      {"fire_rate", r.exact.fire_rate},
                      {"expected_fires", r.exact.fire_rate * static_cast<double>(report.horizon - 1)},
                      {"chain_states", r.exact.chain_states}}},
                    {"monte_carlo",
                     {{"loss", estimate_json(r.loss)},
                      {"tensor_loss", estimate_json(r.tensor_loss)},
                      {"sample_rate", estimate_json(r.rate)},
                      {"fires", estimate_json(r.fires)}}},
                    {"consistent", {{"loss", r.loss_consistent}, {"sample_rate", r.rate_consistent}}}});
  }
  return {{"lambda", report.lambda},
          {"seed", report.seed},
          {"horizon", report.horizon},
          {"replications", report.replications},
          {"policies", rows}};
}

void run_timeseries(const ExperimentConfig& cfg, const Policy& policy, std::ostream& os,
                    std::optional<std::uint64_t> horizon) {
  SimConfig sc{horizon.value_or(cfg.horizon), replication_seed(cfg.seed, 0), cfg.lambda, true};
  const SimResult res = simulate(cfg.system, cfg.tensor, policy, sc);
  os << "t,x,x_hat,instant_cost,sampled,delivered,cum_avg_cost\n";
  double total = 0.0;
  for (std::size_t t = 0; t < res.trajectory.size(); ++t) {
    const auto& r = res.trajectory[t];
    total += res.slot_costs[t];
    os << r.t << ',' << r.x << ',' << r.x_hat << ',' << format_double(res.slot_costs[t]) << ','
       << (r.sampled ? 1 : 0) << ',' << (r.delivered ? 1 : 0) << ','
       << format_double(total / static_cast<double>(t + 1)) << '\n';
  }
}

nlohmann::json tensor_report_json(const ExperimentConfig& cfg, double tol) {
  const StructureReport rep = classify(cfg.tensor, tol);
  nlohmann::json mult = nullptr;
  if (rep.multiplicative_env) {
    mult = {{"base_index", rep.multiplicative_env->base_index},
            {"coefficients", rep.multiplicative_env->coefficients}};
  }
  const auto d = cfg.tensor.dims();
  nlohmann::json out = {{"source", cfg.tensor_source},
                        {"dims", {d[0], d[1], d[2]}},
                        {"tolerance", tol},
                        {"diagonally_symmetric", rep.diagonally_symmetric},
                        {"multiplicative_env", mult},
                        {"content_independent", rep.content_independent}};
  if (cfg.cost_model) {
    const Step5Difference diff = compare_step5(*cfg.cost_model);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : diff.entries) {
      entries.push_back({{"x", e.x}, {"x_hat", e.x_hat}, {"phi", e.phi}, {"intent", e.intent}, {"literal", e.literal}});
    }
    out["step5"] = {{"formula_in_use", cfg.formula == Step5Formula::intent ? "intent" : "literal"},
                    {"identical", diff.identical},
                    {"max_abs_difference", diff.max_abs_difference},
                    {"differences", entries}};
  }
  return out;
}

nlohmann::json solve_report_json(const ExperimentConfig& cfg, const PolicySpec& spec) {
  if (spec.kind != PolicyKind::optimal_mmse && spec.kind != PolicyKind::optimal_got) {
    throw ValidationError("policy " + spec.label() + " is rule-based; only optimal_mmse and optimal_got are solved");
  }
  const Policy policy = build_policy(cfg, spec);
  const MdpSolution& sol = *policy.solution();
  nlohmann::json out = solution_to_json(sol);
  const StateCodec codec(cfg.system.n_status(), cfg.system.env);
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t s = 0; s < codec.size(); ++s) {
    const auto st = codec.decode(s);
    states.push_back({st.x, st.x_hat_prev, st.phi});
  }
  out["states"] = states;
  out["policy_name"] = spec.label();
  out["lambda"] = cfg.lambda;
  return out;
}

RandomInstance random_instance(Rng& rng, std::size_t max_states) {
  if (max_states < 4) throw ValidationError("random_instance: need room for at least 4 states");
  std::size_t n = 2;
  while ((n + 1) * (n + 1) <= max_states && uniform01(rng) < 0.5) ++n;
  const std::size_t max_env = max_states / (n * n);
  const std::size_t n_env = 1 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(max_env));
  const std::size_t n_dec = 1 + static_cast<std::size_t>(uniform01(rng) * 3.0);

  auto random_stochastic = [&](std::size_t m) {
    std::vector<double> p(m * m);
    for (std::size_t r = 0; r < m; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < m; ++c) sum += p[r * m + c] = 0.05 + uniform01(rng);
      for (std::size_t c = 0; c < m; ++c) p[r * m + c] /= sum;
      double fix = 1.0;
      for (std::size_t c = 0; c + 1 < m; ++c) fix -= p[r * m + c];
      p[r * m + m - 1] = fix;
    }
    return p;
  };

  std::vector<std::vector<double>> kernels;
  for (std::size_t d = 0; d < n_dec; ++d) kernels.push_back(random_stochastic(n));
  std::vector<std::size_t> delta(n);
  for (auto& d : delta) d = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n_dec));
  EnvModel env = n_env == 1 ? EnvModel::constant() : EnvModel::markov(n_env, random_stochastic(n_env));
  const double eps = 0.9 * uniform01(rng);
  std::vector<double> values(n * n * n_env);
  for (auto& v : values) v = 10.0 * uniform01(rng);
  const double lambda = 3.0 * uniform01(rng);
  return {SystemModel{SourceModel(n, n_dec, std::move(kernels)), std::move(env), ChannelModel{eps}, std::move(delta)},
          GoalTensor(n, n_env, std::move(values)), lambda};
}

namespace {

// Random trajectory for the metric/tensor cross-checks. x_hat follows
// deliveries, phi is an independent environment index.
Trajectory random_trajectory(Rng& rng, std::size_t length, std::size_t n_status, std::size_t n_env) {
  Trajectory traj;
  traj.reserve(length);
  std::size_t x = 0, x_hat = 0;
  for (std::size_t t = 0; t < length; ++t) {
    if (uniform01(rng) < 0.3) x = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n_status));
    const bool sampled = uniform01(rng) < 0.4;
    const bool delivered = sampled && uniform01(rng) < 0.7;
    if (delivered) x_hat = x;
    const auto phi = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n_env));
    traj.push_back({t, x, x_hat, phi, sampled, delivered});
  }
  return traj;
}

CheckResult check_metric_equivalence(std::uint64_t seed) {
  Rng rng(seed);
  std::size_t mismatches = 0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(uniform01(rng) * 4.0);
    const std::size_t nv = 1 + static_cast<std::size_t>(uniform01(rng) * 8.0);
    const Trajectory traj = random_trajectory(rng, 2000, n, nv);
    std::vector<double> emb(n);
    for (auto& e : emb) e = 5.0 * uniform01(rng);
    std::vector<double> w(nv);
    for (auto& v : w) v = uniform01(rng) * 3.0;
    const auto g = ErrorGapFn::squared(emb);
    const auto f = PenaltyFn::logarithmic(0.7);

    const auto aoi = aoi_process(traj);
    const auto aos = aos_process(traj);
    const std::size_t cap = std::max<std::size_t>(
        1, std::max(*std::max_element(aoi.begin(), aoi.end()), *std::max_element(aos.begin(), aos.end())));
    const auto t_aoi = embed_aoi(n, cap);
    const auto t_mse = embed_mse(emb, nv);
    const auto t_aoii = embed_aoii(f, g, cap);
    const auto t_uoi = embed_uoi(EnvWeightFn(w), g);
    const auto m_mse = mse(traj, emb);
    const auto m_aoii = aoii(traj, f, g);
    const auto m_uoi = uoi(traj, EnvWeightFn(w), g);
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const auto& r = traj[t];
      if (t_aoi.at(r.x, r.x_hat, aoi[t]) != static_cast<double>(aoi[t])) ++mismatches;
      if (t_mse.at(r.x, r.x_hat, r.phi) != m_mse[t]) ++mismatches;
      if (t_aoii.at(r.x, r.x_hat, aos[t]) != m_aoii[t]) ++mismatches;
      if (t_uoi.at(r.x, r.x_hat, r.phi) != m_uoi[t]) ++mismatches;
    }
  }
  return {"metric_tensor_equivalence", mismatches == 0, std::to_string(mismatches) + " mismatched lookups"};
}

CheckResult check_symmetry(bool inject) {
  const std::vector<double> emb{0, 1, 2, 3, 4};
  GoalTensor t = embed_mse(emb, 3);
  if (inject) {
    std::vector<double> v(t.values().begin(), t.values().end());
    v[1] += 10.0;  // T[1, 0, 0]
    t = GoalTensor(t.n_status(), t.n_env(), std::move(v));
  }
  const auto rep = classify(t, 1e-9);
  const bool ok = rep.diagonally_symmetric && rep.multiplicative_env && !rep.content_independent;
  return {"mse_tensor_reductions", ok, std::string("symmetric=") + (rep.diagonally_symmetric ? "1" : "0")};
}

CheckResult check_multiplicative() {
  const double tol = 1e-9;
  const auto g = ErrorGapFn::squared(std::vector<double>{0.0, 1.5, 4.0});
  const auto f = PenaltyFn::exponential(0.3);
  const std::size_t cap = 6;
  const auto aoii_fac = check_multiplicative_env(embed_aoii(f, g, cap), tol);
  double worst = 0.0;
  bool ok = aoii_fac.has_value();
  if (ok) {
    for (std::size_t a = 0; a <= cap; ++a) {
      worst = std::max(worst, std::abs(aoii_fac->coefficients[a] - f(double(a)) / f(double(cap))));
    }
  }
  const std::vector<double> w{0.5, 2.0, 1.0, 3.5};
  const auto uoi_fac = check_multiplicative_env(embed_uoi(EnvWeightFn(w), g), tol);
  ok = ok && uoi_fac.has_value();
  if (uoi_fac) {
    for (std::size_t p = 0; p < w.size(); ++p) worst = std::max(worst, std::abs(uoi_fac->coefficients[p] - w[p] / 3.5));
  }
  ok = ok && worst <= 1e-9;

  // One entry of a non-base slice pushed 10x past the tolerance.
  const auto base = embed_uoi(EnvWeightFn(w), g);
  std::vector<double> v(base.values().begin(), base.values().end());
  v[base.n_status() * base.n_status() + 1] += 10.0 * tol * base.max_entry();
  const bool rejected = !check_multiplicative_env(GoalTensor(base.n_status(), base.n_env(), v), tol);
  ok = ok && rejected;
  std::ostringstream d;
  d << "max coefficient error " << format_double(worst) << ", perturbed rejected=" << rejected;
  return {"multiplicative_env_detection", ok, d.str()};
}

CheckResult check_step5() {
  CostModel cm = reference_cost_model();
  const auto ref = compare_step5(cm);
  std::fill(cm.c2.begin(), cm.c2.end(), 0.0);
  const auto zero = compare_step5(cm);
  const bool ok = zero.identical && !ref.identical;
  return {"step5_formula_modes", ok,
          "c2=0 identical=" + std::to_string(zero.identical) + ", reference differing entries=" +
              std::to_string(ref.entries.size())};
}

CheckResult check_solver(std::uint64_t seed) {
  Rng rng(seed ^ 0x5eedULL);
  double worst_gap = 0.0, worst_eval = 0.0;
  for (int k = 0; k < 10; ++k) {
    const auto inst = random_instance(rng, 8);
    const auto model = compile_sampling_mdp(inst.system, inst.tensor, inst.lambda);
    const auto sol = rvi_solve(model);
    const auto bf = brute_force_optimal(model);
    const auto ev = policy_evaluate(model, sol.policy);
    worst_gap = std::max(worst_gap, std::abs(sol.gain - bf.gain));
    worst_eval = std::max(worst_eval, std::abs(ev.gain - sol.gain));
  }
  std::ostringstream d;
  d << "max |rvi - brute force| " << format_double(worst_gap) << ", max |evaluate - rvi| " << format_double(worst_eval);
  return {"solver_vs_brute_force", worst_gap <= 1e-6 && worst_eval <= 1e-8, d.str()};
}

CheckResult check_monte_carlo(std::uint64_t seed) {
  ExperimentConfig cfg = reference_config();
  cfg.seed = seed;
  cfg.horizon = 50'000;
  cfg.replications = 20;
  const auto report = run_compare(cfg);
  std::string bad;
  for (const auto& r : report.rows) {
    if (!r.loss_consistent || !r.rate_consistent) bad += (bad.empty() ? "" : " ") + r.name;
  }
  return {"monte_carlo_vs_exact", bad.empty(), bad.empty() ? "all policies within 3 SE" : "outside 3 SE: " + bad};
}

CheckResult check_reference_ordering() {
  const ExperimentConfig cfg = reference_config();
  std::vector<std::pair<std::string, ExactResult>> exact;
  for (const auto& spec : cfg.policies) {
    exact.emplace_back(spec.label(), exact_average(cfg.system, cfg.tensor, build_policy(cfg, spec), cfg.lambda));
  }
  const auto got_it = std::find_if(exact.begin(), exact.end(), [](const auto& e) { return e.first == "optimal_got"; });
  if (got_it == exact.end()) return {"reference_ordering", false, "optimal_got missing from reference config"};
  bool ok = true;
  int strict = 0;
  for (const auto& [name, r] : exact) {
    if (name == "optimal_got") continue;
    ok = ok && got_it->second.average_cost <= r.average_cost && got_it->second.sample_rate <= r.sample_rate;
    if (got_it->second.average_cost <= r.average_cost - 1e-9) ++strict;
  }
  ok = ok && strict >= 3;
  return {"reference_ordering", ok,
          "optimal_got loss " + format_double(got_it->second.average_cost) + " rate " +
              format_double(got_it->second.sample_rate) + ", strictly better than " + std::to_string(strict)};
}

CheckResult check_lambda_sweep() {
  ExperimentConfig cfg = reference_config();
  PolicySpec spec;
  spec.kind = PolicyKind::optimal_got;
  double prev_rate = 2.0, prev_gain = -1.0;
  bool ok = true;
  std::ostringstream d;
  for (double lambda : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    cfg.lambda = lambda;
    const auto r = exact_average(cfg.system, cfg.tensor, build_policy(cfg, spec), lambda);
    ok = ok && r.sample_rate <= prev_rate + 1e-12 && r.average_cost >= prev_gain - 1e-12;
    prev_rate = r.sample_rate;
    prev_gain = r.average_cost;
    d << "l=" << lambda << ":" << format_double(r.sample_rate) << " ";
  }
  return {"lambda_rate_monotonicity", ok, d.str()};
}

template <class Fn>
CheckResult guarded(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& opts) {
  std::vector<CheckResult> out;
  out.push_back(guarded("metric_tensor_equivalence", [&] { return check_metric_equivalence(opts.seed); }));
  out.push_back(guarded("mse_tensor_reductions", [&] { return check_symmetry(opts.inject_asymmetry); }));
  out.push_back(guarded("multiplicative_env_detection", [] { return check_multiplicative(); }));
  out.push_back(guarded("step5_formula_modes", [] { return check_step5(); }));
  out.push_back(guarded("solver_vs_brute_force", [&] { return check_solver(opts.seed); }));
  out.push_back(guarded("monte_carlo_vs_exact", [&] { return check_monte_carlo(opts.seed); }));
  out.push_back(guarded("reference_ordering", [] { return check_reference_ordering(); }));
  out.push_back(guarded("lambda_rate_monotonicity", [] { return check_lambda_sweep(); }));
  return out;
}

std::string selfcheck_table(std::span<const CheckResult> results) {
  std::ostringstream os;
  os << "check,status,detail\n";
  for (const auto& r : results) os << r.name << ',' << (r.passed ? "pass" : "FAIL") << ',' << r.detail << '\n';
  return os.str();
}

}  // namespace got
