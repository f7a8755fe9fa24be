#include "got/policies.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "got/error.hpp"

namespace got {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 7> kNames{{
    {PolicyKind::uniform, "uniform"},
    {PolicyKind::age_aware, "age_aware"},
    {PolicyKind::change_aware, "change_aware"},
    {PolicyKind::optimal_mmse, "optimal_mmse"},
    {PolicyKind::optimal_aoii, "optimal_aoii"},
    {PolicyKind::optimal_got, "optimal_got"},
    {PolicyKind::never, "never"},
}};

bool is_compiled_kind(PolicyKind k) { return k == PolicyKind::optimal_mmse || k == PolicyKind::optimal_got; }

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  throw ValidationError("unknown policy kind '" + std::string(name) + "'");
}

Policy Policy::rule(const PolicySpec& spec) {
  if (is_compiled_kind(spec.kind)) {
    throw ValidationError("policy " + spec.label() + ": optimal policies need a compiled solution");
  }
  if (spec.kind == PolicyKind::uniform && spec.period < 1) {
    throw ValidationError("policy " + spec.label() + ": period must be >= 1");
  }
  if (spec.kind == PolicyKind::age_aware && spec.threshold < 1) {
    throw ValidationError("policy " + spec.label() + ": threshold must be >= 1");
  }
  return Policy(spec);
}

Policy Policy::compiled(const PolicySpec& spec, const StateCodec& codec, MdpSolution solution) {
  if (!is_compiled_kind(spec.kind)) {
    throw ValidationError("policy " + spec.label() + ": only optimal_mmse / optimal_got use a solution");
  }
  if (solution.policy.size() != codec.size()) {
    throw ValidationError("policy " + spec.label() + ": solution covers " +
                          std::to_string(solution.policy.size()) + " states, model has " +
                          std::to_string(codec.size()));
  }
  Policy p(spec);
  p.solution_ = std::make_shared<const MdpSolution>(std::move(solution));
  p.codec_ = codec;
  return p;
}

Action Policy::decide(const PolicyState& state, const Observation& obs) const {
  switch (spec_.kind) {
    case PolicyKind::uniform:
      return obs.t % spec_.period == 0 ? Action::sample : Action::idle;
    case PolicyKind::age_aware:
      return obs.aoi >= spec_.threshold ? Action::sample : Action::idle;
    case PolicyKind::change_aware:
      return !state.previous_source_status || *state.previous_source_status != obs.x ? Action::sample
                                                                                      : Action::idle;
    case PolicyKind::optimal_aoii:
      return obs.x != obs.x_hat_prev ? Action::sample : Action::idle;
    case PolicyKind::never:
      return Action::idle;
    case PolicyKind::optimal_mmse:
    case PolicyKind::optimal_got:
      if (!solution_) throw ValidationError("policy " + label() + ": compiled policy is absent");
      return solution_->policy[codec_->encode({obs.x, obs.x_hat_prev, obs.phi})];
  }
  return Action::idle;
}

void Policy::advance(PolicyState& state, const Observation& obs) const {
  if (spec_.kind == PolicyKind::change_aware) state.previous_source_status = obs.x;
}

void Policy::canonicalize(Observation& obs, PolicyState& state) const {
  switch (spec_.kind) {
    case PolicyKind::uniform:
      obs.t %= spec_.period;
      obs.aoi = 0;
      break;
    case PolicyKind::age_aware:
      obs.t = 0;
      obs.aoi = std::min<std::uint64_t>(obs.aoi, spec_.threshold);
      break;
    default:
      obs.t = 0;
      obs.aoi = 0;
      break;
  }
  if (spec_.kind != PolicyKind::change_aware) state = {};
}

GoalTensor objective_tensor(PolicyKind kind, const SystemModel& sys, const TensorContext& ctx) {
  if (kind == PolicyKind::optimal_mmse) {
    if (ctx.embedding.size() != sys.n_status()) {
      throw ValidationError("optimal_mmse: status embedding must have |S| entries");
    }
    return embed_mse(ctx.embedding, sys.env.n_env());
  }
  if (kind == PolicyKind::optimal_got) {
    if (ctx.got == nullptr) throw ValidationError("optimal_got: scenario tensor is missing");
    return *ctx.got;
  }
  throw ValidationError("policy kind " + std::string(to_string(kind)) + " has no objective tensor");
}

Policy make_policy(const PolicySpec& spec, const SystemModel& sys, const TensorContext& ctx, double lambda,
                   const RviConfig& rvi, std::optional<MdpSolution> cached) {
  if (!is_compiled_kind(spec.kind)) return Policy::rule(spec);
  const StateCodec codec(sys.n_status(), sys.env);
  if (cached) return Policy::compiled(spec, codec, std::move(*cached));
  const GoalTensor tensor = objective_tensor(spec.kind, sys, ctx);
  const MdpModel model = compile_sampling_mdp(sys, tensor, lambda);
  return Policy::compiled(spec, codec, rvi_solve(model, rvi));
}

}  // namespace got
