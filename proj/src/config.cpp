#include "got/config.hpp"

#include <cmath>
#include <string>

#include "got/error.hpp"
#include "got/io.hpp"

namespace got {

namespace {

using nlohmann::json;

std::string at_index(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

const json& require(const json& obj, const std::string& field, const char* key) {
  if (!obj.is_object()) throw ConfigError(field, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(field.empty() ? key : field + "." + key, "missing field");
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string join(const std::string& field, const char* key) { return field.empty() ? key : field + "." + key; }

double as_double(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

std::uint64_t as_uint(const json& j, const std::string& field) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    throw ConfigError(field, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& field, std::optional<std::size_t> size = std::nullopt) {
  if (!j.is_array()) throw ConfigError(field, "expected an array");
  if (size && j.size() != *size) {
    throw ConfigError(field, "expected " + std::to_string(*size) + " entries, found " + std::to_string(j.size()));
  }
  return j;
}

std::vector<double> doubles(const json& j, const std::string& field, std::optional<std::size_t> size = std::nullopt) {
  as_array(j, field, size);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], at_index(field, i)));
  return out;
}

// n x n row-stochastic matrix, flattened row-major. Rows within 1e-9 of
// summing to one are renormalized.
std::vector<double> stochastic_matrix(const json& j, const std::string& field, std::size_t n) {
  as_array(j, field, n);
  std::vector<double> out;
  out.reserve(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::string rf = at_index(field, r);
    auto row = doubles(j[r], rf, n);
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (row[c] < 0.0 || row[c] > 1.0) throw ConfigError(at_index(rf, c), "probability outside [0, 1]");
      sum += row[c];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError(rf, "row sums to " + format_double(sum) + ", expected 1 within 1e-9");
    }
    for (double v : row) out.push_back(v / sum);
  }
  return out;
}

EnvModel parse_environment(const json* j, const std::string& field) {
  if (j == nullptr) return EnvModel::constant();
  const std::string mode = as_string(require(*j, field, "mode"), join(field, "mode"));
  if (mode == "constant") {
    const json* n = optional_field(*j, "n_env");
    const json* v = optional_field(*j, "value");
    const std::size_t n_env = n ? as_uint(*n, join(field, "n_env")) : 1;
    const std::size_t value = v ? as_uint(*v, join(field, "value")) : 0;
    if (n_env == 0) throw ConfigError(join(field, "n_env"), "must be >= 1");
    if (value >= n_env) throw ConfigError(join(field, "value"), "must be < n_env");
    return EnvModel::constant(n_env, value);
  }
  if (mode == "markov") {
    const json& q = require(*j, field, "Q");
    const std::size_t n = as_array(q, join(field, "Q")).size();
    if (n == 0) throw ConfigError(join(field, "Q"), "must be non-empty");
    return EnvModel::markov(n, stochastic_matrix(q, join(field, "Q"), n));
  }
  if (mode == "derived_age") {
    const json* c = optional_field(*j, "cap");
    const std::size_t cap = c ? as_uint(*c, join(field, "cap")) : kDefaultAgeCap;
    if (cap < 1) throw ConfigError(join(field, "cap"), "must be >= 1");
    return EnvModel::derived_age(cap);
  }
  throw ConfigError(join(field, "mode"), "unknown mode '" + mode + "' (constant | markov | derived_age)");
}

SystemModel parse_system(const json& j, std::vector<double>& embedding) {
  const std::string field = "system";
  const std::size_t n = as_uint(require(j, field, "n_status"), "system.n_status");
  const std::size_t nd = as_uint(require(j, field, "n_decisions"), "system.n_decisions");
  if (n == 0) throw ConfigError("system.n_status", "must be >= 1");
  if (nd == 0) throw ConfigError("system.n_decisions", "must be >= 1");

  const json& kj = as_array(require(j, field, "kernels"), "system.kernels", nd);
  std::vector<std::vector<double>> kernels;
  for (std::size_t d = 0; d < nd; ++d) kernels.push_back(stochastic_matrix(kj[d], at_index("system.kernels", d), n));

  const double eps = as_double(require(j, field, "epsilon"), "system.epsilon");
  if (eps < 0.0 || eps > 1.0) throw ConfigError("system.epsilon", "must lie in [0, 1]");

  const json& dj = as_array(require(j, field, "delta"), "system.delta", n);
  std::vector<std::size_t> delta;
  for (std::size_t x = 0; x < n; ++x) {
    const auto d = as_uint(dj[x], at_index("system.delta", x));
    if (d >= nd) throw ConfigError(at_index("system.delta", x), "decision index must be < n_decisions");
    delta.push_back(d);
  }

  if (const json* e = optional_field(j, "embedding")) {
    embedding = doubles(*e, "system.embedding", n);
  } else {
    embedding.clear();
    for (std::size_t x = 0; x < n; ++x) embedding.push_back(static_cast<double>(x));
  }

  SystemModel sys{SourceModel(n, nd, std::move(kernels)),
                  parse_environment(optional_field(j, "environment"), "system.environment"),
                  ChannelModel{eps}, std::move(delta)};
  sys.validate();
  return sys;
}

CostModel parse_cost_model(const json& j, const SystemModel& sys, const std::string& field) {
  CostModel cm;
  cm.n_status = sys.n_status();
  cm.n_env = sys.env.n_env();
  cm.n_decisions = sys.source.n_decisions();
  cm.delta = sys.delta;

  const std::string f1 = join(field, "c1");
  const json& c1 = as_array(require(j, field, "c1"), f1, cm.n_status);
  for (std::size_t x = 0; x < cm.n_status; ++x) {
    for (double v : doubles(c1[x], at_index(f1, x), cm.n_env)) {
      if (v < 0.0) throw ConfigError(at_index(f1, x), "status costs must be >= 0");
      cm.c1.push_back(v);
    }
  }
  const std::string f2 = join(field, "c2");
  const json& c2 = as_array(require(j, field, "c2"), f2, cm.n_status);
  for (std::size_t x = 0; x < cm.n_status; ++x) {
    const std::string fx = at_index(f2, x);
    as_array(c2[x], fx, cm.n_env);
    for (std::size_t phi = 0; phi < cm.n_env; ++phi) {
      for (double v : doubles(c2[x][phi], at_index(fx, phi), cm.n_decisions)) {
        if (v > 0.0) throw ConfigError(at_index(fx, phi), "decision gains must be <= 0");
        cm.c2.push_back(v);
      }
    }
  }
  const std::string f3 = join(field, "c3");
  for (double v : doubles(require(j, field, "c3"), f3, cm.n_decisions)) {
    if (v < 0.0) throw ConfigError(f3, "decision costs must be >= 0");
    cm.c3.push_back(v);
  }
  cm.validate();
  return cm;
}

ErrorGapFn parse_gap(const json* j, const std::string& field, std::size_t n, std::span<const double> embedding) {
  if (j == nullptr) return ErrorGapFn::indicator(n);
  if (const json* t = optional_field(*j, "table")) {
    const std::string ft = join(field, "table");
    as_array(*t, ft, n);
    std::vector<double> flat;
    for (std::size_t x = 0; x < n; ++x) {
      const auto row = doubles((*t)[x], at_index(ft, x), n);
      flat.insert(flat.end(), row.begin(), row.end());
    }
    try {
      return {n, std::move(flat)};
    } catch (const ValidationError& e) {
      throw ConfigError(ft, e.what());
    }
  }
  const std::string kind = as_string(require(*j, field, "kind"), join(field, "kind"));
  if (kind == "indicator") return ErrorGapFn::indicator(n);
  if (kind == "squared") return ErrorGapFn::squared(embedding);
  throw ConfigError(join(field, "kind"), "unknown gap kind '" + kind + "' (indicator | squared | table)");
}

PenaltyFn parse_penalty(const json* j, const std::string& field) {
  if (j == nullptr) return PenaltyFn::linear();
  const std::string kind = as_string(require(*j, field, "kind"), join(field, "kind"));
  const json* r = optional_field(*j, "rate");
  const double rate = r ? as_double(*r, join(field, "rate")) : 1.0;
  if (!(rate > 0.0)) throw ConfigError(join(field, "rate"), "must be > 0");
  if (kind == "linear") return PenaltyFn::linear(rate);
  if (kind == "exponential") return PenaltyFn::exponential(rate);
  if (kind == "logarithmic") return PenaltyFn::logarithmic(rate);
  throw ConfigError(join(field, "kind"), "unknown penalty '" + kind + "' (linear | exponential | logarithmic)");
}

GoalTensor parse_embed(const json& j, const ExperimentConfig& cfg, const std::string& field) {
  const std::string kind = as_string(require(j, field, "kind"), join(field, "kind"));
  const std::size_t n = cfg.system.n_status();
  try {
    if (kind == "aoi") return embed_aoi(n, as_uint(require(j, field, "max_age"), join(field, "max_age")));
    if (kind == "mse") return embed_mse(cfg.embedding, cfg.system.env.n_env());
    if (kind == "aoii") {
      return embed_aoii(parse_penalty(optional_field(j, "penalty"), join(field, "penalty")),
                        parse_gap(optional_field(j, "gap"), join(field, "gap"), n, cfg.embedding),
                        as_uint(require(j, field, "max_aos"), join(field, "max_aos")));
    }
    if (kind == "uoi") {
      return embed_uoi(EnvWeightFn(doubles(require(j, field, "weights"), join(field, "weights"))),
                       parse_gap(optional_field(j, "gap"), join(field, "gap"), n, cfg.embedding));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(join(field, "kind"), "unknown embedding '" + kind + "' (aoi | mse | aoii | uoi)");
}

void parse_tensor(const json& j, ExperimentConfig& cfg) {
  const std::string field = "tensor";
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  std::size_t sources = 0;
  for (const char* k : {"cost_model", "embed", "file"}) sources += j.contains(k) ? 1 : 0;
  if (sources != 1) throw ConfigError(field, "exactly one of cost_model, embed, file is required");

  if (const json* cm = optional_field(j, "cost_model")) {
    cfg.cost_model = parse_cost_model(*cm, cfg.system, "tensor.cost_model");
    if (const json* f = optional_field(*cm, "formula")) {
      const std::string s = as_string(*f, "tensor.cost_model.formula");
      if (s == "intent") cfg.formula = Step5Formula::intent;
      else if (s == "literal") cfg.formula = Step5Formula::literal;
      else throw ConfigError("tensor.cost_model.formula", "expected 'intent' or 'literal'");
    }
    try {
      cfg.tensor = build_got(*cfg.cost_model, cfg.formula);
    } catch (const ValidationError& e) {
      throw ConfigError("tensor.cost_model", e.what());
    }
    cfg.tensor_source = "cost_model";
  } else if (const json* e = optional_field(j, "embed")) {
    cfg.tensor = parse_embed(*e, cfg, "tensor.embed");
    cfg.tensor_source = "embed:" + as_string(require(*e, "tensor.embed", "kind"), "tensor.embed.kind");
  } else {
    const std::string file = as_string(j.at("file"), "tensor.file");
    const auto path = cfg.resolve(file);
    if (!std::filesystem::exists(path)) throw ConfigError("tensor.file", "file not found: " + path.string());
    try {
      cfg.tensor = load_tensor(path);
    } catch (const ValidationError& ex) {
      throw ConfigError("tensor.file", ex.what());
    }
    cfg.tensor_source = "file:" + file;
  }

  if (cfg.tensor.n_status() != cfg.system.n_status()) {
    throw ConfigError(field, "tensor |S| = " + std::to_string(cfg.tensor.n_status()) + " but system |S| = " +
                                 std::to_string(cfg.system.n_status()));
  }
  if (cfg.tensor.n_env() != cfg.system.env.n_env()) {
    throw ConfigError(field, "tensor |V| = " + std::to_string(cfg.tensor.n_env()) + " but environment |V| = " +
                                 std::to_string(cfg.system.env.n_env()));
  }
}

PolicySpec parse_policy(const json& j, const std::string& field, const ExperimentConfig& cfg) {
  PolicySpec spec;
  try {
    spec.kind = parse_policy_kind(as_string(require(j, field, "kind"), join(field, "kind")));
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(join(field, "kind"), e.what());
  }
  if (const json* p = optional_field(j, "period")) spec.period = as_uint(*p, join(field, "period"));
  if (const json* t = optional_field(j, "threshold")) spec.threshold = as_uint(*t, join(field, "threshold"));
  if (const json* nm = optional_field(j, "name")) spec.name = as_string(*nm, join(field, "name"));
  if (spec.period < 1) throw ConfigError(join(field, "period"), "must be >= 1");
  if (spec.threshold < 1) throw ConfigError(join(field, "threshold"), "must be >= 1");
  if (const json* s = optional_field(j, "solution_file")) {
    if (spec.kind != PolicyKind::optimal_mmse && spec.kind != PolicyKind::optimal_got) {
      throw ConfigError(join(field, "solution_file"), "only optimal_mmse and optimal_got take a solution file");
    }
    spec.solution_file = as_string(*s, join(field, "solution_file"));
    if (!std::filesystem::exists(cfg.resolve(*spec.solution_file))) {
      throw ConfigError(join(field, "solution_file"), "file not found: " + cfg.resolve(*spec.solution_file).string());
    }
  }
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.system = parse_system(require(doc, "", "system"), cfg.embedding);
  parse_tensor(require(doc, "", "tensor"), cfg);

  if (const json* l = optional_field(doc, "lambda")) {
    cfg.lambda = as_double(*l, "lambda");
    if (cfg.lambda < 0.0) throw ConfigError("lambda", "must be >= 0");
  }
  const json& pj = as_array(require(doc, "", "policies"), "policies");
  if (pj.empty()) throw ConfigError("policies", "at least one policy is required");
  for (std::size_t i = 0; i < pj.size(); ++i) cfg.policies.push_back(parse_policy(pj[i], at_index("policies", i), cfg));

  if (const json* h = optional_field(doc, "horizon")) cfg.horizon = as_uint(*h, "horizon");
  if (cfg.horizon < 1) throw ConfigError("horizon", "must be >= 1");
  if (const json* r = optional_field(doc, "replications")) cfg.replications = as_uint(*r, "replications");
  if (cfg.replications < 1) throw ConfigError("replications", "must be >= 1");
  if (const json* s = optional_field(doc, "seed")) cfg.seed = as_uint(*s, "seed");
  if (const json* o = optional_field(doc, "output_dir")) cfg.output_dir = as_string(*o, "output_dir");

  if (const json* r = optional_field(doc, "rvi")) {
    if (const json* v = optional_field(*r, "span_tol")) cfg.rvi.span_tol = as_double(*v, "rvi.span_tol");
    if (const json* v = optional_field(*r, "max_iter")) cfg.rvi.max_iter = as_uint(*v, "rvi.max_iter");
    if (const json* v = optional_field(*r, "aperiodicity")) cfg.rvi.aperiodicity = as_double(*v, "rvi.aperiodicity");
    if (!(cfg.rvi.span_tol > 0.0)) throw ConfigError("rvi.span_tol", "must be > 0");
    if (cfg.rvi.max_iter < 1) throw ConfigError("rvi.max_iter", "must be >= 1");
    if (!(cfg.rvi.aperiodicity > 0.0 && cfg.rvi.aperiodicity <= 1.0)) {
      throw ConfigError("rvi.aperiodicity", "must lie in (0, 1]");
    }
  }
  return cfg;
}

ExperimentConfig validate_config(const std::filesystem::path& path) {
  return parse_config(read_json_file(path), path.parent_path());
}

}  // namespace got
