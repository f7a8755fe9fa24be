#include "got/metrics.hpp"

#include <cmath>
#include <string>

#include "got/error.hpp"

namespace got {

namespace {

void check_record(const SlotRecord& r, std::uint64_t expected_t) {
  if (r.t != expected_t) {
    throw ValidationError("trajectory: slot " + std::to_string(r.t) + " found where slot " +
                          std::to_string(expected_t) + " was expected");
  }
  if (r.delivered && !r.sampled) {
    throw ValidationError("trajectory: slot " + std::to_string(r.t) + " delivered without sampling");
  }
}

void require_non_empty(const Trajectory& traj) {
  if (traj.empty()) throw ValidationError("trajectory is empty");
}

void require_finite_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw ValidationError(std::string(what) + ": entries must be finite and >= 0");
  }
}

}  // namespace

Trajectory::Trajectory(std::vector<SlotRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) check_record(records_[i], i);
}

void Trajectory::push_back(const SlotRecord& record) {
  check_record(record, records_.size());
  records_.push_back(record);
}

PenaltyFn::PenaltyFn(PenaltyKind kind, double rate) : kind_(kind), rate_(rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ValidationError("penalty rate must be finite and > 0");
  }
}

double PenaltyFn::operator()(double age) const {
  double v = 0.0;
  switch (kind_) {
    case PenaltyKind::linear: v = rate_ * age; break;
    case PenaltyKind::exponential: v = std::expm1(rate_ * age); break;
    case PenaltyKind::logarithmic: v = std::log1p(rate_ * age); break;
  }
  if (!std::isfinite(v)) {
    throw SolverError("penalty overflow at age " + std::to_string(age));
  }
  return v;
}

ErrorGapFn::ErrorGapFn(std::size_t n_status, std::vector<double> table)
    : n_(n_status), table_(std::move(table)) {
  if (n_ == 0) throw ValidationError("error gap: |S| must be positive");
  if (table_.size() != n_ * n_) {
    throw ValidationError("error gap: table has " + std::to_string(table_.size()) +
                          " entries, expected " + std::to_string(n_ * n_));
  }
  for (double v : table_) require_finite_nonneg(v, "error gap");
  for (std::size_t x = 0; x < n_; ++x) {
    if (table_[x * n_ + x] != 0.0) {
      throw ValidationError("error gap: g(" + std::to_string(x) + ", " + std::to_string(x) +
                            ") must be 0");
    }
  }
}

ErrorGapFn ErrorGapFn::indicator(std::size_t n_status) {
  std::vector<double> t(n_status * n_status, 1.0);
  for (std::size_t x = 0; x < n_status; ++x) t[x * n_status + x] = 0.0;
  return {n_status, std::move(t)};
}

ErrorGapFn ErrorGapFn::squared(std::span<const double> embedding) {
  const std::size_t n = embedding.size();
  std::vector<double> t(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double d = embedding[x] - embedding[y];
      t[x * n + y] = d * d;
    }
  }
  return {n, std::move(t)};
}

double ErrorGapFn::operator()(std::size_t x, std::size_t x_hat) const {
  if (x >= n_ || x_hat >= n_) {
    throw ValidationError("error gap: status index out of range");
  }
  return table_[x * n_ + x_hat];
}

EnvWeightFn::EnvWeightFn(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ValidationError("environment weight: |V| must be positive");
  for (double v : weights_) require_finite_nonneg(v, "environment weight");
}

double EnvWeightFn::operator()(std::size_t phi) const {
  if (phi >= weights_.size()) {
    throw ValidationError("environment weight: index " + std::to_string(phi) + " out of range");
  }
  return weights_[phi];
}

std::vector<std::uint64_t> aoi_process(const Trajectory& traj) {
  require_non_empty(traj);
  std::vector<std::uint64_t> out(traj.size());
  out[0] = 0;
  for (std::size_t t = 1; t < traj.size(); ++t) {
    out[t] = traj[t].delivered ? 0 : out[t - 1] + 1;
  }
  return out;
}

std::vector<std::uint64_t> aos_process(const Trajectory& traj) {
  require_non_empty(traj);
  std::vector<std::uint64_t> out(traj.size());
  std::uint64_t prev = 0;  // AoS(-1) = 0: a virtual sync at slot -1.
  for (std::size_t t = 0; t < traj.size(); ++t) {
    out[t] = traj[t].x == traj[t].x_hat ? 0 : prev + 1;
    prev = out[t];
  }
  return out;
}

std::vector<double> voi(std::span<const std::uint64_t> aoi, const PenaltyFn& f) {
  std::vector<double> out;
  out.reserve(aoi.size());
  for (std::uint64_t a : aoi) out.push_back(f(static_cast<double>(a)));
  return out;
}

std::vector<double> mse(const Trajectory& traj, std::span<const double> embedding) {
  require_non_empty(traj);
  if (embedding.empty()) throw ValidationError("mse: status embedding is missing");
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& r : traj) {
    if (r.x >= embedding.size() || r.x_hat >= embedding.size()) {
      throw ValidationError("mse: status index outside the embedding table");
    }
    const double d = embedding[r.x] - embedding[r.x_hat];
    out.push_back(d * d);
  }
  return out;
}

std::vector<double> aoii(const Trajectory& traj, const PenaltyFn& f, const ErrorGapFn& g) {
  const auto aos = aos_process(traj);
  std::vector<double> out;
  out.reserve(traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    out.push_back(f(static_cast<double>(aos[t])) * g(traj[t].x, traj[t].x_hat));
  }
  return out;
}

std::vector<double> uoi(const Trajectory& traj, const EnvWeightFn& w, const ErrorGapFn& g) {
  require_non_empty(traj);
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& r : traj) out.push_back(w(r.phi) * g(r.x, r.x_hat));
  return out;
}

double long_run_average(std::span<const double> seq) {
  if (seq.empty()) throw ValidationError("long_run_average: empty sequence");
  double sum = 0.0;
  for (double v : seq) sum += v;
  return sum / static_cast<double>(seq.size());
}

}  // namespace got
