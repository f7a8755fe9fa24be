#include "got/markov_chain.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "got/error.hpp"

namespace got {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kDenseLimit = 256;

// Strongly connected components of the subgraph reachable from `start`
// (iterative Tarjan). comp[s] == kNone for unreachable s.
struct Components {
  std::vector<std::size_t> comp;
  std::vector<std::vector<std::size_t>> members;
};

Components reachable_components(const TransitionRows& rows, std::size_t start) {
  const std::size_t n = rows.size();
  if (start >= n) throw ValidationError("chain: start state out of range");
  Components out;
  out.comp.assign(n, kNone);
  std::vector<std::size_t> index(n, kNone), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  struct Frame {
    std::size_t s;
    std::size_t edge;
  };
  std::vector<Frame> call;
  std::size_t counter = 0;

  auto open = [&](std::size_t s) {
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on_stack[s] = true;
    call.push_back({s, 0});
  };
  open(start);
  while (!call.empty()) {
    Frame& f = call.back();
    const auto& row = rows[f.s];
    if (f.edge < row.size()) {
      const Transition tr = row[f.edge++];
      if (tr.prob <= 0.0) continue;
      if (tr.to >= n) throw ValidationError("chain: transition target out of range");
      if (index[tr.to] == kNone) {
        open(tr.to);
      } else if (on_stack[tr.to]) {
        low[f.s] = std::min(low[f.s], index[tr.to]);
      }
      continue;
    }
    const std::size_t s = f.s;
    call.pop_back();
    if (!call.empty()) low[call.back().s] = std::min(low[call.back().s], low[s]);
    if (low[s] == index[s]) {
      std::vector<std::size_t> members;
      std::size_t w = 0;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        out.comp[w] = out.members.size();
        members.push_back(w);
      } while (w != s);
      std::sort(members.begin(), members.end());
      out.members.push_back(std::move(members));
    }
  }
  return out;
}

// Solves A x = b for a square system given as triplets.
Eigen::MatrixXd solve_system(std::size_t m, const std::vector<Eigen::Triplet<double>>& entries,
                             const Eigen::MatrixXd& rhs) {
  if (m <= kDenseLimit) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (const auto& e : entries) a(e.row(), e.col()) += e.value();
    return a.partialPivLu().solve(rhs);
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("chain: sparse factorization failed");
  Eigen::MatrixXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SolverError("chain: sparse solve failed");
  return x;
}

std::string describe_classes(const std::vector<std::vector<std::size_t>>& classes) {
  std::string s;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    s += k ? "; {" : "{";
    for (std::size_t i = 0; i < classes[k].size(); ++i) {
      if (i == 8) {
        s += ", ... (" + std::to_string(classes[k].size()) + " states)";
        break;
      }
      s += (i ? ", " : "") + std::to_string(classes[k][i]);
    }
    s += "}";
  }
  return s;
}

}  // namespace

std::vector<std::size_t> reachable_from(const TransitionRows& rows, std::size_t start) {
  if (start >= rows.size()) throw ValidationError("chain: start state out of range");
  std::vector<bool> seen(rows.size(), false);
  std::vector<std::size_t> todo{start};
  seen[start] = true;
  while (!todo.empty()) {
    const std::size_t s = todo.back();
    todo.pop_back();
    for (const auto& tr : rows[s]) {
      if (tr.prob > 0.0 && !seen[tr.to]) {
        seen[tr.to] = true;
        todo.push_back(tr.to);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < rows.size(); ++s)
    if (seen[s]) out.push_back(s);
  return out;
}

std::vector<std::vector<std::size_t>> closed_classes(const TransitionRows& rows, std::size_t start) {
  const Components c = reachable_components(rows, start);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t k = 0; k < c.members.size(); ++k) {
    bool closed = true;
    for (std::size_t s : c.members[k]) {
      for (const auto& tr : rows[s]) {
        if (tr.prob > 0.0 && c.comp[tr.to] != k) {
          closed = false;
          break;
        }
      }
      if (!closed) break;
    }
    if (closed) out.push_back(c.members[k]);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

std::vector<double> class_stationary(const TransitionRows& rows, std::span<const std::size_t> cls) {
  const std::size_t m = cls.size();
  if (m == 0) throw ValidationError("chain: empty class");
  std::vector<std::size_t> local(rows.size(), kNone);
  for (std::size_t i = 0; i < m; ++i) local[cls[i]] = i;

  // Balance equations pi (P - I) = 0 with the last one replaced by sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> entries;
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& tr : rows[cls[i]]) {
      if (tr.prob <= 0.0) continue;
      const std::size_t j = local[tr.to];
      if (j == kNone) throw ValidationError("chain: class is not closed");
      if (j + 1 < m) entries.emplace_back(j, i, tr.prob);
    }
    if (i + 1 < m) entries.emplace_back(i, i, -1.0);
    entries.emplace_back(m - 1, i, 1.0);
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), 1);
  rhs(static_cast<Eigen::Index>(m - 1), 0) = 1.0;
  const Eigen::MatrixXd pi = solve_system(m, entries, rhs);

  std::vector<double> out(rows.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = pi(static_cast<Eigen::Index>(i), 0);
    if (!std::isfinite(v)) throw SolverError("chain: stationary solve produced a non-finite value");
    out[cls[i]] = std::max(v, 0.0);
    total += out[cls[i]];
  }
  for (std::size_t s : cls) out[s] /= total;
  return out;
}

std::vector<double> unichain_stationary(const TransitionRows& rows, std::size_t start) {
  const auto classes = closed_classes(rows, start);
  if (classes.size() != 1) {
    throw MultichainError("chain: " + std::to_string(classes.size()) +
                          " closed classes reachable from state " + std::to_string(start) + ": " +
                          describe_classes(classes));
  }
  return class_stationary(rows, classes.front());
}

std::vector<double> absorption_probabilities(const TransitionRows& rows, std::size_t start,
                                             const std::vector<std::vector<std::size_t>>& classes) {
  const std::size_t k = classes.size();
  std::vector<std::size_t> owner(rows.size(), kNone);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t s : classes[c]) owner[s] = c;

  std::vector<double> out(k, 0.0);
  if (owner[start] != kNone) {
    out[owner[start]] = 1.0;
    return out;
  }

  // Transient states reachable from start: solve (I - Q) A = R.
  std::vector<std::size_t> transient;
  for (std::size_t s : reachable_from(rows, start))
    if (owner[s] == kNone) transient.push_back(s);
  std::vector<std::size_t> local(rows.size(), kNone);
  for (std::size_t i = 0; i < transient.size(); ++i) local[transient[i]] = i;

  const std::size_t m = transient.size();
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < m; ++i) {
    entries.emplace_back(i, i, 1.0);
    for (const auto& tr : rows[transient[i]]) {
      if (tr.prob <= 0.0) continue;
      if (owner[tr.to] != kNone) {
        rhs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(owner[tr.to])) += tr.prob;
      } else if (local[tr.to] != kNone) {
        entries.emplace_back(i, local[tr.to], -tr.prob);
      }
    }
  }
  const Eigen::MatrixXd a = solve_system(m, entries, rhs);
  const auto row = static_cast<Eigen::Index>(local[start]);
  for (std::size_t c = 0; c < k; ++c) out[c] = a(row, static_cast<Eigen::Index>(c));
  return out;
}

double average_cost_from(const TransitionRows& rows, std::span<const double> cost, std::size_t start) {
  if (cost.size() != rows.size()) throw ValidationError("chain: cost vector size mismatch");
  const auto classes = closed_classes(rows, start);
  const auto weights = classes.size() == 1 ? std::vector<double>{1.0}
                                           : absorption_probabilities(rows, start, classes);
  double total = 0.0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (weights[c] == 0.0) continue;
    const auto pi = class_stationary(rows, classes[c]);
    double g = 0.0;
    for (std::size_t s : classes[c]) g += pi[s] * cost[s];
    total += weights[c] * g;
  }
  return total;
}

}  // namespace got
