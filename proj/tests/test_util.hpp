#pragma once

#include <cstddef>
#include <vector>

#include "got/metrics.hpp"

namespace test {

// Trajectory from per-slot columns; deliveries imply sampling.
inline got::Trajectory make_traj(const std::vector<std::size_t>& x, const std::vector<std::size_t>& x_hat,
                                 const std::vector<int>& delivered = {}, const std::vector<std::size_t>& phi = {}) {
  got::Trajectory traj;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const bool d = !delivered.empty() && delivered[t] != 0;
    traj.push_back({t, x[t], x_hat[t], phi.empty() ? 0 : phi[t], d, d});
  }
  return traj;
}

template <class A, class B>
bool all_close(const A& a, const B& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    if (d > tol || d < -tol) return false;
  }
  return true;
}

}  // namespace test
