#pragma once

// Shared fixtures and hand-rolled random generators for the test suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ctmdp/model.hpp"

namespace ctmdp::test {

inline ActionGrid line_grid(std::vector<double> xs) {
  std::vector<std::vector<double>> pts;
  for (double x : xs) pts.push_back({x});
  return ActionGrid(std::move(pts));
}

/// Model with constant running cost c on the given generator data.
inline ModelSpec constant_cost_model(int n, std::vector<double> actions, const std::vector<RateEntry>& rates, double c,
                                     std::vector<double> g, double horizon = 1.0) {
  ActionGrid grid = line_grid(actions);
  ControlledGenerator gen(n, grid.size(), rates);
  CostSpec costs{RunningCost::constant(n, grid.size(), c), std::move(g), std::nullopt};
  return ModelSpec(horizon, std::move(grid), std::move(gen), std::move(costs));
}

/// Two-state model, actions u0, u1: q12(u0)=1, q12(u1)=3, q21 = 1,
/// f(., 1, u0) = 0.5, f(., 1, u1) = 0, f(., 2, .) = 0.
inline ModelSpec two_action_model(std::vector<double> g = {0.0, 1.0}) {
  ActionGrid grid = line_grid({0.0, 1.0});
  const std::vector<RateEntry> rates{{0, 1, 0, 1.0}, {0, 1, 1, 3.0}, {1, 0, 0, 1.0}, {1, 0, 1, 1.0}};
  ControlledGenerator gen(2, 2, rates);
  CostSpec costs{RunningCost::table(2, 2, {0.0, 1.0}, {0.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0}), std::move(g),
                 std::nullopt};
  return ModelSpec(1.0, std::move(grid), std::move(gen), std::move(costs));
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin(double p = 0.5) { return uniform() < p; }

  std::vector<double> simplex(std::size_t n) {
    std::vector<double> w(n);
    double total = 0.0;
    for (double& x : w) total += (x = -std::log(1.0 - uniform()));
    for (double& x : w) x /= total;
    return w;
  }
  Mixture mixture(std::size_t n) {
    std::vector<double> w = simplex(n);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) sum += w[k];
    w.back() = 1.0 - sum;  // exact normalization
    if (w.back() < 0.0) w.back() = 0.0;
    return Mixture(std::move(w));
  }

  /// Random banded model: n states, a actions, bandwidth <= k, piecewise-linear-in-time
  /// running cost (constant in time when time_varying is false).
  ModelSpec model(int n, std::size_t a, int k = 1, double max_rate = 2.0, bool time_varying = true) {
    std::vector<double> xs;
    for (std::size_t u = 0; u < a; ++u) xs.push_back(static_cast<double>(u) + uniform(0.0, 0.5));
    ActionGrid grid = line_grid(xs);
    std::vector<RateEntry> rates;
    for (std::size_t u = 0; u < a; ++u)
      for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - k); j <= std::min(n - 1, i + k); ++j)
          if (j != i && coin(0.8)) rates.push_back({i, j, u, uniform(0.0, max_rate)});
    ControlledGenerator gen(n, a, rates);
    std::vector<double> table;
    for (int t = 0; t < 3; ++t)
      for (int i = 0; i < n; ++i)
        for (std::size_t u = 0; u < a; ++u)
          table.push_back(time_varying || t == 0 ? uniform(0.0, 1.0) : table[static_cast<std::size_t>(i) * a + u]);
    std::vector<double> g(static_cast<std::size_t>(n));
    for (double& x : g) x = uniform(0.0, 1.0);
    CostSpec costs{RunningCost::table(n, a, {0.0, 0.5, 1.0}, std::move(table)), std::move(g), std::nullopt};
    return ModelSpec(1.0, std::move(grid), std::move(gen), std::move(costs));
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ctmdp::test
