#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ctmdp/model.hpp"
#include "ctmdp/policy.hpp"
#include "ctmdp/rng.hpp"

namespace ctmdp {

struct SimulationOptions {
  /// Extra control-refresh/quadrature step; 0 uses only the policy grid,
  /// jump times, delayed-slot switch times and cost-table knots.
  double refresh_step = 0.0;
  /// Worker count; 0 defers to CTMDP_THREADS / hardware concurrency.
  unsigned threads = 0;
  /// Keep (time, mixture) at every control evaluation in sample_path.
  bool record_controls = true;
};

struct AppliedControl {
  double time;
  Mixture mixture;
  double cost_so_far;  ///< running cost accumulated on [s, time)
};

struct Trajectory {
  PathSegment segment;
  std::vector<AppliedControl> applied_controls;
  double pathwise_cost = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;
};

/**
 * Simulates the controlled jump process on [s, T] from state i by thinning a
 * Poisson clock of rate M: at a proposal time t the control mu_t is evaluated
 * on the path so far, a jump is accepted with probability q_i(mu_t) / M and
 * the target j is drawn with probability q_ij(mu_t) / q_i(mu_t).
 * The path uses stream 0 of `seed` (the same stream as path 0 in estimate_J).
 */
Trajectory sample_path(const ModelSpec& model, const DelayPolicy& policy, double s, int i, std::uint64_t seed,
                       const SimulationOptions& options = {});
/// Same as sample_path on an explicit stream (path `stream` of estimate_J).
Trajectory sample_path_stream(const ModelSpec& model, const DelayPolicy& policy, double s, int i, std::uint64_t seed,
                              std::uint64_t stream, const SimulationOptions& options = {});

/// Jump skeleton only, drawn from the given stream.
PathSegment simulate_jumps(const ModelSpec& model, const DelayPolicy& policy, double s, int i, CounterRng& rng);

/// Integral of f(t, L_t, mu_t) over [from, to] by the midpoint rule on cells
/// free of jumps, delayed-slot switches and policy/cost breakpoints.
double running_cost(const ModelSpec& model, const DelayPolicy& policy, const PathSegment& path, double from, double to,
                    const SimulationOptions& options = {});

/// running_cost over [s, T] plus g(L_T).
double pathwise_cost(const ModelSpec& model, const DelayPolicy& policy, const Trajectory& trajectory,
                     const SimulationOptions& options = {});

/// Mean pathwise cost over n_paths paths; path p uses stream p of `seed`.
/// Reduction is in path order, so the result does not depend on threading.
McEstimate estimate_J(const ModelSpec& model, const DelayPolicy& policy, double s, int i, std::uint64_t n_paths,
                      std::uint64_t seed, const SimulationOptions& options = {});

/// Per-path functional: fills `out` from one simulated path.
using PathFunctional = std::function<void(const PathSegment&, std::span<double>)>;

/// Componentwise Monte Carlo means of a vector functional of the path.
std::vector<McEstimate> estimate_functional(const ModelSpec& model, const DelayPolicy& policy, double s, int i,
                                            std::uint64_t n_paths, std::uint64_t seed, std::size_t n_outputs,
                                            const PathFunctional& functional, const SimulationOptions& options = {});

struct LyapunovPoint {
  double time = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  ///< (phi(i) + kappa0 T) exp(lambda0 t)
  double margin = 0.0; ///< bound + 3 std_error - mean
  bool holds = false;
};

/// Monte Carlo E[phi(L_t)] at each checkpoint against the Gronwall moment bound.
std::vector<LyapunovPoint> lyapunov_trace(const ModelSpec& model, const DelayPolicy& policy, double s, int i,
                                          std::uint64_t n_paths, std::uint64_t seed, std::span<const double> checkpoints,
                                          const SimulationOptions& options = {});

struct JumpWindowPoint {
  double start = 0.0;
  double width = 0.0;
  double frequency = 0.0;  ///< fraction of paths with at least one jump in [start, start + width]
  double std_error = 0.0;
  double bound = 0.0;      ///< 1 - exp(-M width)
  bool holds = false;
};

/// Empirical probability of a jump inside each window against 1 - exp(-M width).
std::vector<JumpWindowPoint> jump_window_check(const ModelSpec& model, const DelayPolicy& policy, double s, int i,
                                               std::uint64_t n_paths, std::uint64_t seed, double width,
                                               std::span<const double> starts, const SimulationOptions& options = {});

}  // namespace ctmdp
