#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ctmdp/hjb.hpp"
#include "ctmdp/model.hpp"
#include "ctmdp/policy.hpp"
#include "ctmdp/simulate.hpp"

namespace ctmdp {

struct ExperimentReport {
  std::string name;
  std::map<std::string, double> quantities;
  bool passed = false;
  double tolerance = 0.0;
  std::string details;
};

enum class StoppingRule {
  deterministic,      ///< tau = t1
  first_jump_capped,  ///< tau = min(first jump time, t1)
};

struct DppConfig {
  StoppingRule rule = StoppingRule::deterministic;
  double t1 = 0.5;
  std::size_t n_random_policies = 20;
  DelayParams random_params{0.1, 1, 0.0};
};

/**
 * Dynamic programming check at (s, i): E[int_s^tau f dt + V(tau, L_tau)]
 * must equal V(s, i) under the HJB feedback and dominate it under random
 * delay policies, both up to 3 standard errors plus the scheme tolerance.
 */
ExperimentReport dpp_check(const ModelSpec& model, const ValueFunction& value, double s, int i, const DppConfig& config,
                           std::uint64_t n_paths, std::uint64_t seed, const SimulationOptions& options = {});

/// Empirical time-Lipschitz constant of V against 3 C1 + 2 M C2 + T C0 (+ 10 dt M C1).
ExperimentReport lipschitz_check(const ModelSpec& model, const ValueFunction& value);

/// Random delay policies cannot beat V(s, i); the delay-free feedback attains it.
ExperimentReport delay_no_gain(const ModelSpec& model, const ValueFunction& value, const DelayParams& params,
                               std::size_t n_policies, std::uint64_t n_paths, std::uint64_t seed, double s = 0.0,
                               int i = 0, const SimulationOptions& options = {});

enum class OracleClass {
  /// One per-state action assignment per interval, enumerated jointly over all intervals.
  exhaustive,
  /// Per-interval enumeration with a backward pass; the assignment may depend
  /// on the state at the start of the interval.
  backward,
};

/// Best expected cost over piecewise-constant deterministic policies on
/// n_intervals equal sub-intervals of [s, T], each candidate evaluated exactly
/// with matrix exponentials of the augmented (cost-carrying) generator.
double brute_force_value(const ModelSpec& model, double s, int i, std::size_t n_intervals,
                         OracleClass oracle_class = OracleClass::backward);

/// Exact expected cost of one per-(interval, state) assignment sequence.
double evaluate_piecewise_policy(const ModelSpec& model, double s, int i,
                                 std::span<const std::vector<std::size_t>> assignments);

/// Oracle values for each n_intervals must sit above V(s, i) - 1e-3, be
/// nonincreasing, and end within 5e-3 of V(s, i).
ExperimentReport oracle_check(const ModelSpec& model, const ValueFunction& value, double s, int i,
                              std::span<const std::size_t> intervals);

}  // namespace ctmdp
