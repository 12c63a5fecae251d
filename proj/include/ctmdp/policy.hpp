#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "ctmdp/hjb.hpp"
#include "ctmdp/model.hpp"
#include "ctmdp/time_grid.hpp"

namespace ctmdp {

/// Delay interval r0, number of delays m, start time s.
struct DelayParams {
  double r0 = 0.0;
  int m = 0;
  double s = 0.0;
};

/**
 * Right-continuous step path on [start_time, end_time]: the state on
 * [jump_times[k-1], jump_times[k]) is states[k], with jump_times[-1] taken as
 * start_time.
 */
class PathSegment {
 public:
  PathSegment(double start_time, double end_time, int start_state);
  PathSegment(double start_time, double end_time, std::vector<double> jump_times, std::vector<int> states);

  /// Appends a jump to `state` at time t (strictly after the last jump).
  void append_jump(double t, int state);

  /// State at time t; throws TimeOutOfRange outside [start_time, end_time].
  int state_at(double t) const;
  int state_at_unchecked(double t) const noexcept;

  double start_time() const noexcept { return start_time_; }
  double end_time() const noexcept { return end_time_; }
  int start_state() const noexcept { return states_.front(); }
  int final_state() const noexcept { return states_.back(); }
  std::span<const double> jump_times() const noexcept { return jump_times_; }
  std::span<const int> states() const noexcept { return states_; }
  std::size_t jump_count() const noexcept { return jump_times_.size(); }

 private:
  double start_time_;
  double end_time_;
  std::vector<double> jump_times_;
  std::vector<int> states_;
};

/// Path state at (t - k r0) v s.
int shift_eval(const PathSegment& path, int k, double r0, double s, double t);

enum class PolicyKind { markov, delayed, multi_delay, deterministic_curve, feedback };

const char* policy_kind_name(PolicyKind kind) noexcept;
PolicyKind parse_policy_kind(std::string_view name);

// Policy maps h(t_node, i0, ..., im). Slot k holds the state at (t - k r0) v s.

struct ConstantRule {
  Mixture mixture;
};

/// Dirac at actions[state in `slot`].
struct StateActionRule {
  std::vector<std::size_t> actions;
  int slot = 0;
};

/// Dirac at argmin[node][slot-0 state].
struct FeedbackRule {
  int n_states = 0;
  std::vector<int> argmin;
};

/// Dirichlet(1,...,1) mixture per (node, slots), generated on demand from a hash of the key.
struct RandomRule {
  std::uint64_t seed = 0;
};

/// Explicit entries keyed by (node, i0, ..., im); `fallback` covers missing keys.
struct TableRule {
  std::map<std::vector<int>, std::vector<double>> entries;
  std::optional<Mixture> fallback;
};

using PolicyRule = std::variant<ConstantRule, StateActionRule, FeedbackRule, RandomRule, TableRule>;

/**
 * Randomized delay-dependent control: mu_t = h(t, theta^0 L(t), ..., theta^m L(t)).
 * h is piecewise constant in t on an optional time grid (left node for
 * t in [t_n, t_{n+1})); without a grid it is time independent. Immutable;
 * evaluation is a pure function of (policy, path, t).
 */
class DelayPolicy {
 public:
  DelayPolicy(DelayParams params, PolicyKind kind, std::optional<TimeGrid> grid, PolicyRule rule,
              int n_states, std::size_t n_actions);

  const DelayParams& params() const noexcept { return params_; }
  PolicyKind kind() const noexcept { return kind_; }
  const std::optional<TimeGrid>& grid() const noexcept { return grid_; }
  const PolicyRule& rule() const noexcept { return *rule_; }
  int n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  /// Times in the grid where h may change.
  std::span<const double> breakpoints() const noexcept;
  std::size_t node_index(double t) const noexcept { return grid_ ? grid_->left_index(t) : 0; }

  Mixture control_at(const PathSegment& path, double t) const;
  /// Allocation-free variant; `slots` must have m + 1 entries.
  void control_into(const PathSegment& path, double t, std::span<int> slots, std::span<double> out) const;
  /// h at an explicit (node, slots) key.
  void evaluate(std::size_t node, std::span<const int> slots, std::span<double> out) const;

  /// Same h with the start time moved to s.
  DelayPolicy anchored_at(double s) const;
  /// Same h viewed as a delay policy with more delay slots (extra slots are ignored by h).
  DelayPolicy with_delay(DelayParams params) const;

 private:
  DelayParams params_;
  PolicyKind kind_;
  std::optional<TimeGrid> grid_;
  std::shared_ptr<const PolicyRule> rule_;
  int n_states_;
  std::size_t n_actions_;
};

/// Markov policy choosing the Hamiltonian minimizer stored in `value`.
DelayPolicy feedback_from_value(const ValueFunction& value, const ModelSpec& model);

/// Policy with h(t_n, i0..im) drawn from Dirichlet(1,...,1) independently per key; deterministic in seed.
DelayPolicy random_delay_policy(const ModelSpec& model, const DelayParams& params, std::uint64_t seed,
                                const TimeGrid& grid);

}  // namespace ctmdp
