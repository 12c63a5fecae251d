#include "ctmdp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ctmdp/errors.hpp"
#include "ctmdp/rng.hpp"

namespace ctmdp {
namespace {

void check_value(const ModelSpec& model, const ValueFunction& value) {
  if (value.n_states() != model.n_states() ||
      std::abs(value.grid().horizon() - model.horizon()) > 1e-12 * std::max(1.0, model.horizon()))
    throw Error(ErrorCode::grid_mismatch, "value function does not belong to this model");
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Stream seeds for the members of a policy family.
std::uint64_t member_seed(std::uint64_t seed, std::uint64_t member, std::uint64_t salt) {
  return hash_words(seed, {member, salt});
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  double pos = q * static_cast<double>(xs.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace

ExperimentReport dpp_check(const ModelSpec& model, const ValueFunction& value, double s, int i, const DppConfig& config,
                           std::uint64_t n_paths, std::uint64_t seed, const SimulationOptions& options) {
  check_value(model, value);
  if (!(config.t1 > s && config.t1 <= model.horizon()))
    throw Error(ErrorCode::time_out_of_range, "dpp_check needs s < t1 <= T");

  const double v0 = value.interpolate(s, i);
  const double tol = scheme_tolerance(model, value.grid().step());
  const double t1 = config.t1;
  const bool capped = config.rule == StoppingRule::first_jump_capped;

  auto dpp_mean = [&](const DelayPolicy& policy, std::uint64_t policy_seed) {
    DelayPolicy anchored = policy.anchored_at(s);
    auto functional = [&](const PathSegment& path, std::span<double> out) {
      double tau = t1;
      if (capped && path.jump_count() > 0) tau = std::min(tau, path.jump_times().front());
      out[0] = running_cost(model, anchored, path, s, tau, options) + value.interpolate(tau, path.state_at(tau));
    };
    return estimate_functional(model, anchored, s, i, n_paths, policy_seed, 1, functional, options).front();
  };

  ExperimentReport r;
  r.name = capped ? "dpp_first_jump_capped" : "dpp_deterministic";
  r.tolerance = tol;
  r.quantities["V"] = v0;
  r.quantities["s"] = s;
  r.quantities["state"] = i + 1;
  r.quantities["t1"] = t1;
  r.quantities["scheme_tolerance"] = tol;

  McEstimate fb = dpp_mean(feedback_from_value(value, model), member_seed(seed, 0, 0xfeedULL));
  const double fb_gap = fb.mean - v0;
  const bool fb_ok = std::abs(fb_gap) <= 3.0 * fb.std_error + tol;
  r.quantities["feedback_mean"] = fb.mean;
  r.quantities["feedback_stderr"] = fb.std_error;
  r.quantities["feedback_gap"] = fb_gap;

  DelayParams params = config.random_params;
  params.s = s;
  double worst_slack = std::numeric_limits<double>::infinity();
  double min_gap = std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (std::size_t p = 0; p < config.n_random_policies; ++p) {
    DelayPolicy policy = random_delay_policy(model, params, member_seed(seed, p, 0xd0110ULL), value.grid());
    McEstimate est = dpp_mean(policy, member_seed(seed, p + 1, 0xa11ULL));
    const double gap = est.mean - v0;
    const double slack = gap + 3.0 * est.std_error + tol;
    min_gap = std::min(min_gap, gap);
    worst_slack = std::min(worst_slack, slack);
    if (slack < 0.0) ++violations;
  }
  r.quantities["random_policies"] = static_cast<double>(config.n_random_policies);
  r.quantities["random_min_gap"] = config.n_random_policies ? min_gap : 0.0;
  r.quantities["random_worst_slack"] = config.n_random_policies ? worst_slack : 0.0;
  r.quantities["random_violations"] = static_cast<double>(violations);
  r.quantities["n_paths"] = static_cast<double>(n_paths);

  r.passed = fb_ok && violations == 0;
  r.details = "feedback |gap| " + fmt(std::abs(fb_gap)) + " vs " + fmt(3.0 * fb.std_error + tol) + "; " +
              std::to_string(violations) + " of " + std::to_string(config.n_random_policies) +
              " random delay policies fall below V - (3 stderr + tol)";
  return r;
}

ExperimentReport lipschitz_check(const ModelSpec& model, const ValueFunction& value) {
  check_value(model, value);
  const auto& grid = value.grid();
  const auto& b = model.bounds();
  const double dt = grid.step();
  const double m = model.rate_bound();
  double empirical = 0.0;
  for (std::size_t n = 0; n + 1 < grid.size(); ++n)
    for (int i = 0; i < model.n_states(); ++i)
      empirical = std::max(empirical, std::abs(value.value(n + 1, i) - value.value(n, i)) / dt);
  const double constant = 3.0 * b.c1 + 2.0 * m * b.c2 + model.horizon() * b.c0;
  const double slack = 10.0 * dt * m * b.c1;

  ExperimentReport r;
  r.name = "lipschitz";
  r.tolerance = slack;
  r.quantities["empirical_constant"] = empirical;
  r.quantities["bound_constant"] = constant;
  r.quantities["C0"] = b.c0;
  r.quantities["C1"] = b.c1;
  r.quantities["C2"] = b.c2;
  r.quantities["M"] = m;
  r.quantities["dt"] = dt;
  r.passed = empirical <= constant + slack;
  r.details = "max |V(t_{n+1},i) - V(t_n,i)| / dt = " + fmt(empirical) + " against 3C1 + 2MC2 + TC0 = " + fmt(constant);
  return r;
}

ExperimentReport delay_no_gain(const ModelSpec& model, const ValueFunction& value, const DelayParams& params,
                               std::size_t n_policies, std::uint64_t n_paths, std::uint64_t seed, double s, int i,
                               const SimulationOptions& options) {
  check_value(model, value);
  if (params.m < 1) throw Error(ErrorCode::invalid_argument, "delay_no_gain needs m >= 1");
  const double v0 = value.interpolate(s, i);
  const double tol = scheme_tolerance(model, value.grid().step());
  DelayParams anchored = params;
  anchored.s = s;

  ExperimentReport r;
  r.name = "delay_no_gain";
  r.tolerance = tol;
  r.quantities["V"] = v0;
  r.quantities["s"] = s;
  r.quantities["state"] = i + 1;
  r.quantities["r0"] = params.r0;
  r.quantities["m"] = params.m;
  r.quantities["scheme_tolerance"] = tol;
  r.quantities["n_paths"] = static_cast<double>(n_paths);
  r.quantities["random_policies"] = static_cast<double>(n_policies);

  DelayPolicy feedback = feedback_from_value(value, model);
  McEstimate fb = estimate_J(model, feedback, s, i, n_paths, member_seed(seed, 0, 0xfeedULL), options);
  const double fb_gap = fb.mean - v0;
  const bool fb_ok = std::abs(fb_gap) <= 3.0 * fb.std_error + tol;
  r.quantities["feedback_mean"] = fb.mean;
  r.quantities["feedback_stderr"] = fb.std_error;
  r.quantities["feedback_gap"] = fb_gap;

  // The feedback viewed as a delay policy whose h ignores the delayed slots.
  McEstimate embedded = estimate_J(model, feedback.with_delay(anchored), s, i, n_paths,
                                   member_seed(seed, 0, 0xe4bedULL), options);
  r.quantities["embedded_feedback_gap"] = embedded.mean - v0;
  r.quantities["embedded_feedback_stderr"] = embedded.std_error;

  std::vector<double> gaps;
  std::size_t violations = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n_policies; ++p) {
    DelayPolicy policy = random_delay_policy(model, anchored, member_seed(seed, p, 0xd0110ULL), value.grid());
    McEstimate est = estimate_J(model, policy, s, i, n_paths, member_seed(seed, p + 1, 0xa11ULL), options);
    const double gap = est.mean - v0;
    const double slack = gap + 3.0 * est.std_error + tol;
    gaps.push_back(gap);
    worst_slack = std::min(worst_slack, slack);
    if (slack < 0.0) ++violations;
  }
  if (!gaps.empty()) {
    r.quantities["gap_min"] = *std::min_element(gaps.begin(), gaps.end());
    r.quantities["gap_max"] = *std::max_element(gaps.begin(), gaps.end());
    r.quantities["gap_mean"] = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    r.quantities["gap_q25"] = quantile(gaps, 0.25);
    r.quantities["gap_median"] = quantile(gaps, 0.5);
    r.quantities["gap_q75"] = quantile(gaps, 0.75);
    r.quantities["worst_slack"] = worst_slack;
  }
  r.quantities["violations"] = static_cast<double>(violations);
  r.passed = fb_ok && violations == 0;
  r.details = "feedback |gap| " + fmt(std::abs(fb_gap)) + " vs " + fmt(3.0 * fb.std_error + tol) + "; " +
              std::to_string(violations) + " of " + std::to_string(n_policies) +
              " random delay policies beat V by more than 3 stderr + tol";
  return r;
}

ExperimentReport oracle_check(const ModelSpec& model, const ValueFunction& value, double s, int i,
                              std::span<const std::size_t> intervals) {
  check_value(model, value);
  if (intervals.empty()) throw Error(ErrorCode::invalid_argument, "oracle_check needs at least one interval count");
  constexpr double kBelowTolerance = 1e-3;
  constexpr double kFinalGap = 5e-3;
  constexpr double kMonotoneSlack = 1e-9;
  const double v0 = value.interpolate(s, i);

  ExperimentReport r;
  r.name = "oracle";
  r.tolerance = kFinalGap;
  r.quantities["V"] = v0;
  r.quantities["s"] = s;
  r.quantities["state"] = i + 1;
  bool above = true, monotone = true;
  double previous = std::numeric_limits<double>::infinity();
  double last = v0;
  for (std::size_t k : intervals) {
    double oracle = brute_force_value(model, s, i, k, OracleClass::backward);
    r.quantities["oracle_" + std::to_string(k)] = oracle;
    above = above && oracle >= v0 - kBelowTolerance;
    monotone = monotone && oracle <= previous + kMonotoneSlack;
    previous = oracle;
    last = oracle;
  }
  const double gap = last - v0;
  r.quantities["final_gap"] = gap;
  r.passed = above && monotone && std::abs(gap) <= kFinalGap;
  r.details = std::string("oracle ") + (above ? ">=" : "NOT >=") + " V - 1e-3, " +
              (monotone ? "nonincreasing" : "NOT nonincreasing") + " in n_intervals, final gap " + fmt(gap);
  return r;
}

}  // namespace ctmdp
