#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ctmdp/errors.hpp"
#include "ctmdp/verify.hpp"

namespace ctmdp {
namespace {

constexpr double kCandidateBudget = 1e6;
constexpr int kMaxOracleStates = 6;

// Transition matrix and expected running cost over one interval under a
// fixed per-state action assignment: exp(L [[Q, c], [0, 0]]) = [[P, r], [0, 1]].
struct IntervalFlow {
  Eigen::MatrixXd transition;
  Eigen::VectorXd cost;
};

IntervalFlow interval_flow(const ModelSpec& model, std::span<const std::size_t> actions, double from, double to) {
  const int n = model.n_states();
  const double length = to - from;
  const double mid = 0.5 * (from + to);
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i < n; ++i) {
    const std::size_t u = actions[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) aug(i, j) = model.generator().rate_unchecked(i, j, u);
    aug(i, n) = model.running_cost()(mid, i, u);
  }
  Eigen::MatrixXd e = (aug * length).exp();
  return {e.topLeftCorner(n, n), e.col(n).head(n)};
}

std::vector<std::size_t> decode_assignment(std::size_t code, int n_states, std::size_t n_actions) {
  std::vector<std::size_t> a(static_cast<std::size_t>(n_states));
  for (auto& u : a) {
    u = code % n_actions;
    code /= n_actions;
  }
  return a;
}

double power(double base, double exponent) { return std::pow(base, exponent); }

void check_oracle_inputs(const ModelSpec& model, double s, int i, std::size_t n_intervals) {
  if (!(s >= 0.0 && s < model.horizon())) throw Error(ErrorCode::time_out_of_range, "start time must lie in [0, T)");
  if (i < 0 || i >= model.n_states()) throw Error(ErrorCode::index_out_of_range, "start state out of range");
  if (n_intervals < 1) throw Error(ErrorCode::invalid_argument, "oracle needs at least one interval");
  if (model.n_states() > kMaxOracleStates)
    throw Error(ErrorCode::complexity_budget_exceeded,
                "oracle supports at most " + std::to_string(kMaxOracleStates) + " states");
}

}  // namespace

double evaluate_piecewise_policy(const ModelSpec& model, double s, int i,
                                 std::span<const std::vector<std::size_t>> assignments) {
  check_oracle_inputs(model, s, i, assignments.size());
  const int n = model.n_states();
  const double width = (model.horizon() - s) / static_cast<double>(assignments.size());
  Eigen::RowVectorXd dist = Eigen::RowVectorXd::Zero(n);
  dist(i) = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < assignments.size(); ++k) {
    if (assignments[k].size() != static_cast<std::size_t>(n))
      throw Error(ErrorCode::invalid_argument, "assignment needs one action per state");
    for (auto u : assignments[k])
      if (u >= model.n_actions()) throw Error(ErrorCode::index_out_of_range, "assignment action out of range");
    const double a = s + width * static_cast<double>(k);
    const double b = k + 1 == assignments.size() ? model.horizon() : a + width;
    IntervalFlow flow = interval_flow(model, assignments[k], a, b);
    total += dist.dot(flow.cost);
    dist = dist * flow.transition;
  }
  const Eigen::Map<const Eigen::VectorXd> g(model.terminal_cost().data(), n);
  return total + dist.dot(g);
}

double brute_force_value(const ModelSpec& model, double s, int i, std::size_t n_intervals, OracleClass oracle_class) {
  check_oracle_inputs(model, s, i, n_intervals);
  const int n = model.n_states();
  const std::size_t n_actions = model.n_actions();
  const double per_interval = power(static_cast<double>(n_actions), n);
  const double candidates = oracle_class == OracleClass::exhaustive
                                ? power(per_interval, static_cast<double>(n_intervals))
                                : per_interval * static_cast<double>(n_intervals);
  if (candidates > kCandidateBudget)
    throw Error(ErrorCode::complexity_budget_exceeded,
                "oracle would enumerate " + std::to_string(candidates) + " candidates (budget 1e6)");
  const auto assignments = static_cast<std::size_t>(per_interval);

  const double width = (model.horizon() - s) / static_cast<double>(n_intervals);
  auto interval_start = [&](std::size_t k) { return s + width * static_cast<double>(k); };
  auto interval_end = [&](std::size_t k) { return k + 1 == n_intervals ? model.horizon() : interval_start(k + 1); };

  // flows[k][a]
  std::vector<std::vector<IntervalFlow>> flows(n_intervals);
  for (std::size_t k = 0; k < n_intervals; ++k) {
    flows[k].reserve(assignments);
    for (std::size_t a = 0; a < assignments; ++a)
      flows[k].push_back(interval_flow(model, decode_assignment(a, n, n_actions), interval_start(k), interval_end(k)));
  }
  const Eigen::Map<const Eigen::VectorXd> g(model.terminal_cost().data(), n);

  if (oracle_class == OracleClass::backward) {
    Eigen::VectorXd w = g;
    for (std::size_t k = n_intervals; k-- > 0;) {
      Eigen::VectorXd best = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
      for (const auto& flow : flows[k]) best = best.cwiseMin(flow.cost + flow.transition * w);
      w = best;
    }
    return w(i);
  }

  // Depth-first enumeration sharing prefixes: distribution and accumulated cost per depth.
  std::vector<Eigen::RowVectorXd> dist(n_intervals + 1, Eigen::RowVectorXd::Zero(n));
  std::vector<double> acc(n_intervals + 1, 0.0);
  dist[0](i) = 1.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> choice(n_intervals, 0);
  std::size_t depth = 0;
  while (true) {
    if (depth == n_intervals) {
      best = std::min(best, acc[depth] + dist[depth].dot(g));
      // backtrack
      while (depth > 0 && choice[depth - 1] + 1 == assignments) choice[--depth] = 0;
      if (depth == 0) break;
      ++choice[depth - 1];
      --depth;
    }
    const IntervalFlow& flow = flows[depth][choice[depth]];
    acc[depth + 1] = acc[depth] + dist[depth].dot(flow.cost);
    dist[depth + 1] = dist[depth] * flow.transition;
    ++depth;
  }
  return best;
}

}  // namespace ctmdp
