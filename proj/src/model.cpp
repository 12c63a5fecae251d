#include "ctmdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ctmdp/errors.hpp"

namespace ctmdp {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::malformed_model: return "MalformedModel";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::grid_mismatch: return "GridMismatch";
    case ErrorCode::stability_violation: return "StabilityViolation";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::time_out_of_range: return "TimeOutOfRange";
    case ErrorCode::invalid_envelope: return "InvalidEnvelope";
    case ErrorCode::missing_lyapunov: return "MissingLyapunov";
    case ErrorCode::complexity_budget_exceeded: return "ComplexityBudgetExceeded";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::malformed_model, what); }

}  // namespace

// ---------------------------------------------------------------------------
// ActionGrid

ActionGrid::ActionGrid(std::vector<std::vector<double>> points) {
  if (points.empty()) malformed("action grid is empty");
  dim_ = points.front().size();
  if (dim_ == 0) malformed("action points must have at least one coordinate");
  for (const auto& p : points) {
    if (p.size() != dim_) malformed("action points have inconsistent dimensions");
    for (double x : p)
      if (!std::isfinite(x)) malformed("action coordinates must be finite");
  }
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b)
      if (points[a] == points[b]) malformed("action grid points must be pairwise distinct");
  count_ = points.size();
  coords_.reserve(count_ * dim_);
  for (const auto& p : points) coords_.insert(coords_.end(), p.begin(), p.end());
}

std::span<const double> ActionGrid::point(std::size_t u) const {
  if (u >= count_) throw Error(ErrorCode::index_out_of_range, "action index " + std::to_string(u) + " out of range");
  return {coords_.data() + u * dim_, dim_};
}

double ActionGrid::distance(std::size_t u, std::size_t v) const {
  auto a = point(u);
  auto b = point(v);
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double ActionGrid::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < count_; ++a)
    for (std::size_t b = a + 1; b < count_; ++b) gap = std::min(gap, distance(a, b));
  return gap;
}

// ---------------------------------------------------------------------------
// Mixture

Mixture::Mixture(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorCode::invalid_argument, "mixture must have at least one weight");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::invalid_argument, "mixture weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "mixture weights sum to " << total << ", expected 1";
    throw Error(ErrorCode::invalid_argument, os.str());
  }
}

Mixture Mixture::dirac(std::size_t n_actions, std::size_t u) {
  if (u >= n_actions) throw Error(ErrorCode::index_out_of_range, "dirac action index out of range");
  std::vector<double> w(n_actions, 0.0);
  w[u] = 1.0;
  return Mixture(std::move(w));
}

Mixture Mixture::uniform(std::size_t n_actions) {
  return Mixture(std::vector<double>(n_actions, 1.0 / static_cast<double>(n_actions)));
}

Mixture blend(const Mixture& a, const Mixture& b, double lambda) {
  if (a.size() != b.size()) throw Error(ErrorCode::grid_mismatch, "mixtures over different grids");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::invalid_argument, "blend weight must lie in [0,1]");
  std::vector<double> w(a.size());
  for (std::size_t u = 0; u < w.size(); ++u) w[u] = lambda * a[u] + (1.0 - lambda) * b[u];
  return Mixture(std::move(w));
}

// ---------------------------------------------------------------------------
// ControlledGenerator

ControlledGenerator::ControlledGenerator(int n_states, std::size_t n_actions, std::span<const RateEntry> entries,
                                         std::optional<int> bandwidth)
    : n_states_(n_states), n_actions_(n_actions) {
  if (n_states < 1) malformed("n_states must be positive");
  if (n_actions < 1) malformed("generator needs at least one action");
  const auto n = static_cast<std::size_t>(n_states);
  rates_.assign(n_actions * n * n, 0.0);
  exit_.assign(n_actions * n, 0.0);
  std::vector<char> seen(rates_.size(), 0);
  std::vector<const RateEntry*> diagonal;

  for (const auto& e : entries) {
    if (e.from < 0 || e.from >= n_states || e.to < 0 || e.to >= n_states)
      malformed("rate entry state index out of range (" + std::to_string(e.from + 1) + ", " +
                std::to_string(e.to + 1) + ")");
    if (e.action >= n_actions) malformed("rate entry action index " + std::to_string(e.action) + " out of range");
    if (!std::isfinite(e.rate)) malformed("rate entries must be finite");
    if (e.from == e.to) {
      diagonal.push_back(&e);
      continue;
    }
    if (e.rate < 0.0) malformed("negative off-diagonal rate at (" + std::to_string(e.from + 1) + ", " +
                                std::to_string(e.to + 1) + ", " + std::to_string(e.action) + ")");
    std::size_t idx = (e.action * n + static_cast<std::size_t>(e.from)) * n + static_cast<std::size_t>(e.to);
    if (seen[idx]) malformed("duplicate rate entry (" + std::to_string(e.from + 1) + ", " + std::to_string(e.to + 1) +
                             ", " + std::to_string(e.action) + ")");
    seen[idx] = 1;
    rates_[idx] = e.rate;
  }

  neighbours_.assign(n, {});
  for (std::size_t u = 0; u < n_actions; ++u) {
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) total += rates_[(u * n + i) * n + j];
      exit_[u * n + i] = total;
      rates_[(u * n + i) * n + i] = -total;
      rate_bound_ = std::max(rate_bound_, total);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      bool any = false;
      for (std::size_t u = 0; u < n_actions; ++u) any = any || rates_[(u * n + i) * n + j] > 0.0;
      if (any) {
        neighbours_[i].push_back(static_cast<int>(j));
        observed_bandwidth_ = std::max(observed_bandwidth_, std::abs(static_cast<int>(j) - static_cast<int>(i)));
      }
    }
  }
  for (const RateEntry* e : diagonal) {
    double expected = -exit_[e->action * n + static_cast<std::size_t>(e->from)];
    if (std::abs(e->rate - expected) > 1e-12)
      malformed("diagonal entry for state " + std::to_string(e->from + 1) + ", action " + std::to_string(e->action) +
                " is inconsistent with the row sum");
  }
  if (bandwidth) {
    if (*bandwidth < 0) malformed("bandwidth must be nonnegative");
    bandwidth_ = *bandwidth;
  } else {
    bandwidth_ = observed_bandwidth_;
  }
}

void ControlledGenerator::check_state(int i) const {
  if (i < 0 || i >= n_states_)
    throw Error(ErrorCode::index_out_of_range, "state index " + std::to_string(i + 1) + " out of range");
}

double ControlledGenerator::rate(int i, int j, std::size_t u) const {
  check_state(i);
  check_state(j);
  if (u >= n_actions_) throw Error(ErrorCode::index_out_of_range, "action index out of range");
  return rate_unchecked(i, j, u);
}

double ControlledGenerator::exit_rate(int i, std::size_t u) const {
  check_state(i);
  if (u >= n_actions_) throw Error(ErrorCode::index_out_of_range, "action index out of range");
  return exit_rate_unchecked(i, u);
}

std::span<const int> ControlledGenerator::neighbours(int i) const {
  check_state(i);
  return neighbours_[static_cast<std::size_t>(i)];
}

std::vector<RateEntry> ControlledGenerator::entries() const {
  std::vector<RateEntry> out;
  for (std::size_t u = 0; u < n_actions_; ++u)
    for (int i = 0; i < n_states_; ++i)
      for (int j = 0; j < n_states_; ++j)
        if (i != j && rate_unchecked(i, j, u) > 0.0) out.push_back({i, j, u, rate_unchecked(i, j, u)});
  return out;
}

double rate_under_mixture(const ControlledGenerator& gen, int i, int j, const Mixture& mu) {
  if (mu.size() != gen.n_actions()) throw Error(ErrorCode::grid_mismatch, "mixture length differs from action count");
  double total = 0.0;
  for (std::size_t u = 0; u < mu.size(); ++u) total += mu[u] * gen.rate(i, j, u);
  return total;
}

// ---------------------------------------------------------------------------
// RunningCost

RunningCost RunningCost::linear(int n_states, const ActionGrid& grid, double constant, double time_coef,
                                double state_coef, std::vector<double> action_coef) {
  if (n_states < 1) malformed("n_states must be positive");
  if (!action_coef.empty() && action_coef.size() != grid.dim())
    malformed("linear cost action coefficients must match the action dimension");
  for (double c : {constant, time_coef, state_coef})
    if (!std::isfinite(c)) malformed("linear cost coefficients must be finite");
  RunningCost f(Kind::linear, n_states, grid.size());
  f.constant_ = constant;
  f.time_coef_ = time_coef;
  f.state_coef_ = state_coef;
  f.action_coef_ = std::move(action_coef);
  f.base_.resize(static_cast<std::size_t>(n_states) * grid.size());
  for (int i = 0; i < n_states; ++i) {
    for (std::size_t u = 0; u < grid.size(); ++u) {
      double v = constant + state_coef * i;
      auto p = grid.point(u);
      for (std::size_t k = 0; k < f.action_coef_.size(); ++k) v += f.action_coef_[k] * p[k];
      f.base_[static_cast<std::size_t>(i) * grid.size() + u] = v;
    }
  }
  return f;
}

RunningCost RunningCost::constant(int n_states, std::size_t n_actions, double value) {
  if (n_states < 1 || n_actions < 1) malformed("constant cost needs positive dimensions");
  if (!std::isfinite(value)) malformed("cost must be finite");
  RunningCost f(Kind::linear, n_states, n_actions);
  f.constant_ = value;
  f.base_.assign(static_cast<std::size_t>(n_states) * n_actions, value);
  return f;
}

RunningCost RunningCost::table(int n_states, std::size_t n_actions, std::vector<double> times,
                               std::vector<double> values) {
  if (n_states < 1 || n_actions < 1) malformed("cost table needs positive dimensions");
  if (times.empty()) malformed("cost table needs at least one time");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k])) malformed("cost table times must be finite");
    if (k > 0 && !(times[k] > times[k - 1])) malformed("cost table times must be strictly increasing");
  }
  const std::size_t layer = static_cast<std::size_t>(n_states) * n_actions;
  if (values.size() != times.size() * layer) malformed("cost table has the wrong number of values");
  for (double v : values)
    if (!std::isfinite(v)) malformed("cost table values must be finite");
  RunningCost f(Kind::table, n_states, n_actions);
  f.times_ = std::move(times);
  f.values_ = std::move(values);
  return f;
}

double RunningCost::operator()(double t, int i, std::size_t u) const noexcept {
  const std::size_t cell = static_cast<std::size_t>(i) * n_actions_ + u;
  if (kind_ == Kind::linear) return base_[cell] + time_coef_ * t;
  const std::size_t layer = static_cast<std::size_t>(n_states_) * n_actions_;
  if (t <= times_.front()) return values_[cell];
  if (t >= times_.back()) return values_[(times_.size() - 1) * layer + cell];
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
  double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
  double a = values_[k * layer + cell];
  double b = values_[(k + 1) * layer + cell];
  return a + w * (b - a);
}

double RunningCost::mixed(double t, int i, std::span<const double> weights) const noexcept {
  double total = 0.0;
  for (std::size_t u = 0; u < weights.size(); ++u)
    if (weights[u] != 0.0) total += weights[u] * (*this)(t, i, u);
  return total;
}

double RunningCost::min_value(double horizon) const {
  if (kind_ == Kind::linear) {
    double lo = std::numeric_limits<double>::infinity();
    for (double b : base_) lo = std::min({lo, b, b + time_coef_ * horizon});
    return lo;
  }
  return *std::min_element(values_.begin(), values_.end());
}

double RunningCost::max_value(double horizon) const {
  if (kind_ == Kind::linear) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double b : base_) hi = std::max({hi, b, b + time_coef_ * horizon});
    return hi;
  }
  return *std::max_element(values_.begin(), values_.end());
}

double RunningCost::time_lipschitz() const {
  if (kind_ == Kind::linear) return std::abs(time_coef_);
  const std::size_t layer = static_cast<std::size_t>(n_states_) * n_actions_;
  double slope = 0.0;
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
    double dt = times_[k + 1] - times_[k];
    for (std::size_t c = 0; c < layer; ++c)
      slope = std::max(slope, std::abs(values_[(k + 1) * layer + c] - values_[k * layer + c]) / dt);
  }
  return slope;
}

// ---------------------------------------------------------------------------
// ModelSpec

bool LyapunovSpec::in_b0(int i) const noexcept { return std::find(b0.begin(), b0.end(), i) != b0.end(); }

ModelSpec::ModelSpec(double horizon, ActionGrid grid, ControlledGenerator generator, CostSpec costs,
                     std::optional<LyapunovSpec> lyapunov)
    : horizon_(horizon),
      grid_(std::move(grid)),
      generator_(std::move(generator)),
      costs_(std::move(costs)),
      lyapunov_(std::move(lyapunov)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) malformed("horizon must be positive and finite");
  const int n = generator_.n_states();
  if (generator_.n_actions() != grid_.size()) malformed("generator action count differs from the action grid");
  if (costs_.running.n_states() != n || costs_.running.n_actions() != grid_.size())
    malformed("running cost dimensions differ from the model");
  if (costs_.terminal.size() != static_cast<std::size_t>(n)) malformed("terminal cost must have one entry per state");
  for (double g : costs_.terminal)
    if (!std::isfinite(g) || g < 0.0) malformed("terminal cost must be finite and nonnegative");
  if (costs_.running.min_value(horizon_) < 0.0) malformed("running cost must be nonnegative");
  if (lyapunov_) {
    const auto& ly = *lyapunov_;
    if (ly.phi.size() != static_cast<std::size_t>(n)) malformed("lyapunov phi must have one entry per state");
    for (double p : ly.phi)
      if (!std::isfinite(p)) malformed("lyapunov phi must be finite");
    if (!(ly.lambda0 > 0.0) || !std::isfinite(ly.lambda0)) malformed("lambda0 must be positive");
    if (!(ly.kappa0 >= 0.0) || !std::isfinite(ly.kappa0)) malformed("kappa0 must be nonnegative");
    for (int b : ly.b0)
      if (b < 0 || b >= n) malformed("B0 state out of range");
  }
  if (costs_.declared_bounds) {
    const auto& b = *costs_.declared_bounds;
    for (double c : {b.c0, b.c1, b.c2})
      if (!(c >= 0.0) || !std::isfinite(c)) malformed("cost bounds must be nonnegative and finite");
    bounds_ = b;
  } else {
    bounds_ = observed_bounds();
  }
}

CostBounds ModelSpec::observed_bounds() const {
  CostBounds b;
  b.c0 = costs_.running.time_lipschitz();
  b.c1 = std::max(std::abs(costs_.running.max_value(horizon_)), std::abs(costs_.running.min_value(horizon_)));
  for (double g : costs_.terminal) b.c2 = std::max(b.c2, std::abs(g));
  return b;
}

ModelSpec ModelSpec::with_terminal_cost(std::vector<double> g) const {
  CostSpec costs = costs_;
  costs.terminal = std::move(g);
  if (costs.declared_bounds) {
    // Keep the declared C2 honest for the new terminal data.
    double c2 = 0.0;
    for (double x : costs.terminal) c2 = std::max(c2, std::abs(x));
    costs.declared_bounds->c2 = std::max(costs.declared_bounds->c2, c2);
  }
  return ModelSpec(horizon_, grid_, generator_, std::move(costs), lyapunov_);
}

// ---------------------------------------------------------------------------
// validate

double lyapunov_drift(const ControlledGenerator& gen, std::span<const double> phi, int i, std::size_t u) {
  double drift = 0.0;
  for (int j : gen.neighbours(i))
    drift += gen.rate_unchecked(i, j, u) * (phi[static_cast<std::size_t>(j)] - phi[static_cast<std::size_t>(i)]);
  return drift;
}

AssumptionReport validate(const ModelSpec& model) {
  AssumptionReport r;
  const auto& gen = model.generator();
  const int n = model.n_states();

  r.rate_bound = gen.rate_bound();
  r.h1_pass = std::isfinite(r.rate_bound);
  if (!r.h1_pass) r.diagnostics.push_back("H1: rate bound is not finite");

  r.declared_bandwidth = gen.bandwidth();
  r.observed_bandwidth = gen.observed_bandwidth();
  r.h3_pass = r.observed_bandwidth <= r.declared_bandwidth;
  if (!r.h3_pass)
    r.diagnostics.push_back("H3: nonzero rate with |j - i| = " + std::to_string(r.observed_bandwidth) +
                            " exceeds K = " + std::to_string(r.declared_bandwidth));

  r.h2_present = model.lyapunov().has_value();
  if (r.h2_present) {
    const auto& ly = *model.lyapunov();
    bool phi_ok = std::all_of(ly.phi.begin(), ly.phi.end(), [](double p) { return p >= 1.0; });
    if (!phi_ok) r.diagnostics.push_back("H2: phi must be >= 1 on every state");
    r.h2_min_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double allowance = ly.lambda0 * ly.phi[static_cast<std::size_t>(i)] + (ly.in_b0(i) ? ly.kappa0 : 0.0);
      for (std::size_t u = 0; u < model.n_actions(); ++u) {
        double margin = allowance - lyapunov_drift(gen, ly.phi, i, u);
        if (margin < r.h2_min_margin) {
          r.h2_min_margin = margin;
          r.h2_worst_state = i;
          r.h2_worst_action = u;
        }
      }
    }
    r.h2_pass = phi_ok && r.h2_min_margin >= 0.0;
    if (phi_ok && !r.h2_pass)
      r.diagnostics.push_back("H2: drift inequality fails at state " + std::to_string(r.h2_worst_state + 1) +
                              ", action " + std::to_string(r.h2_worst_action));
  } else {
    r.diagnostics.push_back("H2: no Lyapunov data supplied");
  }

  r.declared = model.bounds();
  r.observed = model.observed_bounds();
  auto covers = [](double declared, double observed) { return observed <= declared + 1e-12 * std::max(1.0, observed); };
  r.costs_pass = covers(r.declared.c0, r.observed.c0) && covers(r.declared.c1, r.observed.c1) &&
                 covers(r.declared.c2, r.observed.c2);
  if (!r.costs_pass) r.diagnostics.push_back("cost bounds C0/C1/C2 do not cover the cost data");
  return r;
}

}  // namespace ctmdp
