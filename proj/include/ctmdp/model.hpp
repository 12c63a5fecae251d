#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ctmdp {

// States are 0-based in the C++ API (state i here is state i+1 in model
// files, CSV output, and the C API). Action indices are 0-based everywhere.

/// Finite set of distinct action points in R^k.
class ActionGrid {
 public:
  explicit ActionGrid(std::vector<std::vector<double>> points);

  std::size_t size() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> point(std::size_t u) const;
  /// Euclidean distance between two grid points.
  double distance(std::size_t u, std::size_t v) const;
  double min_gap() const;

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// Probability vector over an ActionGrid.
class Mixture {
 public:
  static constexpr double kNormTolerance = 1e-12;

  explicit Mixture(std::vector<double> weights);
  static Mixture dirac(std::size_t n_actions, std::size_t u);
  static Mixture uniform(std::size_t n_actions);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t u) const { return weights_[u]; }
  std::span<const double> weights() const noexcept { return weights_; }

  friend bool operator==(const Mixture&, const Mixture&) = default;

 private:
  std::vector<double> weights_;
};

/// lambda * a + (1 - lambda) * b.
Mixture blend(const Mixture& a, const Mixture& b, double lambda);

struct RateEntry {
  int from = 0;
  int to = 0;
  std::size_t action = 0;
  double rate = 0.0;
};

/**
 * Action-level transition rates q_ij(u). Diagonal entries are reconstructed
 * as -sum_{j != i} q_ij(u), so every row is conservative exactly as stored.
 * Rates under a mixture are the affine extension q_ij(mu) = sum_u mu(u) q_ij(u).
 */
class ControlledGenerator {
 public:
  /// Entries with from == to are accepted only if they match the
  /// reconstructed diagonal within 1e-12. Duplicate off-diagonal entries,
  /// negative rates and out-of-range indices throw MalformedModel.
  /// Without a declared bandwidth the observed one is used.
  ControlledGenerator(int n_states, std::size_t n_actions, std::span<const RateEntry> entries,
                      std::optional<int> bandwidth = std::nullopt);

  int n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  int bandwidth() const noexcept { return bandwidth_; }
  /// Largest |j - i| over nonzero rates.
  int observed_bandwidth() const noexcept { return observed_bandwidth_; }
  /// M = max_{i,u} q_i(u); equals sup over mixtures by affineness.
  double rate_bound() const noexcept { return rate_bound_; }

  /// q_ij(u), including the diagonal.
  double rate(int i, int j, std::size_t u) const;
  double exit_rate(int i, std::size_t u) const;
  /// States j != i with q_ij(u) > 0 for some u, ascending.
  std::span<const int> neighbours(int i) const;

  /// Unchecked accessors for inner loops.
  double rate_unchecked(int i, int j, std::size_t u) const noexcept {
    return rates_[(u * static_cast<std::size_t>(n_states_) + static_cast<std::size_t>(i)) *
                      static_cast<std::size_t>(n_states_) +
                  static_cast<std::size_t>(j)];
  }
  double exit_rate_unchecked(int i, std::size_t u) const noexcept {
    return exit_[u * static_cast<std::size_t>(n_states_) + static_cast<std::size_t>(i)];
  }

  /// Nonzero off-diagonal entries in (action, from, to) order.
  std::vector<RateEntry> entries() const;

 private:
  void check_state(int i) const;

  int n_states_;
  std::size_t n_actions_;
  int bandwidth_ = 0;
  int observed_bandwidth_ = 0;
  double rate_bound_ = 0.0;
  std::vector<double> rates_;  // [u][i][j]
  std::vector<double> exit_;   // [u][i]
  std::vector<std::vector<int>> neighbours_;
};

/// q_ij(mu) = sum_u mu(u) q_ij(u); i == j gives -q_i(mu).
double rate_under_mixture(const ControlledGenerator& gen, int i, int j, const Mixture& mu);

/// L1-Wasserstein distance between two mixtures on the same grid.
/// One-dimensional grids use the CDF formula; otherwise the transport LP is solved.
double wasserstein1(const Mixture& a, const Mixture& b, const ActionGrid& grid);

/// Running cost f(t, i, u), piecewise linear in t.
class RunningCost {
 public:
  /// f = constant + time_coef * t + state_coef * i + sum_k action_coef[k] * u_k,
  /// with i the 0-based state index. An empty action_coef means zero.
  static RunningCost linear(int n_states, const ActionGrid& grid, double constant, double time_coef,
                            double state_coef, std::vector<double> action_coef);
  static RunningCost constant(int n_states, std::size_t n_actions, double value);
  /// values laid out [time][state][action]; linear interpolation in t,
  /// held constant outside [times.front(), times.back()].
  static RunningCost table(int n_states, std::size_t n_actions, std::vector<double> times,
                           std::vector<double> values);

  bool is_table() const noexcept { return kind_ == Kind::table; }
  int n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  double operator()(double t, int i, std::size_t u) const noexcept;
  /// f(t, i, mu) = sum_u mu(u) f(t, i, u).
  double mixed(double t, int i, std::span<const double> weights) const noexcept;

  /// Times where f may have a kink (table knots).
  std::span<const double> knots() const noexcept { return times_; }

  // Exact extrema over [0, T] x states x actions (f is piecewise linear in t).
  double min_value(double horizon) const;
  double max_value(double horizon) const;
  double time_lipschitz() const;

  // Linear-form parameters, meaningful only when !is_table().
  double linear_constant() const noexcept { return constant_; }
  double linear_time_coef() const noexcept { return time_coef_; }
  double linear_state_coef() const noexcept { return state_coef_; }
  const std::vector<double>& linear_action_coef() const noexcept { return action_coef_; }
  const std::vector<double>& table_values() const noexcept { return values_; }

 private:
  enum class Kind { linear, table };
  RunningCost(Kind kind, int n_states, std::size_t n_actions) : kind_(kind), n_states_(n_states), n_actions_(n_actions) {}

  Kind kind_;
  int n_states_;
  std::size_t n_actions_;
  // linear: f = base_[i][u] + time_coef_ * t
  std::vector<double> base_;
  double constant_ = 0.0, time_coef_ = 0.0, state_coef_ = 0.0;
  std::vector<double> action_coef_;
  // table
  std::vector<double> times_;
  std::vector<double> values_;
};

struct CostBounds {
  double c0 = 0.0;  ///< time-Lipschitz modulus of f
  double c1 = 0.0;  ///< sup |f|
  double c2 = 0.0;  ///< sup |g|
};

struct CostSpec {
  RunningCost running;
  std::vector<double> terminal;
  /// Declared bounds; when absent the exact observed bounds are used.
  std::optional<CostBounds> declared_bounds;
};

struct LyapunovSpec {
  std::vector<double> phi;
  double lambda0 = 0.0;
  double kappa0 = 0.0;
  std::vector<int> b0;

  bool in_b0(int i) const noexcept;
};

/// A full finite-horizon CTMDP instance on states 0..n-1.
class ModelSpec {
 public:
  ModelSpec(double horizon, ActionGrid grid, ControlledGenerator generator, CostSpec costs,
            std::optional<LyapunovSpec> lyapunov = std::nullopt);

  int n_states() const noexcept { return generator_.n_states(); }
  std::size_t n_actions() const noexcept { return grid_.size(); }
  double horizon() const noexcept { return horizon_; }
  const ActionGrid& grid() const noexcept { return grid_; }
  const ControlledGenerator& generator() const noexcept { return generator_; }
  const RunningCost& running_cost() const noexcept { return costs_.running; }
  const std::vector<double>& terminal_cost() const noexcept { return costs_.terminal; }
  const CostSpec& costs() const noexcept { return costs_; }
  const std::optional<LyapunovSpec>& lyapunov() const noexcept { return lyapunov_; }

  /// Declared bounds if present, otherwise the observed ones.
  const CostBounds& bounds() const noexcept { return bounds_; }
  CostBounds observed_bounds() const;
  double rate_bound() const noexcept { return generator_.rate_bound(); }

  /// Same model with a different terminal cost.
  ModelSpec with_terminal_cost(std::vector<double> g) const;

 private:
  double horizon_;
  ActionGrid grid_;
  ControlledGenerator generator_;
  CostSpec costs_;
  std::optional<LyapunovSpec> lyapunov_;
  CostBounds bounds_;
};

struct AssumptionReport {
  bool h1_pass = false;
  double rate_bound = 0.0;  ///< M

  bool h2_present = false;
  bool h2_pass = false;
  /// min over (i, u) of lambda0 phi(i) + kappa0 1_B0(i) - drift(i, u)
  double h2_min_margin = 0.0;
  int h2_worst_state = -1;
  std::size_t h2_worst_action = 0;

  bool h3_pass = false;
  int declared_bandwidth = 0;
  int observed_bandwidth = 0;

  bool costs_pass = false;
  CostBounds declared;
  CostBounds observed;
  std::vector<std::string> diagnostics;

  bool all_pass() const noexcept { return h1_pass && h2_pass && h3_pass && costs_pass; }
};

/// Mechanical check of H1-H3 and the cost bounds. Deterministic.
AssumptionReport validate(const ModelSpec& model);

/// Sum_{j != i} q_ij(u) (phi(j) - phi(i)).
double lyapunov_drift(const ControlledGenerator& gen, std::span<const double> phi, int i, std::size_t u);

}  // namespace ctmdp
