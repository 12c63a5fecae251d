#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ctmdp/model.hpp"
#include "ctmdp/time_grid.hpp"

namespace ctmdp {

enum class Scheme { explicit_euler, rk4 };

Scheme parse_scheme(std::string_view name);
const char* scheme_name(Scheme scheme) noexcept;

/// V(t_n, i) on a time grid with the Hamiltonian minimizer at each node.
class ValueFunction {
 public:
  /// values and argmin laid out [node][state].
  ValueFunction(TimeGrid grid, int n_states, std::vector<double> values, std::vector<int> argmin);

  const TimeGrid& grid() const noexcept { return grid_; }
  int n_states() const noexcept { return n_states_; }
  double value(std::size_t node, int i) const;
  int argmin(std::size_t node, int i) const;
  std::span<const double> row(std::size_t node) const;
  std::span<const int> argmin_row(std::size_t node) const;
  /// Linear interpolation in t between nodes.
  double interpolate(double t, int i) const;

 private:
  TimeGrid grid_;
  int n_states_;
  std::vector<double> values_;
  std::vector<int> argmin_;
};

struct HamiltonianValue {
  double value = 0.0;
  std::size_t argmin = 0;
};

/// min over grid actions u of sum_{j != i} q_ij(u)(v_j - v_i) + f(t, i, u).
HamiltonianValue hamiltonian(const ModelSpec& model, double t, int i, std::span<const double> v_row);

/// Integrates dV/dt = -H(t, ., V) backward from V(T, .) = g.
/// Explicit Euler requires dt * 2M <= 1; RK4 requires dt * 2M <= 2.7.
ValueFunction solve_backward(const ModelSpec& model, const TimeGrid& grid, Scheme scheme = Scheme::explicit_euler);

/// max over interior nodes and states of |dV/dt + H| with central differences.
double residual(const ModelSpec& model, const ValueFunction& value);

/// First-order discretization tolerance 10 dt (C1 + M (C2 + C1 T)).
double scheme_tolerance(const ModelSpec& model, double dt);

struct ComparisonReport {
  double interior_sup = 0.0;  ///< max over all nodes and states of V2 - V1
  double terminal_sup = 0.0;  ///< max over states of g2 - g1
  double tolerance = 0.0;
  double margin = 0.0;        ///< terminal_sup + tolerance - interior_sup
  bool passed = false;
};

/// Solves with terminal costs g1 and g2 and checks that the sup of V2 - V1
/// is attained at the terminal time up to the scheme tolerance.
ComparisonReport comparison_test(const ModelSpec& model, std::span<const double> g1, std::span<const double> g2,
                                 const TimeGrid& grid, Scheme scheme = Scheme::explicit_euler);

}  // namespace ctmdp
