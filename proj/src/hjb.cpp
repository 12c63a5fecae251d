#include "ctmdp/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ctmdp/errors.hpp"

namespace ctmdp {

Scheme parse_scheme(std::string_view name) {
  if (name == "euler" || name == "explicit_euler") return Scheme::explicit_euler;
  if (name == "rk4") return Scheme::rk4;
  throw Error(ErrorCode::invalid_argument, "unknown scheme '" + std::string(name) + "' (expected euler or rk4)");
}

const char* scheme_name(Scheme scheme) noexcept { return scheme == Scheme::rk4 ? "rk4" : "euler"; }

// ---------------------------------------------------------------------------

ValueFunction::ValueFunction(TimeGrid grid, int n_states, std::vector<double> values, std::vector<int> argmin)
    : grid_(std::move(grid)), n_states_(n_states), values_(std::move(values)), argmin_(std::move(argmin)) {
  const std::size_t cells = grid_.size() * static_cast<std::size_t>(n_states_);
  if (n_states_ < 1 || values_.size() != cells || argmin_.size() != cells)
    throw Error(ErrorCode::grid_mismatch, "value function data does not match grid x states");
}

double ValueFunction::value(std::size_t node, int i) const {
  if (node >= grid_.size() || i < 0 || i >= n_states_)
    throw Error(ErrorCode::index_out_of_range, "value function index out of range");
  return values_[node * static_cast<std::size_t>(n_states_) + static_cast<std::size_t>(i)];
}

int ValueFunction::argmin(std::size_t node, int i) const {
  if (node >= grid_.size() || i < 0 || i >= n_states_)
    throw Error(ErrorCode::index_out_of_range, "value function index out of range");
  return argmin_[node * static_cast<std::size_t>(n_states_) + static_cast<std::size_t>(i)];
}

std::span<const double> ValueFunction::row(std::size_t node) const {
  if (node >= grid_.size()) throw Error(ErrorCode::index_out_of_range, "time node out of range");
  return {values_.data() + node * static_cast<std::size_t>(n_states_), static_cast<std::size_t>(n_states_)};
}

std::span<const int> ValueFunction::argmin_row(std::size_t node) const {
  if (node >= grid_.size()) throw Error(ErrorCode::index_out_of_range, "time node out of range");
  return {argmin_.data() + node * static_cast<std::size_t>(n_states_), static_cast<std::size_t>(n_states_)};
}

double ValueFunction::interpolate(double t, int i) const {
  if (!(t >= -1e-12 && t <= grid_.horizon() + 1e-12))
    throw Error(ErrorCode::time_out_of_range, "interpolation time outside [0, T]");
  std::size_t n = grid_.left_index(t);
  if (n + 1 >= grid_.size()) return value(grid_.size() - 1, i);
  double w = (t - grid_.node(n)) / grid_.step();
  return (1.0 - w) * value(n, i) + w * value(n + 1, i);
}

// ---------------------------------------------------------------------------

HamiltonianValue hamiltonian(const ModelSpec& model, double t, int i, std::span<const double> v_row) {
  if (v_row.size() != static_cast<std::size_t>(model.n_states()))
    throw Error(ErrorCode::index_out_of_range, "value row length differs from n_states");
  if (i < 0 || i >= model.n_states()) throw Error(ErrorCode::index_out_of_range, "state index out of range");
  const auto& gen = model.generator();
  const auto& f = model.running_cost();
  const double vi = v_row[static_cast<std::size_t>(i)];
  // The bracket is affine in mu, so its infimum over P(U) is attained at a
  // Dirac measure: scanning the grid actions is exact.
  HamiltonianValue best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t u = 0; u < model.n_actions(); ++u) {
    double h = f(t, i, u);
    for (int j : gen.neighbours(i)) h += gen.rate_unchecked(i, j, u) * (v_row[static_cast<std::size_t>(j)] - vi);
    if (h < best.value) best = {h, u};
  }
  return best;
}

namespace {

void check_stability(const ModelSpec& model, double dt, Scheme scheme) {
  const double limit = scheme == Scheme::explicit_euler ? 1.0 : 2.7;
  if (dt * 2.0 * model.rate_bound() > limit) {
    std::ostringstream os;
    os.precision(17);
    os << "time step " << dt << " violates dt * 2M <= " << limit << " for scheme " << scheme_name(scheme)
       << " (M = " << model.rate_bound() << ")";
    throw Error(ErrorCode::stability_violation, os.str());
  }
}

// out[i] = H(t, i, v); optional argmin.
void hamiltonian_row(const ModelSpec& model, double t, std::span<const double> v, std::span<double> out,
                     std::span<int> argmin = {}) {
  for (int i = 0; i < model.n_states(); ++i) {
    auto h = hamiltonian(model, t, i, v);
    out[static_cast<std::size_t>(i)] = h.value;
    if (!argmin.empty()) argmin[static_cast<std::size_t>(i)] = static_cast<int>(h.argmin);
  }
}

void check_finite(std::span<const double> row, double t) {
  for (double v : row)
    if (!std::isfinite(v)) throw Error(ErrorCode::non_finite_value, "non-finite value at t = " + std::to_string(t));
}

}  // namespace

ValueFunction solve_backward(const ModelSpec& model, const TimeGrid& grid, Scheme scheme) {
  if (std::abs(grid.horizon() - model.horizon()) > 1e-12 * std::max(1.0, model.horizon()))
    throw Error(ErrorCode::grid_mismatch, "time grid horizon differs from the model horizon");
  const double dt = grid.step();
  check_stability(model, dt, scheme);

  const auto n = static_cast<std::size_t>(model.n_states());
  const std::size_t last = grid.size() - 1;
  std::vector<double> values(grid.size() * n);
  std::vector<int> argmin(grid.size() * n);
  std::copy(model.terminal_cost().begin(), model.terminal_cost().end(), values.begin() + static_cast<std::ptrdiff_t>(last * n));

  std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n);
  for (std::size_t node = last;; --node) {
    std::span<double> v{values.data() + node * n, n};
    std::span<int> a{argmin.data() + node * n, n};
    const double t = grid.node(node);
    hamiltonian_row(model, t, v, k1, a);
    if (node == 0) break;
    std::span<double> prev{values.data() + (node - 1) * n, n};
    if (scheme == Scheme::explicit_euler) {
      for (std::size_t i = 0; i < n; ++i) prev[i] = v[i] + dt * k1[i];
    } else {
      // In reversed time tau = T - t the system is dV/dtau = H.
      const double mid = t - 0.5 * dt;
      for (std::size_t i = 0; i < n; ++i) stage[i] = v[i] + 0.5 * dt * k1[i];
      hamiltonian_row(model, mid, stage, k2);
      for (std::size_t i = 0; i < n; ++i) stage[i] = v[i] + 0.5 * dt * k2[i];
      hamiltonian_row(model, mid, stage, k3);
      for (std::size_t i = 0; i < n; ++i) stage[i] = v[i] + dt * k3[i];
      hamiltonian_row(model, grid.node(node - 1), stage, k4);
      for (std::size_t i = 0; i < n; ++i) prev[i] = v[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    check_finite(prev, grid.node(node - 1));
  }
  return ValueFunction(grid, model.n_states(), std::move(values), std::move(argmin));
}

double residual(const ModelSpec& model, const ValueFunction& value) {
  const auto& grid = value.grid();
  if (value.n_states() != model.n_states() ||
      std::abs(grid.horizon() - model.horizon()) > 1e-12 * std::max(1.0, model.horizon()))
    throw Error(ErrorCode::grid_mismatch, "value function does not belong to this model");
  const double dt = grid.step();
  double worst = 0.0;
  for (std::size_t node = 1; node + 1 < grid.size(); ++node) {
    auto row = value.row(node);
    for (int i = 0; i < model.n_states(); ++i) {
      double dvdt = (value.value(node + 1, i) - value.value(node - 1, i)) / (2.0 * dt);
      double r = std::abs(dvdt + hamiltonian(model, grid.node(node), i, row).value);
      worst = std::max(worst, r);
    }
  }
  return worst;
}

double scheme_tolerance(const ModelSpec& model, double dt) {
  const auto& b = model.bounds();
  return 10.0 * dt * (b.c1 + model.rate_bound() * (b.c2 + b.c1 * model.horizon()));
}

ComparisonReport comparison_test(const ModelSpec& model, std::span<const double> g1, std::span<const double> g2,
                                 const TimeGrid& grid, Scheme scheme) {
  const auto n = static_cast<std::size_t>(model.n_states());
  if (g1.size() != n || g2.size() != n) throw Error(ErrorCode::grid_mismatch, "terminal vectors must have n_states entries");
  ModelSpec m1 = model.with_terminal_cost({g1.begin(), g1.end()});
  ModelSpec m2 = model.with_terminal_cost({g2.begin(), g2.end()});
  ValueFunction v1 = solve_backward(m1, grid, scheme);
  ValueFunction v2 = solve_backward(m2, grid, scheme);

  ComparisonReport r;
  r.terminal_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) r.terminal_sup = std::max(r.terminal_sup, g2[i] - g1[i]);
  r.interior_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < grid.size(); ++node)
    for (int i = 0; i < model.n_states(); ++i) r.interior_sup = std::max(r.interior_sup, v2.value(node, i) - v1.value(node, i));
  // C2 must cover both terminal vectors.
  double c2 = std::max(m1.bounds().c2, m2.bounds().c2);
  const auto& b = model.bounds();
  r.tolerance = 10.0 * grid.step() * (b.c1 + model.rate_bound() * (c2 + b.c1 * model.horizon()));
  r.margin = r.terminal_sup + r.tolerance - r.interior_sup;
  r.passed = r.margin >= 0.0;
  return r;
}

}  // namespace ctmdp
