#include "ctmdp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "ctmdp/errors.hpp"
#include "ctmdp/parallel.hpp"

namespace ctmdp {
namespace {

void check_start(const ModelSpec& model, double s, int i) {
  if (!(s >= 0.0 && s < model.horizon())) throw Error(ErrorCode::time_out_of_range, "start time must lie in [0, T)");
  if (i < 0 || i >= model.n_states()) throw Error(ErrorCode::index_out_of_range, "start state out of range");
}

void check_policy(const ModelSpec& model, const DelayPolicy& policy) {
  if (policy.n_states() != model.n_states() || policy.n_actions() != model.n_actions())
    throw Error(ErrorCode::grid_mismatch, "policy dimensions differ from the model");
  if (policy.grid() && std::abs(policy.grid()->horizon() - model.horizon()) > 1e-12 * std::max(1.0, model.horizon()))
    throw Error(ErrorCode::grid_mismatch, "policy time grid horizon differs from the model horizon");
}

// Walks the quadrature cells of [from, to] and calls on_cell(a, b, weights,
// state, cost_before) for each; returns the integrated running cost.
template <class OnCell>
double integrate_cells(const ModelSpec& model, const DelayPolicy& policy, const PathSegment& path, double from,
                       double to, double refresh_step, OnCell&& on_cell) {
  if (!(to > from)) return 0.0;
  const double eps = 1e-13 * std::max(1.0, model.horizon());
  const auto& params = policy.params();
  const auto& f = model.running_cost();

  std::vector<double> events;
  for (double tau : path.jump_times())
    for (int k = 0; k <= params.m; ++k) {
      double x = tau + k * params.r0;
      if (x > from && x < to) events.push_back(x);
    }
  for (double knot : f.knots())
    if (knot > from && knot < to) events.push_back(knot);
  std::sort(events.begin(), events.end());

  const auto nodes = policy.breakpoints();
  std::size_t ei = 0;
  auto ni = static_cast<std::size_t>(std::upper_bound(nodes.begin(), nodes.end(), from) - nodes.begin());
  double refresh_index = refresh_step > 0.0 ? std::floor(from / refresh_step) + 1.0 : 0.0;

  std::vector<int> slots(static_cast<std::size_t>(params.m) + 1);
  std::vector<double> weights(model.n_actions());
  double cost = 0.0;
  double cur = from;
  while (cur < to) {
    double next = to;
    while (ei < events.size() && events[ei] <= cur + eps) ++ei;
    if (ei < events.size()) next = std::min(next, events[ei]);
    while (ni < nodes.size() && nodes[ni] <= cur + eps) ++ni;
    if (ni < nodes.size()) next = std::min(next, nodes[ni]);
    if (refresh_step > 0.0) {
      while (refresh_index * refresh_step <= cur + eps) refresh_index += 1.0;
      next = std::min(next, refresh_index * refresh_step);
    }
    const double mid = 0.5 * (cur + next);
    policy.control_into(path, mid, slots, weights);
    const int state = slots[0];
    on_cell(cur, next, weights, state, cost);
    cost += (next - cur) * f.mixed(mid, state, weights);
    cur = next;
  }
  return cost;
}

McEstimate summarize(std::span<const double> samples, std::size_t stride, std::size_t offset, std::uint64_t seed) {
  const std::size_t n = samples.size() / stride;
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) sum += samples[p * stride + offset];
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double d = samples[p * stride + offset] - mean;
    ss += d * d;
  }
  McEstimate est;
  est.mean = mean;
  est.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  est.n_paths = n;
  est.seed = seed;
  return est;
}

}  // namespace

PathSegment simulate_jumps(const ModelSpec& model, const DelayPolicy& policy, double s, int i, CounterRng& rng) {
  const double horizon = model.horizon();
  const double envelope = model.rate_bound();
  const auto& gen = model.generator();
  PathSegment path(s, horizon, i);
  if (envelope <= 0.0) return path;

  std::vector<int> slots(static_cast<std::size_t>(policy.params().m) + 1);
  std::vector<double> w(model.n_actions());
  int current = i;
  double t = s;
  while (true) {
    t += rng.exponential(envelope);
    if (t >= horizon) break;
    policy.control_into(path, t, slots, w);
    double exit = 0.0;
    for (std::size_t u = 0; u < w.size(); ++u) exit += w[u] * gen.exit_rate_unchecked(current, u);
    if (exit > envelope * (1.0 + 1e-12)) {
      std::ostringstream os;
      os.precision(17);
      os << "exit rate " << exit << " exceeds the envelope M = " << envelope << " at state " << current + 1;
      throw Error(ErrorCode::invalid_envelope, os.str());
    }
    if (rng.uniform() * envelope >= exit) continue;  // rejected proposal
    const double target = rng.uniform() * exit;
    double acc = 0.0;
    int chosen = -1;
    for (int j : gen.neighbours(current)) {
      double q = 0.0;
      for (std::size_t u = 0; u < w.size(); ++u) q += w[u] * gen.rate_unchecked(current, j, u);
      if (q <= 0.0) continue;
      chosen = j;
      acc += q;
      if (target < acc) break;
    }
    if (chosen < 0) continue;
    path.append_jump(t, chosen);
    current = chosen;
  }
  return path;
}

double running_cost(const ModelSpec& model, const DelayPolicy& policy, const PathSegment& path, double from, double to,
                    const SimulationOptions& options) {
  check_policy(model, policy);
  if (from < path.start_time() || to > path.end_time())
    throw Error(ErrorCode::time_out_of_range, "integration window exceeds the path window");
  return integrate_cells(model, policy, path, from, to, options.refresh_step,
                         [](double, double, std::span<const double>, int, double) {});
}

double pathwise_cost(const ModelSpec& model, const DelayPolicy& policy, const Trajectory& trajectory,
                     const SimulationOptions& options) {
  const auto& path = trajectory.segment;
  DelayPolicy anchored = policy.anchored_at(path.start_time());
  return running_cost(model, anchored, path, path.start_time(), model.horizon(), options) +
         model.terminal_cost()[static_cast<std::size_t>(path.state_at(model.horizon()))];
}

Trajectory sample_path(const ModelSpec& model, const DelayPolicy& policy, double s, int i, std::uint64_t seed,
                       const SimulationOptions& options) {
  return sample_path_stream(model, policy, s, i, seed, 0, options);
}

Trajectory sample_path_stream(const ModelSpec& model, const DelayPolicy& policy, double s, int i, std::uint64_t seed,
                              std::uint64_t stream, const SimulationOptions& options) {
  check_start(model, s, i);
  check_policy(model, policy);
  DelayPolicy anchored = policy.anchored_at(s);
  CounterRng rng(seed, stream);
  Trajectory traj{simulate_jumps(model, anchored, s, i, rng), {}, 0.0};
  double running = integrate_cells(model, anchored, traj.segment, s, model.horizon(), options.refresh_step,
                                   [&](double a, double, std::span<const double> w, int, double cost_before) {
                                     if (options.record_controls)
                                       traj.applied_controls.push_back({a, Mixture({w.begin(), w.end()}), cost_before});
                                   });
  traj.pathwise_cost = running + model.terminal_cost()[static_cast<std::size_t>(traj.segment.final_state())];
  return traj;
}

std::vector<McEstimate> estimate_functional(const ModelSpec& model, const DelayPolicy& policy, double s, int i,
                                            std::uint64_t n_paths, std::uint64_t seed, std::size_t n_outputs,
                                            const PathFunctional& functional, const SimulationOptions& options) {
  check_start(model, s, i);
  check_policy(model, policy);
  if (n_paths < 2) throw Error(ErrorCode::invalid_argument, "Monte Carlo estimates need at least 2 paths");
  if (n_outputs == 0) return {};
  DelayPolicy anchored = policy.anchored_at(s);
  std::vector<double> samples(static_cast<std::size_t>(n_paths) * n_outputs);
  parallel_for(static_cast<std::size_t>(n_paths), resolve_threads(options.threads), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      CounterRng rng(seed, p);
      PathSegment path = simulate_jumps(model, anchored, s, i, rng);
      functional(path, std::span<double>(samples.data() + p * n_outputs, n_outputs));
    }
  });
  std::vector<McEstimate> out;
  out.reserve(n_outputs);
  for (std::size_t k = 0; k < n_outputs; ++k) out.push_back(summarize(samples, n_outputs, k, seed));
  return out;
}

McEstimate estimate_J(const ModelSpec& model, const DelayPolicy& policy, double s, int i, std::uint64_t n_paths,
                      std::uint64_t seed, const SimulationOptions& options) {
  DelayPolicy anchored = policy.anchored_at(s);
  const double horizon = model.horizon();
  const auto& g = model.terminal_cost();
  auto cost = [&](const PathSegment& path, std::span<double> out) {
    out[0] = integrate_cells(model, anchored, path, s, horizon, options.refresh_step,
                             [](double, double, std::span<const double>, int, double) {}) +
             g[static_cast<std::size_t>(path.final_state())];
  };
  return estimate_functional(model, anchored, s, i, n_paths, seed, 1, cost, options).front();
}

std::vector<LyapunovPoint> lyapunov_trace(const ModelSpec& model, const DelayPolicy& policy, double s, int i,
                                          std::uint64_t n_paths, std::uint64_t seed, std::span<const double> checkpoints,
                                          const SimulationOptions& options) {
  if (!model.lyapunov()) throw Error(ErrorCode::missing_lyapunov, "model has no Lyapunov data");
  for (double t : checkpoints)
    if (!(t >= s && t <= model.horizon())) throw Error(ErrorCode::time_out_of_range, "checkpoint outside [s, T]");
  const auto& ly = *model.lyapunov();
  std::vector<double> times(checkpoints.begin(), checkpoints.end());
  auto phi_at = [&](const PathSegment& path, std::span<double> out) {
    for (std::size_t k = 0; k < times.size(); ++k)
      out[k] = ly.phi[static_cast<std::size_t>(path.state_at_unchecked(times[k]))];
  };
  auto est = estimate_functional(model, policy, s, i, n_paths, seed, times.size(), phi_at, options);
  std::vector<LyapunovPoint> out;
  const double phi_i = ly.phi[static_cast<std::size_t>(i)];
  for (std::size_t k = 0; k < times.size(); ++k) {
    LyapunovPoint p;
    p.time = times[k];
    p.mean = est[k].mean;
    p.std_error = est[k].std_error;
    p.bound = (phi_i + ly.kappa0 * model.horizon()) * std::exp(ly.lambda0 * times[k]);
    p.margin = p.bound + 3.0 * p.std_error - p.mean;
    p.holds = p.margin >= 0.0;
    out.push_back(p);
  }
  return out;
}

std::vector<JumpWindowPoint> jump_window_check(const ModelSpec& model, const DelayPolicy& policy, double s, int i,
                                               std::uint64_t n_paths, std::uint64_t seed, double width,
                                               std::span<const double> starts, const SimulationOptions& options) {
  if (!(width > 0.0)) throw Error(ErrorCode::invalid_argument, "window width must be positive");
  for (double a : starts)
    if (!(a >= s && a + width <= model.horizon() + 1e-12))
      throw Error(ErrorCode::time_out_of_range, "jump window outside [s, T]");
  std::vector<double> begins(starts.begin(), starts.end());
  auto indicator = [&](const PathSegment& path, std::span<double> out) {
    auto jumps = path.jump_times();
    for (std::size_t k = 0; k < begins.size(); ++k) {
      auto it = std::lower_bound(jumps.begin(), jumps.end(), begins[k]);
      out[k] = (it != jumps.end() && *it <= begins[k] + width) ? 1.0 : 0.0;
    }
  };
  auto est = estimate_functional(model, policy, s, i, n_paths, seed, begins.size(), indicator, options);
  std::vector<JumpWindowPoint> out;
  const double bound = 1.0 - std::exp(-model.rate_bound() * width);
  for (std::size_t k = 0; k < begins.size(); ++k) {
    JumpWindowPoint p;
    p.start = begins[k];
    p.width = width;
    p.frequency = est[k].mean;
    p.std_error = est[k].std_error;
    p.bound = bound;
    p.holds = p.frequency <= bound + 3.0 * p.std_error;
    out.push_back(p);
  }
  return out;
}

}  // namespace ctmdp
