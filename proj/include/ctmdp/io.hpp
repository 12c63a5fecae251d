#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ctmdp/hjb.hpp"
#include "ctmdp/model.hpp"
#include "ctmdp/policy.hpp"
#include "ctmdp/simulate.hpp"
#include "ctmdp/verify.hpp"

namespace ctmdp::io {

using nlohmann::json;

// Model files: n_states, horizon, action_grid, rates [[i, j, u, q], ...],
// running_cost ({"builtin": "linear", "params": {...}} or {"table": {...}}),
// terminal_cost, optional lyapunov, bandwidth and bounds. States are 1-based.
ModelSpec model_from_json(const json& doc);
json model_to_json(const ModelSpec& model);
ModelSpec load_model(const std::string& path);

// Policy files: kind, r0, m, s, optional dt / n_intervals, and either
// table [[t_index, i0..im, w_0..w_{|U|-1}], ...] or builtin + params.
DelayPolicy policy_from_json(const json& doc, const ModelSpec& model);
json policy_to_json(const DelayPolicy& policy, const ModelSpec& model);
DelayPolicy load_policy(const std::string& path, const ModelSpec& model);

json report_to_json(const AssumptionReport& report);
json report_to_json(const ExperimentReport& report);

/// %.17g: round-trip exact.
std::string format_double(double x);

/// t,i,V,argmin_u
std::string value_to_csv(const ValueFunction& value);
/// mean,stderr,n,seed
std::string estimate_to_csv(const McEstimate& estimate);
/// path_id,t,state,event,cost_so_far for paths 0..n_paths-1 (streams of `seed`).
/// The row at t = T carries the full pathwise cost including g.
std::string trajectories_to_csv(const ModelSpec& model, const DelayPolicy& policy, double s, int i,
                                std::uint64_t n_paths, std::uint64_t seed, const SimulationOptions& options = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace ctmdp::io
