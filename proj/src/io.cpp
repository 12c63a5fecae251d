#include "ctmdp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ctmdp/errors.hpp"

namespace ctmdp::io {
namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::parse_error, what); }

const json& require(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  return doc.at(key);
}

template <class T>
T get_as(const json& node, const char* what) {
  try {
    return node.get<T>();
  } catch (const json::exception& e) {
    parse_fail(std::string("field '") + what + "': " + e.what());
  }
}

int state_from_json(const json& node, int n_states, const char* what) {
  int s = get_as<int>(node, what);
  if (s < 1 || s > n_states)
    throw Error(ErrorCode::malformed_model, std::string(what) + " state " + std::to_string(s) + " outside 1.." +
                                                std::to_string(n_states));
  return s - 1;
}

RunningCost running_cost_from_json(const json& node, int n_states, const ActionGrid& grid) {
  if (node.contains("table")) {
    const json& table = node.at("table");
    auto times = get_as<std::vector<double>>(require(table, "times"), "running_cost.table.times");
    const json& values = require(table, "values");
    if (!values.is_array() || values.size() != times.size())
      parse_fail("running_cost.table.values needs one [state][action] block per time");
    std::vector<double> flat;
    for (const auto& block : values) {
      auto rows = get_as<std::vector<std::vector<double>>>(block, "running_cost.table.values");
      if (rows.size() != static_cast<std::size_t>(n_states)) parse_fail("running_cost.table.values needs one row per state");
      for (const auto& row : rows) {
        if (row.size() != grid.size()) parse_fail("running_cost.table.values needs one entry per action");
        flat.insert(flat.end(), row.begin(), row.end());
      }
    }
    return RunningCost::table(n_states, grid.size(), std::move(times), std::move(flat));
  }
  auto name = get_as<std::string>(require(node, "builtin"), "running_cost.builtin");
  json params = node.value("params", json::object());
  if (name == "constant") return RunningCost::constant(n_states, grid.size(), params.value("value", 0.0));
  if (name == "linear") {
    std::vector<double> action;
    if (params.contains("action")) {
      const json& a = params.at("action");
      action = a.is_array() ? get_as<std::vector<double>>(a, "running_cost.params.action")
                            : std::vector<double>(grid.dim(), get_as<double>(a, "running_cost.params.action"));
    }
    return RunningCost::linear(n_states, grid, params.value("constant", 0.0), params.value("time", 0.0),
                               params.value("state", 0.0), std::move(action));
  }
  parse_fail("unknown running_cost builtin '" + name + "' (expected linear or constant)");
}

}  // namespace

ModelSpec model_from_json(const json& doc) {
  try {
    const int n = get_as<int>(require(doc, "n_states"), "n_states");
    if (n < 1) throw Error(ErrorCode::malformed_model, "n_states must be positive");
    const double horizon = get_as<double>(require(doc, "horizon"), "horizon");

    std::vector<std::vector<double>> points;
    for (const auto& p : require(doc, "action_grid")) {
      if (p.is_number()) points.push_back({p.get<double>()});
      else points.push_back(get_as<std::vector<double>>(p, "action_grid"));
    }
    ActionGrid grid(std::move(points));

    std::vector<RateEntry> entries;
    for (const auto& t : require(doc, "rates")) {
      if (!t.is_array() || t.size() != 4) parse_fail("rates entries must be [i, j, u_index, value]");
      int u = get_as<int>(t[2], "rates.u_index");
      if (u < 0 || static_cast<std::size_t>(u) >= grid.size())
        throw Error(ErrorCode::malformed_model, "rates action index " + std::to_string(u) + " out of range");
      entries.push_back({state_from_json(t[0], n, "rates"), state_from_json(t[1], n, "rates"),
                         static_cast<std::size_t>(u), get_as<double>(t[3], "rates.value")});
    }
    std::optional<int> bandwidth;
    if (doc.contains("bandwidth")) bandwidth = get_as<int>(doc.at("bandwidth"), "bandwidth");
    ControlledGenerator gen(n, grid.size(), entries, bandwidth);

    CostSpec costs{running_cost_from_json(require(doc, "running_cost"), n, grid),
                   get_as<std::vector<double>>(require(doc, "terminal_cost"), "terminal_cost"), std::nullopt};
    if (doc.contains("bounds")) {
      const json& b = doc.at("bounds");
      costs.declared_bounds = CostBounds{get_as<double>(require(b, "C0"), "bounds.C0"),
                                         get_as<double>(require(b, "C1"), "bounds.C1"),
                                         get_as<double>(require(b, "C2"), "bounds.C2")};
    }

    std::optional<LyapunovSpec> lyapunov;
    if (doc.contains("lyapunov") && !doc.at("lyapunov").is_null()) {
      const json& l = doc.at("lyapunov");
      LyapunovSpec spec;
      spec.phi = get_as<std::vector<double>>(require(l, "phi"), "lyapunov.phi");
      spec.lambda0 = get_as<double>(require(l, "lambda0"), "lyapunov.lambda0");
      spec.kappa0 = get_as<double>(require(l, "kappa0"), "lyapunov.kappa0");
      for (const auto& b : l.value("B0", json::array())) spec.b0.push_back(state_from_json(b, n, "lyapunov.B0"));
      lyapunov = std::move(spec);
    }
    return ModelSpec(horizon, std::move(grid), std::move(gen), std::move(costs), std::move(lyapunov));
  } catch (const json::exception& e) {
    parse_fail(std::string("model: ") + e.what());
  }
}

json model_to_json(const ModelSpec& model) {
  json doc;
  doc["n_states"] = model.n_states();
  doc["horizon"] = model.horizon();
  json grid = json::array();
  for (std::size_t u = 0; u < model.n_actions(); ++u) {
    auto p = model.grid().point(u);
    grid.push_back(std::vector<double>(p.begin(), p.end()));
  }
  doc["action_grid"] = grid;
  doc["bandwidth"] = model.generator().bandwidth();
  json rates = json::array();
  for (const auto& e : model.generator().entries()) rates.push_back({e.from + 1, e.to + 1, e.action, e.rate});
  doc["rates"] = rates;

  const auto& f = model.running_cost();
  if (f.is_table()) {
    json values = json::array();
    const std::size_t layer = static_cast<std::size_t>(model.n_states()) * model.n_actions();
    for (std::size_t k = 0; k < f.knots().size(); ++k) {
      json block = json::array();
      for (int i = 0; i < model.n_states(); ++i) {
        auto begin = f.table_values().begin() + static_cast<std::ptrdiff_t>(k * layer + static_cast<std::size_t>(i) * model.n_actions());
        block.push_back(std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(model.n_actions())));
      }
      values.push_back(block);
    }
    doc["running_cost"] = {{"table", {{"times", std::vector<double>(f.knots().begin(), f.knots().end())}, {"values", values}}}};
  } else {
    doc["running_cost"] = {{"builtin", "linear"},
                           {"params",
                            {{"constant", f.linear_constant()},
                             {"time", f.linear_time_coef()},
                             {"state", f.linear_state_coef()},
                             {"action", f.linear_action_coef()}}}};
  }
  doc["terminal_cost"] = model.terminal_cost();
  if (model.lyapunov()) {
    const auto& l = *model.lyapunov();
    json b0 = json::array();
    for (int b : l.b0) b0.push_back(b + 1);
    doc["lyapunov"] = {{"phi", l.phi}, {"lambda0", l.lambda0}, {"kappa0", l.kappa0}, {"B0", b0}};
  }
  if (model.costs().declared_bounds) {
    const auto& b = *model.costs().declared_bounds;
    doc["bounds"] = {{"C0", b.c0}, {"C1", b.c1}, {"C2", b.c2}};
  }
  return doc;
}

ModelSpec load_model(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    parse_fail(path + ": " + e.what());
  }
  return model_from_json(doc);
}

// ---------------------------------------------------------------------------
// Policies

DelayPolicy policy_from_json(const json& doc, const ModelSpec& model) {
  try {
    DelayParams params;
    params.r0 = doc.value("r0", 0.0);
    params.m = doc.value("m", 0);
    params.s = doc.value("s", 0.0);
    const int n = model.n_states();
    const std::size_t n_actions = model.n_actions();

    std::optional<TimeGrid> grid;
    if (doc.contains("n_intervals"))
      grid = TimeGrid::with_intervals(model.horizon(), get_as<std::size_t>(doc.at("n_intervals"), "n_intervals"));
    else if (doc.contains("dt"))
      grid = TimeGrid::with_step(model.horizon(), get_as<double>(doc.at("dt"), "dt"));

    if (doc.contains("table")) {
      PolicyKind kind = parse_policy_kind(get_as<std::string>(require(doc, "kind"), "kind"));
      TableRule rule;
      const std::size_t key_len = static_cast<std::size_t>(params.m) + 2;
      for (const auto& row : doc.at("table")) {
        if (!row.is_array() || row.size() != key_len + n_actions)
          parse_fail("policy table rows must be [t_index, i0..im, weights...] with " +
                     std::to_string(key_len + n_actions) + " entries");
        std::vector<int> key{get_as<int>(row[0], "table.t_index")};
        for (std::size_t k = 1; k < key_len; ++k) key.push_back(state_from_json(row[k], n, "policy table"));
        std::vector<double> w;
        for (std::size_t u = 0; u < n_actions; ++u) w.push_back(get_as<double>(row[key_len + u], "table.weights"));
        if (!rule.entries.emplace(std::move(key), std::move(w)).second) parse_fail("duplicate policy table key");
      }
      if (doc.contains("default")) rule.fallback = Mixture(get_as<std::vector<double>>(doc.at("default"), "default"));
      return DelayPolicy(params, kind, std::move(grid), std::move(rule), n, n_actions);
    }

    auto builtin = get_as<std::string>(require(doc, "builtin"), "builtin");
    json p = doc.value("params", json::object());
    auto kind_or = [&](PolicyKind fallback) {
      return doc.contains("kind") ? parse_policy_kind(get_as<std::string>(doc.at("kind"), "kind")) : fallback;
    };
    const PolicyKind by_delay =
        params.m == 0 ? PolicyKind::markov : params.m == 1 ? PolicyKind::delayed : PolicyKind::multi_delay;
    if (builtin == "constant") {
      Mixture mu(get_as<std::vector<double>>(require(p, "weights"), "params.weights"));
      return DelayPolicy(params, kind_or(by_delay), std::move(grid), ConstantRule{std::move(mu)}, n, n_actions);
    }
    if (builtin == "state_action") {
      StateActionRule rule{get_as<std::vector<std::size_t>>(require(p, "actions"), "params.actions"),
                           p.value("slot", params.m)};
      return DelayPolicy(params, kind_or(by_delay), std::move(grid), std::move(rule), n, n_actions);
    }
    if (builtin == "random") {
      if (!grid) parse_fail("random policies need dt or n_intervals");
      RandomRule rule{get_as<std::uint64_t>(require(p, "seed"), "params.seed")};
      return DelayPolicy(params, kind_or(by_delay), std::move(grid), rule, n, n_actions);
    }
    if (builtin == "feedback") {
      double dt = p.value("dt", grid ? grid->step() : 1e-3);
      Scheme scheme = parse_scheme(p.value("scheme", std::string("euler")));
      ValueFunction v = solve_backward(model, TimeGrid::with_step(model.horizon(), dt), scheme);
      DelayPolicy fb = feedback_from_value(v, model);
      return params.m >= 1 ? fb.with_delay(params) : fb;
    }
    parse_fail("unknown policy builtin '" + builtin + "'");
  } catch (const json::exception& e) {
    parse_fail(std::string("policy: ") + e.what());
  }
}

json policy_to_json(const DelayPolicy& policy, const ModelSpec& model) {
  const auto& params = policy.params();
  json doc{{"kind", policy_kind_name(policy.kind())}, {"r0", params.r0}, {"m", params.m}, {"s", params.s}};
  if (policy.grid()) {
    doc["n_intervals"] = policy.grid()->intervals();
    doc["dt"] = policy.grid()->step();
  }
  const PolicyRule& rule = policy.rule();
  if (auto* c = std::get_if<ConstantRule>(&rule)) {
    doc["builtin"] = "constant";
    doc["params"] = {{"weights", std::vector<double>(c->mixture.weights().begin(), c->mixture.weights().end())}};
  } else if (auto* sa = std::get_if<StateActionRule>(&rule)) {
    doc["builtin"] = "state_action";
    doc["params"] = {{"actions", sa->actions}, {"slot", sa->slot}};
  } else if (auto* r = std::get_if<RandomRule>(&rule)) {
    doc["builtin"] = "random";
    doc["params"] = {{"seed", r->seed}};
  } else if (auto* fb = std::get_if<FeedbackRule>(&rule)) {
    // Materialized over (t_index, i0); delayed slots, if any, are ignored by h
    // and expanded so the table covers every key.
    json table = json::array();
    const std::size_t nodes = policy.grid()->size();
    const std::size_t slots = static_cast<std::size_t>(params.m) + 1;
    std::size_t combos = 1;
    for (std::size_t k = 1; k < slots; ++k) combos *= static_cast<std::size_t>(model.n_states());
    for (std::size_t node = 0; node < nodes; ++node)
      for (int i0 = 0; i0 < fb->n_states; ++i0)
        for (std::size_t c = 0; c < combos; ++c) {
          json row{node, i0 + 1};
          std::size_t code = c;
          for (std::size_t k = 1; k < slots; ++k) {
            row.push_back(static_cast<int>(code % static_cast<std::size_t>(model.n_states())) + 1);
            code /= static_cast<std::size_t>(model.n_states());
          }
          const int u = fb->argmin[node * static_cast<std::size_t>(fb->n_states) + static_cast<std::size_t>(i0)];
          for (std::size_t a = 0; a < policy.n_actions(); ++a) row.push_back(static_cast<int>(a) == u ? 1.0 : 0.0);
          table.push_back(std::move(row));
        }
    doc["table"] = std::move(table);
  } else if (auto* tb = std::get_if<TableRule>(&rule)) {
    json table = json::array();
    for (const auto& [key, w] : tb->entries) {
      json row{key[0]};
      for (std::size_t k = 1; k < key.size(); ++k) row.push_back(key[k] + 1);
      for (double x : w) row.push_back(x);
      table.push_back(std::move(row));
    }
    doc["table"] = std::move(table);
    if (tb->fallback) doc["default"] = std::vector<double>(tb->fallback->weights().begin(), tb->fallback->weights().end());
  }
  return doc;
}

DelayPolicy load_policy(const std::string& path, const ModelSpec& model) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    parse_fail(path + ": " + e.what());
  }
  return policy_from_json(doc, model);
}

// ---------------------------------------------------------------------------
// Reports and CSV

json report_to_json(const AssumptionReport& r) {
  return json{{"H1_pass", r.h1_pass},
              {"M", r.rate_bound},
              {"H2_present", r.h2_present},
              {"H2_pass", r.h2_pass},
              {"H2_min_margin", r.h2_present ? json(r.h2_min_margin) : json(nullptr)},
              {"H2_worst_state", r.h2_worst_state >= 0 ? json(r.h2_worst_state + 1) : json(nullptr)},
              {"H2_worst_action", r.h2_worst_state >= 0 ? json(r.h2_worst_action) : json(nullptr)},
              {"H3_pass", r.h3_pass},
              {"K_declared", r.declared_bandwidth},
              {"K_observed", r.observed_bandwidth},
              {"costs_pass", r.costs_pass},
              {"bounds_declared", {{"C0", r.declared.c0}, {"C1", r.declared.c1}, {"C2", r.declared.c2}}},
              {"bounds_observed", {{"C0", r.observed.c0}, {"C1", r.observed.c1}, {"C2", r.observed.c2}}},
              {"all_pass", r.all_pass()},
              {"diagnostics", r.diagnostics}};
}

json report_to_json(const ExperimentReport& r) {
  json q = json::object();
  for (const auto& [k, v] : r.quantities) q[k] = v;
  return json{{"name", r.name}, {"quantities", q}, {"passed", r.passed}, {"tolerance", r.tolerance}, {"details", r.details}};
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string value_to_csv(const ValueFunction& value) {
  std::string out = "t,i,V,argmin_u\n";
  const auto& grid = value.grid();
  for (std::size_t n = 0; n < grid.size(); ++n)
    for (int i = 0; i < value.n_states(); ++i) {
      out += format_double(grid.node(n));
      out += ',' + std::to_string(i + 1) + ',' + format_double(value.value(n, i)) + ',' +
             std::to_string(value.argmin(n, i)) + '\n';
    }
  return out;
}

std::string estimate_to_csv(const McEstimate& e) {
  return "mean,stderr,n,seed\n" + format_double(e.mean) + ',' + format_double(e.std_error) + ',' +
         std::to_string(e.n_paths) + ',' + std::to_string(e.seed) + '\n';
}

std::string trajectories_to_csv(const ModelSpec& model, const DelayPolicy& policy, double s, int i,
                                std::uint64_t n_paths, std::uint64_t seed, const SimulationOptions& options) {
  SimulationOptions opts = options;
  opts.record_controls = true;
  std::string out = "path_id,t,state,event,cost_so_far\n";
  for (std::uint64_t p = 0; p < n_paths; ++p) {
    Trajectory traj = sample_path_stream(model, policy, s, i, seed, p, opts);
    auto jumps = traj.segment.jump_times();
    const std::string id = std::to_string(p) + ',';
    for (const auto& c : traj.applied_controls) {
      const bool is_jump = std::binary_search(jumps.begin(), jumps.end(), c.time);
      out += id + format_double(c.time) + ',' + std::to_string(traj.segment.state_at(c.time) + 1) + ',' +
             (is_jump ? "jump" : "refresh") + ',' + format_double(c.cost_so_far) + '\n';
    }
    out += id + format_double(model.horizon()) + ',' + std::to_string(traj.segment.final_state() + 1) +
           ",refresh," + format_double(traj.pathwise_cost) + '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw Error(ErrorCode::io_error, "failed writing '" + path + "'");
}

}  // namespace ctmdp::io
