#include "ctmdp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctmdp/errors.hpp"
#include "ctmdp/rng.hpp"

namespace ctmdp {

// ---------------------------------------------------------------------------
// PathSegment

PathSegment::PathSegment(double start_time, double end_time, int start_state)
    : start_time_(start_time), end_time_(end_time), states_{start_state} {
  if (!(end_time >= start_time)) throw Error(ErrorCode::time_out_of_range, "path end precedes its start");
}

PathSegment::PathSegment(double start_time, double end_time, std::vector<double> jump_times, std::vector<int> states)
    : start_time_(start_time), end_time_(end_time), jump_times_(std::move(jump_times)), states_(std::move(states)) {
  if (!(end_time >= start_time)) throw Error(ErrorCode::time_out_of_range, "path end precedes its start");
  if (states_.size() != jump_times_.size() + 1)
    throw Error(ErrorCode::invalid_argument, "a path needs exactly one more state than jumps");
  for (std::size_t k = 0; k < jump_times_.size(); ++k) {
    double prev = k == 0 ? start_time_ : jump_times_[k - 1];
    if (!(jump_times_[k] > prev) || jump_times_[k] > end_time_)
      throw Error(ErrorCode::invalid_argument, "jump times must be strictly increasing within the path window");
    if (states_[k + 1] == states_[k]) throw Error(ErrorCode::invalid_argument, "consecutive path states must differ");
  }
}

void PathSegment::append_jump(double t, int state) {
  double prev = jump_times_.empty() ? start_time_ : jump_times_.back();
  if (!(t > prev) || t > end_time_) throw Error(ErrorCode::invalid_argument, "jump time out of order");
  if (state == states_.back()) throw Error(ErrorCode::invalid_argument, "a jump must change the state");
  jump_times_.push_back(t);
  states_.push_back(state);
}

int PathSegment::state_at_unchecked(double t) const noexcept {
  // Right-continuous: a jump at exactly t is already in effect.
  auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  return states_[static_cast<std::size_t>(it - jump_times_.begin())];
}

int PathSegment::state_at(double t) const {
  if (!(t >= start_time_ && t <= end_time_))
    throw Error(ErrorCode::time_out_of_range, "time " + std::to_string(t) + " outside the path window");
  return state_at_unchecked(t);
}

int shift_eval(const PathSegment& path, int k, double r0, double s, double t) {
  if (k < 0) throw Error(ErrorCode::invalid_argument, "shift order must be nonnegative");
  if (k > 0 && !(r0 > 0.0)) throw Error(ErrorCode::invalid_argument, "delay interval r0 must be positive");
  if (!(t >= s) || t > path.end_time()) throw Error(ErrorCode::time_out_of_range, "shift evaluation needs s <= t <= T");
  return path.state_at(std::max(t - k * r0, s));
}

// ---------------------------------------------------------------------------
// PolicyKind

const char* policy_kind_name(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::markov: return "markov";
    case PolicyKind::delayed: return "delayed";
    case PolicyKind::multi_delay: return "multi_delay";
    case PolicyKind::deterministic_curve: return "deterministic_curve";
    case PolicyKind::feedback: return "feedback";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (auto k : {PolicyKind::markov, PolicyKind::delayed, PolicyKind::multi_delay, PolicyKind::deterministic_curve,
                 PolicyKind::feedback})
    if (name == policy_kind_name(k)) return k;
  throw Error(ErrorCode::parse_error, "unknown policy kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// DelayPolicy

namespace {

bool is_dirac(std::span<const double> w) {
  return std::count(w.begin(), w.end(), 1.0) == 1 &&
         std::count(w.begin(), w.end(), 0.0) == static_cast<std::ptrdiff_t>(w.size()) - 1;
}

struct RuleEvaluator {
  std::size_t node;
  std::span<const int> slots;
  std::span<double> out;
  std::size_t n_actions;

  void operator()(const ConstantRule& r) const {
    std::copy(r.mixture.weights().begin(), r.mixture.weights().end(), out.begin());
  }
  void operator()(const StateActionRule& r) const {
    std::fill(out.begin(), out.end(), 0.0);
    out[r.actions[static_cast<std::size_t>(slots[static_cast<std::size_t>(r.slot)])]] = 1.0;
  }
  void operator()(const FeedbackRule& r) const {
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(r.argmin[node * static_cast<std::size_t>(r.n_states) + static_cast<std::size_t>(slots[0])])] = 1.0;
  }
  void operator()(const RandomRule& r) const {
    std::uint64_t h = hash_words(r.seed, {static_cast<std::uint64_t>(node), slots.size()});
    for (int s : slots) h = mix64(h ^ (static_cast<std::uint64_t>(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    CounterRng rng(h, 0xd1ce);
    rng.dirichlet_flat(out);
  }
  void operator()(const TableRule& r) const {
    std::vector<int> key;
    key.reserve(slots.size() + 1);
    key.push_back(static_cast<int>(node));
    key.insert(key.end(), slots.begin(), slots.end());
    auto it = r.entries.find(key);
    if (it != r.entries.end()) {
      std::copy(it->second.begin(), it->second.end(), out.begin());
      return;
    }
    if (r.fallback) {
      std::copy(r.fallback->weights().begin(), r.fallback->weights().end(), out.begin());
      return;
    }
    std::string what = "policy table has no entry for (t_index " + std::to_string(node);
    for (int s : slots) what += ", " + std::to_string(s + 1);
    throw Error(ErrorCode::invalid_argument, what + ")");
  }
};

void check_rule(const PolicyRule& rule, const DelayParams& params, PolicyKind kind, const std::optional<TimeGrid>& grid,
                int n_states, std::size_t n_actions) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::invalid_argument, what); };
  bool dirac_valued = false;
  if (auto* c = std::get_if<ConstantRule>(&rule)) {
    if (c->mixture.size() != n_actions) bad("constant policy mixture has the wrong length");
    dirac_valued = is_dirac(c->mixture.weights());
  } else if (auto* sa = std::get_if<StateActionRule>(&rule)) {
    if (sa->actions.size() != static_cast<std::size_t>(n_states)) bad("state_action policy needs one action per state");
    for (auto u : sa->actions)
      if (u >= n_actions) bad("state_action policy action index out of range");
    if (sa->slot < 0 || sa->slot > params.m) bad("state_action policy slot must lie in 0..m");
    dirac_valued = true;
  } else if (auto* fb = std::get_if<FeedbackRule>(&rule)) {
    if (!grid) bad("feedback policy needs a time grid");
    if (fb->n_states != n_states || fb->argmin.size() != grid->size() * static_cast<std::size_t>(n_states))
      bad("feedback argmin table does not match grid x states");
    for (int u : fb->argmin)
      if (u < 0 || static_cast<std::size_t>(u) >= n_actions) bad("feedback action index out of range");
    dirac_valued = true;
  } else if (auto* tb = std::get_if<TableRule>(&rule)) {
    dirac_valued = true;
    const std::size_t nodes = grid ? grid->size() : 1;
    for (const auto& [key, w] : tb->entries) {
      if (key.size() != static_cast<std::size_t>(params.m) + 2) bad("policy table key must be (t_index, i0..im)");
      if (key[0] < 0 || static_cast<std::size_t>(key[0]) >= nodes) bad("policy table t_index out of range");
      for (std::size_t k = 1; k < key.size(); ++k)
        if (key[k] < 0 || key[k] >= n_states) bad("policy table state out of range");
      if (w.size() != n_actions) bad("policy table weights have the wrong length");
      Mixture check(w);  // validates normalization
      dirac_valued = dirac_valued && is_dirac(w);
    }
    if (tb->fallback) {
      if (tb->fallback->size() != n_actions) bad("policy table default has the wrong length");
      dirac_valued = dirac_valued && is_dirac(tb->fallback->weights());
    }
  }
  if (kind == PolicyKind::deterministic_curve && !dirac_valued) bad("deterministic_curve policies must be Dirac-valued");
}

}  // namespace

DelayPolicy::DelayPolicy(DelayParams params, PolicyKind kind, std::optional<TimeGrid> grid, PolicyRule rule,
                         int n_states, std::size_t n_actions)
    : params_(params),
      kind_(kind),
      grid_(std::move(grid)),
      rule_(std::make_shared<const PolicyRule>(std::move(rule))),
      n_states_(n_states),
      n_actions_(n_actions) {
  if (n_states < 1 || n_actions < 1) throw Error(ErrorCode::invalid_argument, "policy needs positive dimensions");
  if (params_.m < 0) throw Error(ErrorCode::invalid_argument, "number of delays m must be nonnegative");
  if (params_.m >= 1 && !(params_.r0 > 0.0)) throw Error(ErrorCode::invalid_argument, "r0 must be positive when m >= 1");
  if (!(params_.s >= 0.0) || (grid_ && !(params_.s < grid_->horizon())))
    throw Error(ErrorCode::invalid_argument, "start time s must lie in [0, T)");
  if ((kind_ == PolicyKind::markov || kind_ == PolicyKind::feedback) && params_.m != 0)
    throw Error(ErrorCode::invalid_argument, std::string(policy_kind_name(kind_)) + " policies use m = 0");
  if (kind_ == PolicyKind::delayed && params_.m < 1) throw Error(ErrorCode::invalid_argument, "delayed policies need m >= 1");
  if (kind_ == PolicyKind::multi_delay && params_.m < 2)
    throw Error(ErrorCode::invalid_argument, "multi_delay policies need m >= 2");
  check_rule(*rule_, params_, kind_, grid_, n_states_, n_actions_);
}

std::span<const double> DelayPolicy::breakpoints() const noexcept {
  if (!grid_) return {};
  return grid_->nodes();
}

void DelayPolicy::evaluate(std::size_t node, std::span<const int> slots, std::span<double> out) const {
  std::visit(RuleEvaluator{node, slots, out, n_actions_}, *rule_);
}

void DelayPolicy::control_into(const PathSegment& path, double t, std::span<int> slots, std::span<double> out) const {
  if (!(t >= params_.s) || t > path.end_time() || (grid_ && t > grid_->horizon() + 1e-12))
    throw Error(ErrorCode::time_out_of_range, "control requested at t = " + std::to_string(t) + " outside [s, T]");
  for (int k = 0; k <= params_.m; ++k)
    slots[static_cast<std::size_t>(k)] = path.state_at(std::max(t - k * params_.r0, params_.s));
  evaluate(node_index(t), slots.first(static_cast<std::size_t>(params_.m) + 1), out);
}

Mixture DelayPolicy::control_at(const PathSegment& path, double t) const {
  std::vector<int> slots(static_cast<std::size_t>(params_.m) + 1);
  std::vector<double> out(n_actions_);
  control_into(path, t, slots, out);
  return Mixture(std::move(out));
}

DelayPolicy DelayPolicy::anchored_at(double s) const {
  DelayPolicy copy = *this;
  if (!(s >= 0.0) || (grid_ && !(s < grid_->horizon())))
    throw Error(ErrorCode::invalid_argument, "start time s must lie in [0, T)");
  copy.params_.s = s;
  return copy;
}

DelayPolicy DelayPolicy::with_delay(DelayParams params) const {
  if (params.m < params_.m) throw Error(ErrorCode::invalid_argument, "cannot drop delay slots used by the policy");
  PolicyKind kind = kind_;
  if (kind != PolicyKind::deterministic_curve && params.m >= 1)
    kind = params.m == 1 ? PolicyKind::delayed : PolicyKind::multi_delay;
  DelayPolicy copy(params, kind, grid_, *rule_, n_states_, n_actions_);
  return copy;
}

// ---------------------------------------------------------------------------

DelayPolicy feedback_from_value(const ValueFunction& value, const ModelSpec& model) {
  if (value.n_states() != model.n_states() ||
      std::abs(value.grid().horizon() - model.horizon()) > 1e-12 * std::max(1.0, model.horizon()))
    throw Error(ErrorCode::grid_mismatch, "value function does not belong to this model");
  FeedbackRule rule{model.n_states(), {}};
  rule.argmin.reserve(value.grid().size() * static_cast<std::size_t>(model.n_states()));
  for (std::size_t n = 0; n < value.grid().size(); ++n) {
    auto row = value.argmin_row(n);
    rule.argmin.insert(rule.argmin.end(), row.begin(), row.end());
  }
  return DelayPolicy(DelayParams{}, PolicyKind::feedback, value.grid(), std::move(rule), model.n_states(),
                     model.n_actions());
}

DelayPolicy random_delay_policy(const ModelSpec& model, const DelayParams& params, std::uint64_t seed,
                                const TimeGrid& grid) {
  PolicyKind kind = params.m == 0 ? PolicyKind::markov : params.m == 1 ? PolicyKind::delayed : PolicyKind::multi_delay;
  return DelayPolicy(params, kind, grid, RandomRule{seed}, model.n_states(), model.n_actions());
}

}  // namespace ctmdp
