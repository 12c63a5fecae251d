#include "ctmdp/ctmdp.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "ctmdp/demo.hpp"
#include "ctmdp/errors.hpp"
#include "ctmdp/io.hpp"

struct ctmdp_model {
  ctmdp::ModelSpec spec;
};
struct ctmdp_value {
  ctmdp::ValueFunction value;
};
struct ctmdp_policy {
  ctmdp::DelayPolicy policy;
};

namespace {

using ctmdp::io::json;

thread_local std::string last_error;

ctmdp_status fail(ctmdp_status status, const std::string& what) {
  last_error = what;
  return status;
}

template <class F>
ctmdp_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return CTMDP_OK;
  } catch (const ctmdp::Error& e) {
    return fail(static_cast<ctmdp_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CTMDP_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(CTMDP_INTERNAL_ERROR, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ctmdp::Error(ctmdp::ErrorCode::invalid_argument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

int state_index(const ctmdp::ModelSpec& model, int state) {
  if (state < 1 || state > model.n_states())
    throw ctmdp::Error(ctmdp::ErrorCode::index_out_of_range, "state " + std::to_string(state) + " outside 1.." +
                                                                 std::to_string(model.n_states()));
  return state - 1;
}

json run_experiment(const ctmdp::ModelSpec& model, const std::string& name, double dt, ctmdp::Scheme scheme,
                    std::uint64_t n_paths, std::uint64_t seed, double s, int i, bool& passed) {
  using namespace ctmdp;
  ValueFunction value = solve_backward(model, TimeGrid::with_step(model.horizon(), dt), scheme);
  auto finish = [&](const ExperimentReport& r) {
    passed = r.passed;
    json doc = io::report_to_json(r);
    doc["dt"] = value.grid().step();
    doc["scheme"] = scheme_name(scheme);
    doc["seed"] = seed;
    return doc;
  };
  auto dpp = [&](StoppingRule rule) {
    DppConfig config;
    config.rule = rule;
    const double T = model.horizon();
    config.t1 = rule == StoppingRule::deterministic ? s + 0.5 * (T - s) : std::min(s + 0.2, T);
    return dpp_check(model, value, s, i, config, n_paths, seed);
  };
  if (name == "dpp-deterministic") return finish(dpp(StoppingRule::deterministic));
  if (name == "dpp-first-jump") return finish(dpp(StoppingRule::first_jump_capped));
  if (name == "dpp") {
    bool a = false, b = false;
    json first = run_experiment(model, "dpp-deterministic", dt, scheme, n_paths, seed, s, i, a);
    json second = run_experiment(model, "dpp-first-jump", dt, scheme, n_paths, seed, s, i, b);
    passed = a && b;
    return json{{"name", "dpp"}, {"passed", passed}, {"reports", {first, second}}};
  }
  if (name == "lipschitz") return finish(lipschitz_check(model, value));
  if (name == "delay-no-gain") return finish(delay_no_gain(model, value, DelayParams{0.1, 1, s}, 50, n_paths, seed, s, i));
  if (name == "oracle") {
    const std::size_t intervals[] = {2, 4, 8};
    return finish(oracle_check(model, value, s, i, intervals));
  }
  throw Error(ErrorCode::invalid_argument,
              "unknown experiment '" + name + "' (expected dpp, lipschitz, delay-no-gain or oracle)");
}

}  // namespace

extern "C" {

const char* ctmdp_last_error(void) { return last_error.c_str(); }

const char* ctmdp_status_name(ctmdp_status status) {
  if (status == CTMDP_OK) return "OK";
  if (status == CTMDP_INTERNAL_ERROR) return "InternalError";
  if (status < CTMDP_OK || status > CTMDP_INTERNAL_ERROR) return "Unknown";
  return ctmdp::error_code_name(static_cast<ctmdp::ErrorCode>(static_cast<int>(status)));
}

void ctmdp_string_free(char* s) { std::free(s); }

ctmdp_status ctmdp_model_load(const char* path, ctmdp_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new ctmdp_model{ctmdp::io::load_model(path)};
  });
}

ctmdp_status ctmdp_model_from_json(const char* text, ctmdp_model** out) {
  return guarded([&] {
    require(text && out, "null argument");
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw ctmdp::Error(ctmdp::ErrorCode::parse_error, e.what());
    }
    *out = new ctmdp_model{ctmdp::io::model_from_json(doc)};
  });
}

ctmdp_status ctmdp_model_demo(int n_states, ctmdp_model** out) {
  return guarded([&] {
    require(out, "null argument");
    *out = new ctmdp_model{ctmdp::demo_model(n_states)};
  });
}

ctmdp_status ctmdp_model_to_json(const ctmdp_model* model, char** text) {
  return guarded([&] {
    require(model && text, "null argument");
    *text = copy_string(ctmdp::io::model_to_json(model->spec).dump(2) + "\n");
  });
}

ctmdp_status ctmdp_model_n_states(const ctmdp_model* model, int* n_states) {
  return guarded([&] {
    require(model && n_states, "null argument");
    *n_states = model->spec.n_states();
  });
}

ctmdp_status ctmdp_model_rate_bound(const ctmdp_model* model, double* m) {
  return guarded([&] {
    require(model && m, "null argument");
    *m = model->spec.rate_bound();
  });
}

ctmdp_status ctmdp_model_validate(const ctmdp_model* model, int* all_pass, char** report_json) {
  return guarded([&] {
    require(model && all_pass && report_json, "null argument");
    ctmdp::AssumptionReport r = ctmdp::validate(model->spec);
    *all_pass = r.all_pass() ? 1 : 0;
    *report_json = copy_string(ctmdp::io::report_to_json(r).dump(2) + "\n");
  });
}

void ctmdp_model_free(ctmdp_model* model) { delete model; }

ctmdp_status ctmdp_solve(const ctmdp_model* model, double dt, const char* scheme, ctmdp_value** out) {
  return guarded([&] {
    require(model && out, "null argument");
    require(dt > 0.0, "dt must be positive");
    ctmdp::Scheme sc = ctmdp::parse_scheme(scheme ? scheme : "euler");
    *out = new ctmdp_value{
        ctmdp::solve_backward(model->spec, ctmdp::TimeGrid::with_step(model->spec.horizon(), dt), sc)};
  });
}

ctmdp_status ctmdp_value_at(const ctmdp_value* value, double t, int state, double* v) {
  return guarded([&] {
    require(value && v, "null argument");
    if (state < 1 || state > value->value.n_states())
      throw ctmdp::Error(ctmdp::ErrorCode::index_out_of_range, "state out of range");
    *v = value->value.interpolate(t, state - 1);
  });
}

ctmdp_status ctmdp_value_node(const ctmdp_value* value, size_t node, int state, double* v, int* argmin) {
  return guarded([&] {
    require(value, "null argument");
    if (state < 1 || state > value->value.n_states())
      throw ctmdp::Error(ctmdp::ErrorCode::index_out_of_range, "state out of range");
    if (v) *v = value->value.value(node, state - 1);
    if (argmin) *argmin = value->value.argmin(node, state - 1);
  });
}

ctmdp_status ctmdp_value_dims(const ctmdp_value* value, size_t* n_nodes, int* n_states, double* dt) {
  return guarded([&] {
    require(value, "null argument");
    if (n_nodes) *n_nodes = value->value.grid().size();
    if (n_states) *n_states = value->value.n_states();
    if (dt) *dt = value->value.grid().step();
  });
}

ctmdp_status ctmdp_value_to_csv(const ctmdp_value* value, char** csv) {
  return guarded([&] {
    require(value && csv, "null argument");
    *csv = copy_string(ctmdp::io::value_to_csv(value->value));
  });
}

ctmdp_status ctmdp_value_residual(const ctmdp_model* model, const ctmdp_value* value, double* residual) {
  return guarded([&] {
    require(model && value && residual, "null argument");
    *residual = ctmdp::residual(model->spec, value->value);
  });
}

void ctmdp_value_free(ctmdp_value* value) { delete value; }

ctmdp_status ctmdp_policy_load(const ctmdp_model* model, const char* path, ctmdp_policy** out) {
  return guarded([&] {
    require(model && path && out, "null argument");
    *out = new ctmdp_policy{ctmdp::io::load_policy(path, model->spec)};
  });
}

ctmdp_status ctmdp_policy_from_json(const ctmdp_model* model, const char* text, ctmdp_policy** out) {
  return guarded([&] {
    require(model && text && out, "null argument");
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw ctmdp::Error(ctmdp::ErrorCode::parse_error, e.what());
    }
    *out = new ctmdp_policy{ctmdp::io::policy_from_json(doc, model->spec)};
  });
}

ctmdp_status ctmdp_policy_feedback(const ctmdp_model* model, const ctmdp_value* value, ctmdp_policy** out) {
  return guarded([&] {
    require(model && value && out, "null argument");
    *out = new ctmdp_policy{ctmdp::feedback_from_value(value->value, model->spec)};
  });
}

ctmdp_status ctmdp_policy_to_json(const ctmdp_model* model, const ctmdp_policy* policy, char** text) {
  return guarded([&] {
    require(model && policy && text, "null argument");
    *text = copy_string(ctmdp::io::policy_to_json(policy->policy, model->spec).dump() + "\n");
  });
}

void ctmdp_policy_free(ctmdp_policy* policy) { delete policy; }

ctmdp_status ctmdp_estimate_cost(const ctmdp_model* model, const ctmdp_policy* policy, double s, int state,
                                 uint64_t n_paths, uint64_t seed, ctmdp_estimate* out) {
  return guarded([&] {
    require(model && policy && out, "null argument");
    auto e = ctmdp::estimate_J(model->spec, policy->policy, s, state_index(model->spec, state), n_paths, seed);
    *out = ctmdp_estimate{e.mean, e.std_error, e.n_paths, e.seed};
  });
}

ctmdp_status ctmdp_estimate_to_csv(const ctmdp_estimate* estimate, char** csv) {
  return guarded([&] {
    require(estimate && csv, "null argument");
    *csv = copy_string(ctmdp::io::estimate_to_csv(
        ctmdp::McEstimate{estimate->mean, estimate->std_error, estimate->n_paths, estimate->seed}));
  });
}

ctmdp_status ctmdp_dump_trajectories(const ctmdp_model* model, const ctmdp_policy* policy, double s, int state,
                                     uint64_t n_paths, uint64_t seed, char** csv) {
  return guarded([&] {
    require(model && policy && csv, "null argument");
    *csv = copy_string(ctmdp::io::trajectories_to_csv(model->spec, policy->policy, s,
                                                      state_index(model->spec, state), n_paths, seed));
  });
}

ctmdp_status ctmdp_verify(const ctmdp_model* model, const char* experiment, double dt, const char* scheme,
                          uint64_t n_paths, uint64_t seed, double s, int state, int* passed, char** report_json) {
  return guarded([&] {
    require(model && experiment && passed && report_json, "null argument");
    require(dt > 0.0, "dt must be positive");
    bool ok = false;
    json doc = run_experiment(model->spec, experiment, dt, ctmdp::parse_scheme(scheme ? scheme : "euler"), n_paths,
                              seed, s, state_index(model->spec, state), ok);
    *passed = ok ? 1 : 0;
    *report_json = copy_string(doc.dump(2) + "\n");
  });
}

}  // extern "C"
