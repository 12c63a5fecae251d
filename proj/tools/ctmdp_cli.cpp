// ctmdp: command-line front end over the C API.
//
// Exit status: 0 success, 1 assumption or experiment failure, 2 malformed
// input or any other library error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctmdp/ctmdp.h"

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadInput = 2;

struct CliError {
  ctmdp_status status;
  std::string message;
};

void check(ctmdp_status status, const std::string& context) {
  if (status != CTMDP_OK) throw CliError{status, context + ": " + ctmdp_last_error()};
}

struct ModelDeleter {
  void operator()(ctmdp_model* m) const { ctmdp_model_free(m); }
};
struct ValueDeleter {
  void operator()(ctmdp_value* v) const { ctmdp_value_free(v); }
};
struct PolicyDeleter {
  void operator()(ctmdp_policy* p) const { ctmdp_policy_free(p); }
};
struct StringDeleter {
  void operator()(char* s) const { ctmdp_string_free(s); }
};
using ModelPtr = std::unique_ptr<ctmdp_model, ModelDeleter>;
using ValuePtr = std::unique_ptr<ctmdp_value, ValueDeleter>;
using PolicyPtr = std::unique_ptr<ctmdp_policy, PolicyDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw CliError{CTMDP_IO_ERROR, "cannot write '" + path + "'"};
}

ModelPtr load_model(const std::string& path) {
  ctmdp_model* m = nullptr;
  check(ctmdp_model_load(path.c_str(), &m), "loading model '" + path + "'");
  return ModelPtr(m);
}

ValuePtr solve(const ctmdp_model* model, double dt, const std::string& scheme) {
  ctmdp_value* v = nullptr;
  check(ctmdp_solve(model, dt, scheme.c_str(), &v), "solving");
  return ValuePtr(v);
}

std::string take(char* s) { return std::string(StringPtr(s).get()); }

struct Options {
  std::string model, policy, out, out_dir = "ctmdp_demo", scheme = "euler", experiment, dump, policy_out;
  double dt = 1e-3, s = 0.0;
  int state = 1;
  std::uint64_t n_paths = 10000, seed = 1, dump_paths = 10;
};

int run_validate(const Options& o) {
  ModelPtr model = load_model(o.model);
  int all_pass = 0;
  char* report = nullptr;
  check(ctmdp_model_validate(model.get(), &all_pass, &report), "validating");
  std::string text = take(report);
  if (o.out.empty()) std::cout << text;
  else write_text(o.out, text);
  if (!all_pass) std::cerr << "assumption check failed; see report\n";
  return all_pass ? kOk : kFailed;
}

int run_solve(const Options& o) {
  ModelPtr model = load_model(o.model);
  ValuePtr value = solve(model.get(), o.dt, o.scheme);
  char* csv = nullptr;
  check(ctmdp_value_to_csv(value.get(), &csv), "formatting value");
  write_text(o.out, take(csv));
  if (!o.policy_out.empty()) {
    ctmdp_policy* p = nullptr;
    check(ctmdp_policy_feedback(model.get(), value.get(), &p), "building feedback");
    PolicyPtr policy(p);
    char* text = nullptr;
    check(ctmdp_policy_to_json(model.get(), policy.get(), &text), "writing policy");
    write_text(o.policy_out, take(text));
  }
  return kOk;
}

int run_simulate(const Options& o) {
  ModelPtr model = load_model(o.model);
  PolicyPtr policy;
  ctmdp_policy* p = nullptr;
  if (!o.policy.empty()) {
    check(ctmdp_policy_load(model.get(), o.policy.c_str(), &p), "loading policy '" + o.policy + "'");
  } else {
    ValuePtr value = solve(model.get(), o.dt, o.scheme);
    check(ctmdp_policy_feedback(model.get(), value.get(), &p), "building feedback");
  }
  policy.reset(p);
  ctmdp_estimate est{};
  check(ctmdp_estimate_cost(model.get(), policy.get(), o.s, o.state, o.n_paths, o.seed, &est), "simulating");
  char* csv = nullptr;
  check(ctmdp_estimate_to_csv(&est, &csv), "formatting estimate");
  write_text(o.out, take(csv));
  if (!o.dump.empty()) {
    char* paths = nullptr;
    check(ctmdp_dump_trajectories(model.get(), policy.get(), o.s, o.state, o.dump_paths, o.seed, &paths),
          "dumping trajectories");
    write_text(o.dump, take(paths));
  }
  return kOk;
}

int run_verify(const Options& o) {
  ModelPtr model = load_model(o.model);
  int passed = 0;
  char* report = nullptr;
  check(ctmdp_verify(model.get(), o.experiment.c_str(), o.dt, o.scheme.c_str(), o.n_paths, o.seed, o.s, o.state,
                     &passed, &report),
        "experiment '" + o.experiment + "'");
  write_text(o.out, take(report));
  if (!passed) std::cerr << "experiment '" << o.experiment << "' failed; see " << o.out << "\n";
  return passed ? kOk : kFailed;
}

int run_demo(const Options& o) {
  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  auto path = [&](const char* name) { return (fs::path(o.out_dir) / name).string(); };

  ctmdp_model* raw = nullptr;
  check(ctmdp_model_demo(10, &raw), "building demo model");
  ModelPtr model(raw);
  check(ctmdp_model_demo(4, &raw), "building 4-state demo model");
  ModelPtr small(raw);

  char* text = nullptr;
  check(ctmdp_model_to_json(model.get(), &text), "writing model");
  write_text(path("admission.json"), take(text));
  check(ctmdp_model_to_json(small.get(), &text), "writing model");
  write_text(path("admission_4.json"), take(text));

  json summary{{"model", "admission.json"}, {"dt", o.dt}, {"scheme", o.scheme}, {"n_paths", o.n_paths},
               {"seed", o.seed}};
  bool all_passed = true;

  int valid = 0;
  check(ctmdp_model_validate(model.get(), &valid, &text), "validating");
  write_text(path("validate.json"), take(text));
  summary["validate"] = valid != 0;
  all_passed = all_passed && valid;

  ValuePtr value = solve(model.get(), o.dt, o.scheme);
  check(ctmdp_value_to_csv(value.get(), &text), "formatting value");
  write_text(path("value.csv"), take(text));
  double v0 = 0.0;
  check(ctmdp_value_at(value.get(), 0.0, 1, &v0), "reading V(0,1)");
  summary["V_0_1"] = v0;

  struct Run {
    const char* experiment;
    const ctmdp_model* model;
    const char* file;
  };
  const Run runs[] = {{"dpp", model.get(), "dpp.json"},
                      {"lipschitz", model.get(), "lipschitz.json"},
                      {"delay-no-gain", model.get(), "delay_no_gain.json"},
                      {"oracle", small.get(), "oracle.json"}};
  json experiments = json::object();
  for (const auto& r : runs) {
    int passed = 0;
    check(ctmdp_verify(r.model, r.experiment, o.dt, o.scheme.c_str(), o.n_paths, o.seed, 0.0, 1, &passed, &text),
          std::string("experiment '") + r.experiment + "'");
    write_text(path(r.file), take(text));
    experiments[r.experiment] = {{"passed", passed != 0}, {"report", r.file}};
    all_passed = all_passed && passed;
    std::cout << r.experiment << ": " << (passed ? "pass" : "FAIL") << "\n";
  }
  summary["experiments"] = experiments;
  summary["all_passed"] = all_passed;
  write_text(path("summary.json"), summary.dump(2) + "\n");
  std::cout << "summary written to " << path("summary.json") << "\n";
  return all_passed ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon continuous-time MDP solver and verification tool"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check H1-H3 and the cost bounds of a model");
  validate->add_option("--model", o.model, "Model JSON file")->required();
  validate->add_option("--out", o.out, "Report file (stdout if omitted)");

  auto* solve_cmd = app.add_subcommand("solve", "Solve the HJB equation backward in time");
  solve_cmd->add_option("--model", o.model, "Model JSON file")->required();
  solve_cmd->add_option("--dt", o.dt, "Time step")->required();
  solve_cmd->add_option("--scheme", o.scheme, "euler or rk4")->capture_default_str();
  solve_cmd->add_option("--out", o.out, "Value CSV (t,i,V,argmin_u)")->required();
  solve_cmd->add_option("--policy-out", o.policy_out, "Also write the feedback policy as JSON");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the expected cost of a policy");
  simulate->add_option("--model", o.model, "Model JSON file")->required();
  simulate->add_option("--policy", o.policy, "Policy JSON file (HJB feedback if omitted)");
  simulate->add_option("--dt", o.dt, "Solver step for the default feedback policy")->capture_default_str();
  simulate->add_option("--scheme", o.scheme, "Solver scheme for the default feedback policy")->capture_default_str();
  simulate->add_option("--s", o.s, "Start time")->capture_default_str();
  simulate->add_option("--i", o.state, "Start state (1-based)")->capture_default_str();
  simulate->add_option("--n", o.n_paths, "Number of paths")->required()->check(CLI::Range(2ULL, ~0ULL));
  simulate->add_option("--seed", o.seed, "Random seed")->required();
  simulate->add_option("--out", o.out, "Estimate CSV (mean,stderr,n,seed)")->required();
  simulate->add_option("--dump", o.dump, "Trajectory CSV (path_id,t,state,event,cost_so_far)");
  simulate->add_option("--dump-paths", o.dump_paths, "Number of trajectories to dump")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Run a verification experiment");
  verify->add_option("--model", o.model, "Model JSON file")->required();
  verify->add_option("--experiment", o.experiment, "dpp, lipschitz, delay-no-gain or oracle")
      ->required()
      ->check(CLI::IsMember({"dpp", "dpp-deterministic", "dpp-first-jump", "lipschitz", "delay-no-gain", "oracle"}));
  verify->add_option("--dt", o.dt, "Solver time step")->required();
  verify->add_option("--scheme", o.scheme, "euler or rk4")->capture_default_str();
  verify->add_option("--n", o.n_paths, "Paths per policy")->required()->check(CLI::Range(2ULL, ~0ULL));
  verify->add_option("--seed", o.seed, "Random seed")->required();
  verify->add_option("--s", o.s, "Start time")->capture_default_str();
  verify->add_option("--i", o.state, "Start state (1-based)")->capture_default_str();
  verify->add_option("--out", o.out, "Report JSON")->required();

  auto* demo = app.add_subcommand("demo", "Write the admission-control model and run every experiment on it");
  demo->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  demo->add_option("--dt", o.dt, "Solver time step")->capture_default_str();
  demo->add_option("--scheme", o.scheme, "euler or rk4")->capture_default_str();
  demo->add_option("--n", o.n_paths, "Paths per policy")->capture_default_str()->check(CLI::Range(2ULL, ~0ULL));
  demo->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*validate) return run_validate(o);
    if (*solve_cmd) return run_solve(o);
    if (*simulate) return run_simulate(o);
    if (*verify) return run_verify(o);
    if (*demo) return run_demo(o);
  } catch (const CliError& e) {
    std::cerr << "error [" << ctmdp_status_name(e.status) << "] " << e.message << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
