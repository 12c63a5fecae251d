// Acceptance run: one PASS/FAIL line per criterion, reports written to a
// directory (first argument, default ./acceptance_reports). Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ctmdp/demo.hpp"
#include "ctmdp/io.hpp"
#include "ctmdp/simulate.hpp"
#include "ctmdp/verify.hpp"
#include "support.hpp"

using namespace ctmdp;
using io::json;
namespace fs = std::filesystem;

namespace {

constexpr double kDt = 1e-3;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool passed = false;
  std::string summary;
  json report;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Outcome closed_form() {
  const double exact = (1.0 - std::exp(-2.0)) / 2.0;
  ModelSpec m = two_state_model();
  ValueFunction v = solve_backward(m, TimeGrid::with_step(m.horizon(), kDt), Scheme::rk4);
  const double err = std::abs(v.value(0, 0) - exact);
  McEstimate e = estimate_J(m, feedback_from_value(v, m), 0.0, 0, 100000, kSeed);
  const double mc_gap = std::abs(e.mean - exact);
  Outcome o;
  o.passed = err <= 1e-6 && mc_gap <= 3.0 * e.std_error;
  o.summary = "|V(0,1) - (1-e^-2)/2| = " + num(err) + " (<= 1e-6), MC gap " + num(mc_gap) + " vs 3 stderr " +
              num(3.0 * e.std_error);
  o.report = {{"V", v.value(0, 0)},     {"exact", exact},           {"solver_error", err},
              {"mc_mean", e.mean},      {"mc_stderr", e.std_error}, {"n_paths", e.n_paths},
              {"seed", e.seed},         {"passed", o.passed}};
  return o;
}

Outcome oracle_sandwich() {
  ModelSpec m = demo_model(4);
  ValueFunction v = solve_backward(m, TimeGrid::with_step(m.horizon(), kDt));
  const std::size_t ks[] = {2, 4, 8};
  ExperimentReport r = oracle_check(m, v, 0.0, 0, ks);
  Outcome o;
  o.passed = r.passed;
  o.summary = r.details + "; V = " + num(r.quantities.at("V"));
  o.report = io::report_to_json(r);
  return o;
}

Outcome dpp_both(const ModelSpec& m, const ValueFunction& v) {
  DppConfig deterministic;
  deterministic.rule = StoppingRule::deterministic;
  deterministic.t1 = 0.5;
  DppConfig capped;
  capped.rule = StoppingRule::first_jump_capped;
  capped.t1 = 0.2;
  ExperimentReport a = dpp_check(m, v, 0.0, 0, deterministic, 10000, kSeed);
  ExperimentReport b = dpp_check(m, v, 0.0, 0, capped, 10000, kSeed);
  Outcome o;
  o.passed = a.passed && b.passed;
  o.summary = "tau = 0.5: " + std::string(a.passed ? "pass" : "FAIL") + " (" + a.details + "); tau = first jump ^ 0.2: " +
              (b.passed ? "pass" : "FAIL") + " (" + b.details + ")";
  o.report = {{"deterministic", io::report_to_json(a)}, {"first_jump_capped", io::report_to_json(b)}};
  return o;
}

Outcome lipschitz_all() {
  Outcome o;
  o.passed = true;
  o.report = json::object();
  const std::pair<const char*, ModelSpec> instances[] = {
      {"admission", demo_model()}, {"admission_4", demo_model(4)}, {"two_state", two_state_model()}};
  for (const auto& [name, m] : instances) {
    ExperimentReport r = lipschitz_check(m, solve_backward(m, TimeGrid::with_step(m.horizon(), kDt)));
    o.passed = o.passed && r.passed;
    o.summary += std::string(o.summary.empty() ? "" : "; ") + name + " " + num(r.quantities.at("empirical_constant")) +
                 " <= " + num(r.quantities.at("bound_constant")) + " + " + num(r.tolerance);
    o.report[name] = io::report_to_json(r);
  }
  return o;
}

Outcome tightness() {
  ModelSpec m = demo_model();
  TimeGrid grid = TimeGrid::with_step(m.horizon(), kDt);
  const double checkpoints[] = {0.25, 0.5, 1.0};
  const double starts[] = {0.0, 0.25, 0.5, 0.75, 0.9};
  Outcome o;
  o.passed = true;
  o.report = json::array();
  double worst_lyapunov = INFINITY, worst_window = INFINITY;
  for (std::uint64_t k = 0; k < 5; ++k) {
    DelayPolicy p = random_delay_policy(m, DelayParams{0.1, 1, 0.0}, hash_words(kSeed, {k, 5}), grid);
    json entry{{"policy", k}};
    for (const auto& pt : lyapunov_trace(m, p, 0.0, 0, 10000, kSeed + k, checkpoints)) {
      o.passed = o.passed && pt.holds;
      worst_lyapunov = std::min(worst_lyapunov, pt.margin);
      entry["lyapunov"].push_back({{"t", pt.time}, {"mean", pt.mean}, {"stderr", pt.std_error}, {"bound", pt.bound}});
    }
    for (double width : {0.05, 0.1})
      for (const auto& pt : jump_window_check(m, p, 0.0, 0, 10000, kSeed + k, width, starts)) {
        o.passed = o.passed && pt.holds;
        worst_window = std::min(worst_window, pt.bound + 3.0 * pt.std_error - pt.frequency);
        entry["windows"].push_back({{"start", pt.start}, {"width", pt.width}, {"frequency", pt.frequency},
                                    {"stderr", pt.std_error}, {"bound", pt.bound}});
      }
    o.report.push_back(entry);
  }
  o.summary = "5 policies; smallest moment-bound margin " + num(worst_lyapunov) + ", smallest window margin " +
              num(worst_window);
  return o;
}

Outcome comparison() {
  test::Gen gen(kSeed);
  Outcome o;
  o.passed = true;
  o.report = json::array();
  double worst = INFINITY;
  for (int trial = 0; trial < 25; ++trial) {
    ModelSpec m = gen.model(gen.integer(2, 5), static_cast<std::size_t>(gen.integer(2, 3)), gen.integer(1, 2));
    std::vector<double> g2(m.terminal_cost().size());
    for (double& x : g2) x = gen.uniform(0.0, 1.0);
    ComparisonReport r = comparison_test(m, m.terminal_cost(), g2, TimeGrid::with_step(m.horizon(), kDt));
    o.passed = o.passed && r.passed;
    worst = std::min(worst, r.margin);
    o.report.push_back({{"n_states", m.n_states()},
                        {"n_actions", m.n_actions()},
                        {"interior_sup", r.interior_sup},
                        {"terminal_sup", r.terminal_sup},
                        {"tolerance", r.tolerance},
                        {"passed", r.passed}});
  }
  o.summary = "25 random instances; smallest margin terminal_sup + tol - interior_sup = " + num(worst);
  return o;
}

Outcome delay_gain(const ModelSpec& m, const ValueFunction& v) {
  ExperimentReport r = delay_no_gain(m, v, DelayParams{0.1, 1, 0.0}, 50, 10000, kSeed);
  Outcome o;
  o.passed = r.passed;
  o.summary = r.details + "; gap range [" + num(r.quantities.at("gap_min")) + ", " + num(r.quantities.at("gap_max")) + "]";
  o.report = io::report_to_json(r);
  return o;
}

void write_report(const fs::path& dir, const std::string& name, const json& report) {
  io::write_file((dir / name).string(), report.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_reports");
  fs::create_directories(out / "threads_a");
  fs::create_directories(out / "threads_b");

  int failed = 0;
  auto run = [&](int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.passed = false;
      o.summary = std::string("error: ") + e.what();
    }
    const double elapsed = seconds_since(start);
    const bool in_time = budget_s <= 0.0 || elapsed <= budget_s;
    const bool ok = o.passed && in_time;
    if (!ok) ++failed;
    std::printf("criterion %d %s: %s (%.1f s%s) %s\n", id, title, ok ? "PASS" : "FAIL", elapsed,
                budget_s > 0.0 ? (in_time ? " within budget" : " OVER BUDGET") : "", o.summary.c_str());
    std::fflush(stdout);
    if (!o.report.is_null()) write_report(out, "criterion_" + std::to_string(id) + ".json", o.report);
    return o;
  };

  // Criteria 1, 3 and 7 run once per thread setting; criterion 8 compares the files.
  ::setenv("CTMDP_THREADS", "1", 1);
  const ModelSpec demo = demo_model();
  const ValueFunction v = solve_backward(demo, TimeGrid::with_step(demo.horizon(), kDt));

  Outcome c1 = run(1, "closed-form agreement", 30.0, closed_form);
  run(2, "oracle sandwich", 120.0, oracle_sandwich);
  Outcome c3 = run(3, "dynamic programming principle", 120.0, [&] { return dpp_both(demo, v); });
  run(4, "time-Lipschitz bound", 0.0, lipschitz_all);
  run(5, "moment and jump-window bounds", 0.0, tightness);
  run(6, "comparison principle", 0.0, comparison);
  Outcome c7 = run(7, "delay brings no gain", 300.0, [&] { return delay_gain(demo, v); });

  run(8, "determinism across worker counts", 0.0, [&] {
    const json first[] = {c1.report, c3.report, c7.report};
    const char* names[] = {"criterion_1.json", "criterion_3.json", "criterion_7.json"};
    for (int k = 0; k < 3; ++k) write_report(out / "threads_a", names[k], first[k]);
    ::setenv("CTMDP_THREADS", "3", 1);
    write_report(out / "threads_b", names[0], closed_form().report);
    write_report(out / "threads_b", names[1], dpp_both(demo, v).report);
    write_report(out / "threads_b", names[2], delay_gain(demo, v).report);
    Outcome o;
    o.passed = true;
    for (const char* name : names) {
      const bool same = io::read_file((out / "threads_a" / name).string()) == io::read_file((out / "threads_b" / name).string());
      o.passed = o.passed && same;
      o.summary += std::string(name) + (same ? " identical; " : " DIFFERS; ");
    }
    o.summary += "CTMDP_THREADS=1 vs 3";
    return o;
  });

  std::printf("%d of 8 criteria failed\n", failed);
  return failed;
}
