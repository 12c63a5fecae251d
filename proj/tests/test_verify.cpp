#include <doctest.h>

#include <cmath>

#include "ctmdp/demo.hpp"
#include "ctmdp/errors.hpp"
#include "ctmdp/verify.hpp"
#include "support.hpp"

using namespace ctmdp;

namespace {

// Exact cost of the stationary policy (0.5, 2, 2, 2) on the 4-state admission
// chain, from a SciPy matrix exponential (tests/oracles/frozen_values.py).
constexpr double kAdmission4Stationary = 0.17395152176059303;

ModelSpec zero_model() {
  const std::vector<RateEntry> rates{{0, 1, 0, 1.0}, {0, 1, 1, 2.0}, {1, 0, 0, 1.0}};
  return test::constant_cost_model(2, {0.0, 1.0}, rates, 0.0, {0.0, 0.0});
}

ModelSpec constant_model(double c) {
  const std::vector<RateEntry> rates{{0, 1, 0, 1.0}, {0, 1, 1, 2.0}, {1, 0, 0, 1.0}, {1, 0, 1, 0.5}};
  return test::constant_cost_model(2, {0.0, 1.0}, rates, c, {0.0, 0.0});
}

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("oracle on the 4-state admission chain") {
    ModelSpec m = demo_model(4);
    for (std::size_t k : {2u, 4u, 8u})
      CHECK(std::abs(brute_force_value(m, 0.0, 0, k) - kAdmission4Stationary) <= 1e-12);
    const std::vector<std::size_t> stationary(4, 2);
    std::vector<std::vector<std::size_t>> plan(3, stationary);
    plan[0][0] = plan[1][0] = plan[2][0] = 0;
    CHECK(std::abs(evaluate_piecewise_policy(m, 0.0, 0, plan) - kAdmission4Stationary) <= 1e-12);
  }

  TEST_CASE("single-action oracle equals the closed form") {
    ModelSpec m = two_state_model();
    CHECK(std::abs(brute_force_value(m, 0.0, 0, 3) - (1.0 - std::exp(-2.0)) / 2.0) <= 1e-12);
    CHECK(std::abs(brute_force_value(m, 0.5, 0, 2) - (1.0 - std::exp(-1.0)) / 2.0) <= 1e-12);
  }

  TEST_CASE("oracle under constant cost is c (T - s)") {
    ModelSpec m = constant_model(0.3);
    CHECK(brute_force_value(m, 0.0, 1, 4) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(brute_force_value(m, 0.4, 0, 2, OracleClass::exhaustive) == doctest::Approx(0.18).epsilon(1e-12));
  }

  TEST_CASE("oracle complexity budget") {
    ModelSpec m = demo_model(4);  // 3^4 = 81 assignments per interval
    CHECK_NOTHROW(brute_force_value(m, 0.0, 0, 3, OracleClass::exhaustive));  // 81^3
    try {
      brute_force_value(m, 0.0, 0, 4, OracleClass::exhaustive);  // 81^4 > 1e6
      FAIL("expected ComplexityBudgetExceeded");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::complexity_budget_exceeded);
    }
    CHECK_THROWS_AS(brute_force_value(demo_model(), 0.0, 0, 2), Error);  // 10 states
  }

  TEST_CASE("two-action chain: oracle matches the solver") {
    ModelSpec m = demo_model(2);
    ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 1e-3));
    const double oracle = brute_force_value(m, 0.0, 0, 4);
    CHECK(oracle >= v.value(0, 0) - 1e-3);
    CHECK(std::abs(oracle - v.value(0, 0)) <= std::max(1e-3, scheme_tolerance(m, 1e-3)));
    const std::size_t ks[] = {1, 2, 4};
    CHECK(oracle_check(m, v, 0.0, 0, ks).passed);
  }

  TEST_CASE("dpp with zero data") {
    ModelSpec m = zero_model();
    ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 1e-2));
    DppConfig cfg;
    cfg.n_random_policies = 3;
    ExperimentReport r = dpp_check(m, v, 0.0, 0, cfg, 200, 1);
    CHECK(r.passed);
    CHECK(r.quantities.at("V") == 0.0);
    CHECK(r.quantities.at("feedback_mean") == 0.0);
  }

  TEST_CASE("dpp on the uncontrolled chain matches the tower property") {
    ModelSpec m = two_state_model();
    ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 1e-3), Scheme::rk4);
    DppConfig cfg;
    cfg.t1 = 0.5;
    cfg.n_random_policies = 2;
    ExperimentReport r = dpp_check(m, v, 0.0, 0, cfg, 20000, 8);
    CHECK(r.passed);
    // E[V(1/2, L_{1/2})] = P(1/2)[1,2] V(1/2, 2) + P(1/2)[1,1] V(1/2, 1) = V(0, 1).
    CHECK(std::abs(r.quantities.at("feedback_mean") - (1.0 - std::exp(-2.0)) / 2.0) <=
          3.0 * r.quantities.at("feedback_stderr") + 1e-9);
  }

  TEST_CASE("lipschitz examples") {
    ModelSpec zero = zero_model();
    ExperimentReport a = lipschitz_check(zero, solve_backward(zero, TimeGrid::with_step(1.0, 1e-3)));
    CHECK(a.passed);
    CHECK(a.quantities.at("empirical_constant") == 0.0);

    ModelSpec flat = constant_model(0.6);
    ExperimentReport b = lipschitz_check(flat, solve_backward(flat, TimeGrid::with_step(1.0, 1e-3)));
    CHECK(b.passed);
    CHECK(b.quantities.at("empirical_constant") == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(b.quantities.at("bound_constant") == doctest::Approx(1.8));

    ModelSpec two = two_state_model();
    ExperimentReport c = lipschitz_check(two, solve_backward(two, TimeGrid::with_step(1.0, 1e-3), Scheme::rk4));
    CHECK(c.passed);
    CHECK(c.quantities.at("empirical_constant") == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(c.quantities.at("bound_constant") == doctest::Approx(2.0));
  }

  TEST_CASE("delay never pays under constant cost") {
    ModelSpec m = constant_model(0.5);
    ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 1e-2));
    ExperimentReport r = delay_no_gain(m, v, DelayParams{0.1, 1, 0.0}, 4, 100, 2);
    CHECK(r.passed);
    CHECK(std::abs(r.quantities.at("gap_min")) <= 1e-12);
    CHECK(std::abs(r.quantities.at("gap_max")) <= 1e-12);
    CHECK_THROWS_AS(delay_no_gain(m, v, DelayParams{0.1, 0, 0.0}, 4, 100, 2), Error);
  }

  TEST_CASE("delay never pays with a single action") {
    ModelSpec m = two_state_model();
    ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 1e-3), Scheme::rk4);
    ExperimentReport r = delay_no_gain(m, v, DelayParams{0.2, 2, 0.0}, 3, 5000, 4);
    CHECK(r.passed);
  }

  TEST_CASE("value function from another model is rejected") {
    ValueFunction v = solve_backward(two_state_model(), TimeGrid::with_step(1.0, 1e-2));
    CHECK_THROWS_AS(lipschitz_check(demo_model(), v), Error);
  }
}
