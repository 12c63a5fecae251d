#include <doctest.h>

#include <cmath>

#include "ctmdp/demo.hpp"
#include "ctmdp/errors.hpp"
#include "ctmdp/hjb.hpp"
#include "ctmdp/policy.hpp"
#include "support.hpp"

using namespace ctmdp;
using ctmdp::test::Gen;

namespace {

// Independent ODE reference (see tests/oracles/frozen_values.py).
constexpr double kTwoStateV01 = 0.43233235838169365;
const double kAdmission4[] = {0.17395152176059264, 0.2999580399788077, 0.4818948180688392, 0.6447660298623509};
const double kAdmission10[] = {0.17599135495065643, 0.3077872382024995, 0.5161833371877778, 0.774095837003994,
                               1.0576388179731822,  1.3519142458876698, 1.6490691761130547, 1.9423957479876586,
                               2.215313539004822,   2.417458968923621};

ModelSpec uncontrolled_constant(double c, std::vector<double> g) {
  const std::vector<RateEntry> rates{{0, 1, 0, 1.0}, {1, 2, 0, 0.5}, {2, 0, 0, 2.0}};
  return test::constant_cost_model(3, {0.0}, rates, c, std::move(g));
}

}  // namespace

TEST_SUITE("hjb") {
  TEST_CASE("hamiltonian examples") {
    ModelSpec zero = uncontrolled_constant(0.0, {0, 0, 0});
    const double flat[] = {2.0, 2.0, 2.0};
    CHECK(hamiltonian(zero, 0.3, 1, flat).value == 0.0);

    ModelSpec two = two_state_model();
    const double v[] = {0.0, 1.0};
    CHECK(hamiltonian(two, 0.0, 0, v).value == 1.0);

    ModelSpec ctrl = test::two_action_model();
    HamiltonianValue h = hamiltonian(ctrl, 0.5, 0, v);
    CHECK(h.value == 1.5);
    CHECK(h.argmin == 0);
  }

  TEST_CASE("ties go to the lowest action index") {
    const std::vector<RateEntry> rates{{0, 1, 0, 1.0}, {0, 1, 1, 1.0}, {1, 0, 2, 1.0}};
    ModelSpec m = test::constant_cost_model(2, {0.0, 1.0, 2.0}, rates, 0.0, {0.0, 0.0});
    ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 0.01));
    for (std::size_t n = 0; n < v.grid().size(); ++n)
      for (int i = 0; i < 2; ++i) CHECK(v.argmin(n, i) == 0);
  }

  TEST_CASE("zero data gives the zero value") {
    ModelSpec m = uncontrolled_constant(0.0, {0, 0, 0});
    ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 0.01), Scheme::rk4);
    for (std::size_t n = 0; n < v.grid().size(); ++n)
      for (int i = 0; i < 3; ++i) CHECK(v.value(n, i) == 0.0);
    CHECK(residual(m, v) == 0.0);
  }

  TEST_CASE("constant running cost integrates exactly") {
    ModelSpec m = uncontrolled_constant(0.7, {0, 0, 0});
    for (Scheme scheme : {Scheme::explicit_euler, Scheme::rk4}) {
      ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 1e-3), scheme);
      double worst = 0.0;
      for (std::size_t n = 0; n < v.grid().size(); ++n)
        for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(v.value(n, i) - 0.7 * (1.0 - v.grid().node(n))));
      CHECK(worst <= 1e-10);
      CHECK(residual(m, v) <= 1e-10);
    }
  }

  TEST_CASE("two-state closed form") {
    ModelSpec m = two_state_model();
    ValueFunction rk = solve_backward(m, TimeGrid::with_step(1.0, 1e-3), Scheme::rk4);
    CHECK(std::abs(rk.value(0, 0) - kTwoStateV01) <= 1e-6);
    for (std::size_t n = 0; n < rk.grid().size(); n += 50) {
      const double s = rk.grid().node(n);
      CHECK(std::abs(rk.value(n, 0) - (1.0 - std::exp(-2.0 * (1.0 - s))) / 2.0) <= 1e-12);
    }
    CHECK(residual(m, rk) <= 1e-5);

    ValueFunction eu = solve_backward(m, TimeGrid::with_step(1.0, 1e-3));
    CHECK(std::abs(eu.value(0, 0) - kTwoStateV01) <= scheme_tolerance(m, 1e-3));
  }

  TEST_CASE("admission values agree with the ODE reference") {
    ModelSpec m4 = demo_model(4);
    ValueFunction v4 = solve_backward(m4, TimeGrid::with_step(1.0, 1e-3), Scheme::rk4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(v4.value(0, i) - kAdmission4[i]) <= 1e-9);

    ModelSpec m10 = demo_model();
    ValueFunction v10 = solve_backward(m10, TimeGrid::with_step(1.0, 1e-3), Scheme::rk4);
    ValueFunction e10 = solve_backward(m10, TimeGrid::with_step(1.0, 1e-3));
    for (int i = 0; i < 10; ++i) {
      CHECK(std::abs(v10.value(0, i) - kAdmission10[i]) <= 1e-9);
      CHECK(std::abs(e10.value(0, i) - kAdmission10[i]) <= scheme_tolerance(m10, 1e-3));
    }
  }

  TEST_CASE("feedback argmin matches a direct scan of the Hamiltonian") {
    ModelSpec m = demo_model(2);
    ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, 1e-2));
    for (std::size_t n = 0; n < v.grid().size(); ++n)
      for (int i = 0; i < 2; ++i) {
        auto row = v.row(n);
        double best = INFINITY;
        int best_u = -1;
        for (std::size_t u = 0; u < m.n_actions(); ++u) {
          double h = m.running_cost()(v.grid().node(n), i, u);
          for (int j = 0; j < 2; ++j)
            if (j != i) h += m.generator().rate(i, j, u) * (row[j] - row[i]);
          if (h < best) best = h, best_u = static_cast<int>(u);
        }
        CHECK(v.argmin(n, i) == best_u);
      }
  }

  TEST_CASE("euler stability bound is enforced") {
    ModelSpec m = demo_model();  // M = 3
    CHECK_NOTHROW(solve_backward(m, TimeGrid::with_step(1.0, 1.0 / 6.0)));
    try {
      solve_backward(m, TimeGrid::with_step(1.0, 0.2));
      FAIL("expected StabilityViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::stability_violation);
    }
    CHECK_NOTHROW(solve_backward(m, TimeGrid::with_step(1.0, 0.4), Scheme::rk4));
    CHECK_THROWS_AS(solve_backward(m, TimeGrid::with_step(1.0, 0.5), Scheme::rk4), Error);
  }

  TEST_CASE("grid horizon must match the model") {
    CHECK_THROWS_AS(solve_backward(two_state_model(), TimeGrid::with_step(2.0, 0.01)), Error);
  }

  TEST_CASE("scheme convergence on the closed form") {
    ModelSpec m = two_state_model();
    auto err = [&](double dt, Scheme s) {
      return std::abs(solve_backward(m, TimeGrid::with_step(1.0, dt), s).value(0, 0) - kTwoStateV01);
    };
    const double e1 = err(0.02, Scheme::explicit_euler), e2 = err(0.01, Scheme::explicit_euler);
    CHECK(e2 / e1 == doctest::Approx(0.5).epsilon(0.05));
    const double r1 = err(0.1, Scheme::rk4), r2 = err(0.05, Scheme::rk4);
    CHECK(r1 / r2 > 12.0);
  }

  TEST_CASE("comparison: equal and shifted terminal data") {
    ModelSpec m = demo_model(4);
    const std::vector<double> g1 = m.terminal_cost();
    ComparisonReport same = comparison_test(m, g1, g1, TimeGrid::with_step(1.0, 1e-3));
    CHECK(same.interior_sup == 0.0);
    CHECK(same.terminal_sup == 0.0);
    CHECK(same.passed);

    std::vector<double> g2 = g1;
    for (double& x : g2) x += 0.25;
    ComparisonReport shifted = comparison_test(m, g1, g2, TimeGrid::with_step(1.0, 1e-3));
    CHECK(shifted.terminal_sup == doctest::Approx(0.25));
    CHECK(shifted.interior_sup == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(shifted.passed);
  }

  TEST_CASE("value interpolation is linear between nodes") {
    ModelSpec m = two_state_model();
    ValueFunction v = solve_backward(m, TimeGrid::with_intervals(1.0, 4), Scheme::rk4);
    CHECK(v.interpolate(0.125, 0) == doctest::Approx(0.5 * (v.value(0, 0) + v.value(1, 0))));
    CHECK(v.interpolate(1.0, 1) == 1.0);
  }
}
