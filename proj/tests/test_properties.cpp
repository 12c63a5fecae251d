#include <doctest.h>

#include <cmath>
#include <cstring>

#include "ctmdp/hjb.hpp"
#include "ctmdp/policy.hpp"
#include "ctmdp/simulate.hpp"
#include "ctmdp/verify.hpp"
#include "support.hpp"

using namespace ctmdp;
using ctmdp::test::Gen;

TEST_SUITE("properties") {
  TEST_CASE("rates are affine in the mixture") {
    Gen gen(1);
    for (int trial = 0; trial < 50; ++trial) {
      ModelSpec m = gen.model(gen.integer(2, 5), static_cast<std::size_t>(gen.integer(2, 4)));
      Mixture a = gen.mixture(m.n_actions()), b = gen.mixture(m.n_actions());
      const double lambda = gen.uniform();
      Mixture c = blend(a, b, lambda);
      for (int i = 0; i < m.n_states(); ++i)
        for (int j = 0; j < m.n_states(); ++j) {
          const double lhs = rate_under_mixture(m.generator(), i, j, c);
          const double rhs = lambda * rate_under_mixture(m.generator(), i, j, a) +
                             (1.0 - lambda) * rate_under_mixture(m.generator(), i, j, b);
          CHECK(std::abs(lhs - rhs) <= 1e-12);
        }
    }
  }

  TEST_CASE("W1 is a metric on sampled mixtures") {
    Gen gen(2);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = static_cast<std::size_t>(gen.integer(2, 5));
      const std::size_t dim = static_cast<std::size_t>(gen.integer(1, 3));
      std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
      for (auto& p : pts)
        for (double& x : p) x = gen.uniform(-2.0, 2.0);
      ActionGrid grid(pts);
      Mixture a = gen.mixture(n), b = gen.mixture(n), c = gen.mixture(n);
      const double ab = wasserstein1(a, b, grid), ba = wasserstein1(b, a, grid);
      const double bc = wasserstein1(b, c, grid), ac = wasserstein1(a, c, grid);
      CHECK(ab >= 0.0);
      CHECK(std::abs(wasserstein1(a, a, grid)) <= 1e-9);
      CHECK(std::abs(ab - ba) <= 1e-9);
      CHECK(ac <= ab + bc + 1e-9);
      if (ab <= 1e-9)
        for (std::size_t u = 0; u < n; ++u) CHECK(std::abs(a[u] - b[u]) <= 1e-6);
    }
  }

  TEST_CASE("rates are W1-Lipschitz in the mixture") {
    Gen gen(3);
    for (int trial = 0; trial < 30; ++trial) {
      ModelSpec m = gen.model(gen.integer(2, 4), static_cast<std::size_t>(gen.integer(2, 4)));
      const auto& q = m.generator();
      const double gap = m.grid().min_gap();
      for (int k = 0; k < 5; ++k) {
        Mixture a = gen.mixture(m.n_actions()), b = gen.mixture(m.n_actions());
        const double w = wasserstein1(a, b, m.grid());
        for (int i = 0; i < m.n_states(); ++i)
          for (int j = 0; j < m.n_states(); ++j) {
            if (i == j) continue;
            double spread = 0.0;
            for (std::size_t u = 0; u < m.n_actions(); ++u)
              for (std::size_t v = 0; v < m.n_actions(); ++v)
                spread = std::max(spread, std::abs(q.rate(i, j, u) - q.rate(i, j, v)));
            CHECK(std::abs(rate_under_mixture(q, i, j, a) - rate_under_mixture(q, i, j, b)) <=
                  spread / gap * w + 1e-12);
          }
      }
    }
  }

  TEST_CASE("the relaxed Hamiltonian is minimized at a Dirac") {
    Gen gen(4);
    for (int trial = 0; trial < 20; ++trial) {
      ModelSpec m = gen.model(gen.integer(2, 5), static_cast<std::size_t>(gen.integer(2, 4)), 2);
      std::vector<double> v(static_cast<std::size_t>(m.n_states()));
      for (double& x : v) x = gen.uniform(-1.0, 2.0);
      const double t = gen.uniform();
      const int i = gen.integer(0, m.n_states() - 1);
      const double dirac = hamiltonian(m, t, i, v).value;
      for (int k = 0; k < 200; ++k) {
        Mixture mu = gen.mixture(m.n_actions());
        double relaxed = 0.0;
        for (std::size_t u = 0; u < m.n_actions(); ++u) {
          double h = m.running_cost()(t, i, u);
          for (int j = 0; j < m.n_states(); ++j)
            if (j != i) h += m.generator().rate(i, j, u) * (v[j] - v[i]);
          relaxed += mu[u] * h;
        }
        CHECK(relaxed >= dirac - 1e-12);
      }
    }
  }

  TEST_CASE("values are bounded and monotone in terminal data") {
    Gen gen(5);
    for (int trial = 0; trial < 15; ++trial) {
      ModelSpec m = gen.model(gen.integer(2, 5), static_cast<std::size_t>(gen.integer(2, 3)));
      const double dt = 1.0 / std::ceil(2.0 * m.rate_bound() / 0.9 + 10.0);
      TimeGrid grid = TimeGrid::with_step(1.0, dt);
      ValueFunction v1 = solve_backward(m, grid);
      std::vector<double> g2 = m.terminal_cost();
      for (double& x : g2) x += gen.uniform(0.0, 0.5);
      ValueFunction v2 = solve_backward(m.with_terminal_cost(g2), grid);
      const auto& b = m.bounds();
      const double tol = scheme_tolerance(m, grid.step());
      for (std::size_t n = 0; n < grid.size(); ++n)
        for (int i = 0; i < m.n_states(); ++i) {
          CHECK(v1.value(n, i) >= 0.0);
          CHECK(v1.value(n, i) <= b.c1 * (1.0 - grid.node(n)) + b.c2 + 1e-12);
          CHECK(v2.value(n, i) >= v1.value(n, i) - tol);
        }
      CHECK(lipschitz_check(m, v1).passed);
    }
  }

  TEST_CASE("comparison principle on random instances") {
    Gen gen(6);
    for (int trial = 0; trial < 10; ++trial) {
      ModelSpec m = gen.model(gen.integer(2, 5), static_cast<std::size_t>(gen.integer(2, 3)));
      std::vector<double> g2(m.terminal_cost().size());
      for (double& x : g2) x = gen.uniform(0.0, 1.0);
      ComparisonReport r = comparison_test(m, m.terminal_cost(), g2, TimeGrid::with_step(1.0, 1e-2));
      CHECK(r.passed);
      CHECK(r.interior_sup <= r.terminal_sup + r.tolerance);
    }
  }

  TEST_CASE("solver and estimator are deterministic") {
    Gen gen(7);
    ModelSpec m = gen.model(4, 3);
    ValueFunction a = solve_backward(m, TimeGrid::with_step(1.0, 0.01));
    ValueFunction b = solve_backward(m, TimeGrid::with_step(1.0, 0.01));
    for (std::size_t n = 0; n < a.grid().size(); ++n) {
      CHECK(std::memcmp(a.row(n).data(), b.row(n).data(), sizeof(double) * 4) == 0);
      CHECK(std::equal(a.argmin_row(n).begin(), a.argmin_row(n).end(), b.argmin_row(n).begin()));
    }
    DelayPolicy p = random_delay_policy(m, DelayParams{0.05, 2, 0.0}, 3, a.grid());
    McEstimate e1 = estimate_J(m, p, 0.1, 2, 500, 11);
    McEstimate e2 = estimate_J(m, p, 0.1, 2, 500, 11);
    CHECK(std::memcmp(&e1.mean, &e2.mean, sizeof(double)) == 0);
  }

  TEST_CASE("simulated jumps respect the bandwidth") {
    Gen gen(8);
    for (int trial = 0; trial < 10; ++trial) {
      const int k = gen.integer(1, 2);
      ModelSpec m = gen.model(gen.integer(3, 6), 2, k, 3.0);
      DelayPolicy p = random_delay_policy(m, DelayParams{0.1, 1, 0.0}, 5, TimeGrid::with_step(1.0, 0.05));
      for (std::uint64_t stream = 0; stream < 50; ++stream) {
        Trajectory t = sample_path_stream(m, p, 0.0, 0, 21, stream);
        auto states = t.segment.states();
        for (std::size_t n = 1; n < states.size(); ++n) {
          CHECK(std::abs(states[n] - states[n - 1]) <= m.generator().bandwidth());
          CHECK(std::abs(states[n] - states[n - 1]) <= k);
        }
      }
    }
  }

  TEST_CASE("delayed slots: identity, monotone lookup time, initial state early") {
    Gen gen(9);
    for (int trial = 0; trial < 50; ++trial) {
      PathSegment path(0.2, 2.0, gen.integer(0, 3));
      double t = 0.2;
      for (int n = 0; n < 6; ++n) {
        t += gen.uniform(0.01, 0.3);
        if (t >= 2.0) break;
        int next = (path.final_state() + gen.integer(1, 3)) % 4;
        path.append_jump(t, next);
      }
      const double r0 = gen.uniform(0.05, 0.5);
      const double at = gen.uniform(0.2, 2.0);
      CHECK(shift_eval(path, 0, r0, 0.2, at) == path.state_at(at));
      for (int k = 1; k < 4; ++k) {
        const double lookup_k = std::max(at - k * r0, 0.2), lookup_prev = std::max(at - (k - 1) * r0, 0.2);
        CHECK(lookup_k <= lookup_prev);
        CHECK(shift_eval(path, k, r0, 0.2, at) == path.state_at(lookup_k));
      }
      const double early = gen.uniform(0.2, 0.2 + r0);
      for (int k = 1; k < 4; ++k) CHECK(shift_eval(path, k, r0, 0.2, early) == path.start_state());
    }
  }

  TEST_CASE("markov controls ignore the path before t") {
    Gen gen(10);
    const std::vector<std::size_t> actions{2, 0, 1, 1};
    DelayPolicy p(DelayParams{}, PolicyKind::markov, TimeGrid::with_step(1.0, 0.1), StateActionRule{actions, 0}, 4, 3);
    for (int trial = 0; trial < 50; ++trial) {
      const double t = gen.uniform(0.3, 1.0);
      const int now = gen.integer(0, 3);
      int first = gen.integer(0, 3);
      if (first == now) first = (now + 1) % 4;
      PathSegment a(0.0, 1.0, {gen.uniform(0.0, 0.25)}, {first, now});
      PathSegment b(0.0, 1.0, now);
      CHECK(p.control_at(a, t) == p.control_at(b, t));
    }
  }

  TEST_CASE("oracle classes are nested and bound the value from above") {
    Gen gen(12);
    for (int trial = 0; trial < 6; ++trial) {
      ModelSpec m = gen.model(gen.integer(2, 3), 2, 1, 2.0, false);  // oracle samples f at midpoints
      const double dt = 1e-3;
      ValueFunction v = solve_backward(m, TimeGrid::with_step(1.0, dt), Scheme::rk4);
      const int i = gen.integer(0, m.n_states() - 1);
      double prev = INFINITY;
      for (std::size_t k : {1u, 2u, 4u}) {
        const double backward = brute_force_value(m, 0.0, i, k);
        const double exhaustive = brute_force_value(m, 0.0, i, k, OracleClass::exhaustive);
        CHECK(backward <= exhaustive + 1e-12);
        CHECK(backward <= prev + 1e-12);
        CHECK(backward >= v.value(0, i) - 1e-6);
        prev = backward;
      }
    }
  }
}
