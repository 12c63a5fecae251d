#include "ctmdp/demo.hpp"

#include "ctmdp/errors.hpp"

namespace ctmdp {

ModelSpec demo_model(int n_states) {
  if (n_states < 2) throw Error(ErrorCode::invalid_argument, "demo_model needs at least two states");
  const std::vector<double> services{0.5, 1.0, 2.0};
  ActionGrid grid({{services[0]}, {services[1]}, {services[2]}});

  std::vector<RateEntry> rates;
  for (std::size_t u = 0; u < services.size(); ++u)
    for (int i = 0; i < n_states; ++i) {
      if (i + 1 < n_states) rates.push_back({i, i + 1, u, 1.0});
      if (i > 0) rates.push_back({i, i - 1, u, services[u]});
    }
  ControlledGenerator gen(n_states, services.size(), rates, 1);

  std::vector<double> g(static_cast<std::size_t>(n_states));
  std::vector<double> phi(static_cast<std::size_t>(n_states));
  for (int i = 0; i < n_states; ++i) {
    g[static_cast<std::size_t>(i)] = 0.2 * i;
    phi[static_cast<std::size_t>(i)] = i + 1.0;
  }
  const double c1 = 0.1 * (n_states - 1) + 0.05 * services.back();
  const double c2 = 0.2 * (n_states - 1);
  CostSpec costs{RunningCost::linear(n_states, grid, 0.0, 0.0, 0.1, {0.05}), std::move(g), CostBounds{0.0, c1, c2}};
  LyapunovSpec lyapunov{std::move(phi), 1.0, 1.0, {0}};
  return ModelSpec(1.0, std::move(grid), std::move(gen), std::move(costs), std::move(lyapunov));
}

ModelSpec two_state_model() {
  ActionGrid grid(std::vector<std::vector<double>>{{0.0}});
  const RateEntry rates[] = {{0, 1, 0, 1.0}, {1, 0, 0, 1.0}};
  ControlledGenerator gen(2, 1, rates);
  CostSpec costs{RunningCost::constant(2, 1, 0.0), {0.0, 1.0}, std::nullopt};
  return ModelSpec(1.0, std::move(grid), std::move(gen), std::move(costs));
}

}  // namespace ctmdp
