#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ctmdp/errors.hpp"
#include "ctmdp/model.hpp"

namespace ctmdp {
namespace {

double w1_line(const Mixture& a, const Mixture& b, const ActionGrid& grid) {
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return grid.point(x)[0] < grid.point(y)[0]; });
  double fa = 0.0, fb = 0.0, total = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    fa += a[order[k]];
    fb += b[order[k]];
    total += std::abs(fa - fb) * (grid.point(order[k + 1])[0] - grid.point(order[k])[0]);
  }
  return total;
}

// Min-cost flow by successive shortest paths on the bipartite transport
// network source -> supply x -> demand y -> sink with cost |x - y|.
class TransportNetwork {
 public:
  explicit TransportNetwork(std::size_t nodes) : adjacency_(nodes) {}

  void add_arc(std::size_t from, std::size_t to, double capacity, double cost) {
    adjacency_[from].push_back(arcs_.size());
    arcs_.push_back({to, capacity, cost});
    adjacency_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0.0, -cost});
  }

  double min_cost(std::size_t source, std::size_t sink, double amount) {
    constexpr double kEps = 1e-15;
    const double inf = std::numeric_limits<double>::infinity();
    double cost = 0.0;
    while (amount > kEps) {
      // Bellman-Ford: the residual graph carries negative reverse costs.
      std::vector<double> dist(adjacency_.size(), inf);
      std::vector<std::size_t> via(adjacency_.size(), SIZE_MAX);
      dist[source] = 0.0;
      for (std::size_t pass = 0; pass < adjacency_.size(); ++pass) {
        bool changed = false;
        for (std::size_t v = 0; v < adjacency_.size(); ++v) {
          if (dist[v] == inf) continue;
          for (std::size_t e : adjacency_[v]) {
            const Arc& arc = arcs_[e];
            if (arc.capacity <= kEps) continue;
            double d = dist[v] + arc.cost;
            if (d < dist[arc.to] - 1e-15) {
              dist[arc.to] = d;
              via[arc.to] = e;
              changed = true;
            }
          }
        }
        if (!changed) break;
      }
      if (dist[sink] == inf) break;
      double push = amount;
      for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to) push = std::min(push, arcs_[via[v]].capacity);
      for (std::size_t v = sink; v != source; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].capacity -= push;
        arcs_[via[v] ^ 1].capacity += push;
      }
      cost += push * dist[sink];
      amount -= push;
    }
    return cost;
  }

 private:
  struct Arc {
    std::size_t to;
    double capacity;
    double cost;
  };
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<Arc> arcs_;
};

double w1_transport(const Mixture& a, const Mixture& b, const ActionGrid& grid) {
  const std::size_t n = grid.size();
  const std::size_t source = 0, sink = 2 * n + 1;
  TransportNetwork net(2 * n + 2);
  const double unbounded = 2.0;  // total mass is 1
  for (std::size_t x = 0; x < n; ++x) {
    if (a[x] > 0.0) net.add_arc(source, 1 + x, a[x], 0.0);
    if (b[x] > 0.0) net.add_arc(1 + n + x, sink, b[x], 0.0);
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (a[x] <= 0.0) continue;
    for (std::size_t y = 0; y < n; ++y)
      if (b[y] > 0.0) net.add_arc(1 + x, 1 + n + y, unbounded, grid.distance(x, y));
  }
  double mass = std::min(std::accumulate(a.weights().begin(), a.weights().end(), 0.0),
                         std::accumulate(b.weights().begin(), b.weights().end(), 0.0));
  return net.min_cost(source, sink, mass);
}

}  // namespace

double wasserstein1(const Mixture& a, const Mixture& b, const ActionGrid& grid) {
  if (a.size() != grid.size() || b.size() != grid.size())
    throw Error(ErrorCode::grid_mismatch, "mixtures must be defined on the given action grid");
  if (a == b) return 0.0;
  double d = grid.dim() == 1 ? w1_line(a, b, grid) : w1_transport(a, b, grid);
  return std::max(d, 0.0);
}

}  // namespace ctmdp
