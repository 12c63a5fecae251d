#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ctmdp {

/// Uniform grid 0 = t_0 < ... < t_N = T with N >= 2.
class TimeGrid {
 public:
  /// N = ceil(T / step) intervals; the effective step is T / N (never larger than requested).
  static TimeGrid with_step(double horizon, double step);
  static TimeGrid with_intervals(double horizon, std::size_t intervals);

  std::size_t intervals() const noexcept { return nodes_.size() - 1; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double step() const noexcept { return step_; }
  double horizon() const noexcept { return nodes_.back(); }
  double node(std::size_t n) const { return nodes_.at(n); }
  std::span<const double> nodes() const noexcept { return nodes_; }

  /// Index n of the node with t_n <= t < t_{n+1}; t >= T maps to N.
  std::size_t left_index(double t) const noexcept;

  bool same_as(const TimeGrid& other) const noexcept;

 private:
  TimeGrid(double horizon, std::size_t intervals);

  double step_;
  std::vector<double> nodes_;
};

}  // namespace ctmdp
