#include "ctmdp/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctmdp/errors.hpp"

namespace ctmdp {

TimeGrid::TimeGrid(double horizon, std::size_t intervals) : step_(horizon / static_cast<double>(intervals)) {
  nodes_.resize(intervals + 1);
  for (std::size_t n = 0; n <= intervals; ++n)
    nodes_[n] = horizon * static_cast<double>(n) / static_cast<double>(intervals);
  nodes_.back() = horizon;
}

TimeGrid TimeGrid::with_intervals(double horizon, std::size_t intervals) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw Error(ErrorCode::invalid_argument, "time grid horizon must be positive and finite");
  if (intervals < 2) throw Error(ErrorCode::invalid_argument, "time grid needs at least 2 intervals");
  return TimeGrid(horizon, intervals);
}

TimeGrid TimeGrid::with_step(double horizon, double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw Error(ErrorCode::invalid_argument, "time step must be positive and finite, got " + std::to_string(step));
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw Error(ErrorCode::invalid_argument, "time grid horizon must be positive and finite");
  // Tolerate T/step landing a hair above an integer.
  double ratio = horizon / step;
  auto intervals = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  return with_intervals(horizon, std::max<std::size_t>(intervals, 2));
}

std::size_t TimeGrid::left_index(double t) const noexcept {
  if (t <= nodes_.front()) return 0;
  if (t >= nodes_.back()) return nodes_.size() - 1;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

bool TimeGrid::same_as(const TimeGrid& other) const noexcept {
  return nodes_.size() == other.nodes_.size() &&
         std::abs(horizon() - other.horizon()) <= 1e-12 * std::max(1.0, horizon());
}

}  // namespace ctmdp
