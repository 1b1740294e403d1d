#pragma once

#include <vector>

#include "hjreach/grid.hpp"

namespace hjreach {

// Snapshots V(., t_k) of a solved value function, t_k ascending in [-T, 0].
// The last snapshot (t = 0) is the boundary condition.
struct ValueFunction {
  GridSpec grid;
  std::vector<double> times;
  std::vector<ScalarField> fields;
  bool converged = false;

  std::size_t snapshot_count() const noexcept { return times.size(); }
  double horizon() const { return times.empty() ? 0.0 : -times.front(); }
  const ScalarField& at_zero() const { return fields.back(); }
  const ScalarField& final_snapshot() const { return fields.front(); }
};

}  // namespace hjreach
