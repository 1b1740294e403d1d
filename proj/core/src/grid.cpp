#include "hjreach/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjreach/error.hpp"
#include "hjreach/parallel.hpp"

namespace hjreach {

GridSpec::GridSpec(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > kMaxDims) {
    throw UsageError("grid must have between 1 and " + std::to_string(kMaxDims) + " dimensions");
  }
  strides_.assign(axes_.size(), 1);
  size_ = 1;
  for (std::size_t d = axes_.size(); d-- > 0;) {
    const Axis& a = axes_[d];
    if (!(std::isfinite(a.lower) && std::isfinite(a.upper)) || !(a.lower < a.upper)) {
      throw UsageError("grid dim " + std::to_string(d) + ": lower must be < upper");
    }
    if (a.count < 3) {
      throw UsageError("grid dim " + std::to_string(d) + ": point count must be >= 3");
    }
    strides_[d] = size_;
    if (size_ > std::numeric_limits<std::size_t>::max() / a.count) {
      throw UsageError("grid point count overflows the index space");
    }
    size_ *= a.count;
  }
}

std::size_t GridSpec::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != ndim()) throw UsageError("index dimension mismatch");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < ndim(); ++d) {
    if (index[d] >= axes_[d].count) throw UsageError("index out of range");
    flat += index[d] * strides_[d];
  }
  return flat;
}

MultiIndex GridSpec::unflatten(std::size_t flat) const noexcept {
  MultiIndex idx{};
  for (std::size_t d = ndim(); d-- > 0;) {
    idx[d] = flat % axes_[d].count;
    flat /= axes_[d].count;
  }
  return idx;
}

void GridSpec::node_state(std::size_t flat, std::span<double> out) const {
  const MultiIndex idx = unflatten(flat);
  for (std::size_t d = 0; d < ndim(); ++d) out[d] = axes_[d].coordinate(idx[d]);
}

std::vector<double> GridSpec::node_state(std::size_t flat) const {
  std::vector<double> out(ndim());
  node_state(flat, out);
  return out;
}

double GridSpec::wrap(std::size_t d, double x) const {
  const Axis& a = axes_.at(d);
  if (!a.periodic) return x;
  double r = std::fmod(x - a.lower, a.period());
  if (r < 0.0) r += a.period();
  if (r >= a.period()) r = 0.0;
  return a.lower + r;
}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw UsageError("field has " + std::to_string(values_.size()) + " values, grid has " +
                     std::to_string(grid_.size()) + " nodes");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw UsageError("field contains non-finite values");
  }
}

ScalarField ScalarField::constant(const GridSpec& grid, double c) {
  return ScalarField(grid, std::vector<double>(grid.size(), c));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

ScalarField sample_field(const GridSpec& grid,
                         const std::function<double(std::span<const double>)>& fn) {
  std::vector<double> values(grid.size());
  parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
    std::array<double, kMaxDims> x{};
    for (std::size_t k = begin; k < end; ++k) {
      grid.node_state(k, std::span<double>(x.data(), grid.ndim()));
      values[k] = fn(std::span<const double>(x.data(), grid.ndim()));
    }
  });
  return ScalarField(grid, std::move(values));
}

namespace {

// Node coordinates round-trip through (x - lower) / h with a few ulps of
// error; snap them so interpolation is exact at nodes.
double snap(double u) {
  const double r = std::round(u);
  return std::abs(u - r) <= 1e-10 * std::max(1.0, std::abs(u)) ? r : u;
}

}  // namespace

GridLocation state_to_index(const GridSpec& grid, std::span<const double> state) {
  if (state.size() != grid.ndim()) {
    throw UsageError("state has dimension " + std::to_string(state.size()) + ", grid has " +
                     std::to_string(grid.ndim()));
  }
  GridLocation loc;
  for (std::size_t d = 0; d < grid.ndim(); ++d) {
    const Axis& a = grid.axis(d);
    const double h = a.spacing();
    if (a.periodic) {
      const double u = snap((grid.wrap(d, state[d]) - a.lower) / h);
      double cell = std::floor(u);
      double off = u - cell;
      auto c = static_cast<std::size_t>(cell);
      if (c >= a.count) {  // rounding right at the seam
        c = 0;
        off = 0.0;
      }
      loc.cell[d] = c;
      loc.offset[d] = off;
      continue;
    }
    const double u = snap((state[d] - a.lower) / h);
    const double last = static_cast<double>(a.count - 1);
    if (u < 0.0) {
      loc.cell[d] = 0;
      loc.offset[d] = 0.0;
      loc.out_of_bounds = true;
    } else if (u > last) {
      loc.cell[d] = a.count - 2;
      loc.offset[d] = 1.0;
      loc.out_of_bounds = true;
    } else {
      const auto c = std::min(static_cast<std::size_t>(std::floor(u)), a.count - 2);
      loc.cell[d] = c;
      loc.offset[d] = u - static_cast<double>(c);
    }
  }
  return loc;
}

OneSidedGradients one_sided_gradients(const ScalarField& field) {
  const GridSpec& grid = field.grid();
  const std::size_t n = grid.size();
  const double* v = field.values().data();
  OneSidedGradients out;
  for (std::size_t d = 0; d < grid.ndim(); ++d) {
    const Axis& a = grid.axis(d);
    const std::size_t stride = grid.stride(d);
    const double inv_h = 1.0 / a.spacing();
    std::vector<double> left(n), right(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = (k / stride) % a.count;
        one_sided_at(v, k, i, a.count, stride, a.periodic, inv_h, left[k], right[k]);
      }
    });
    out.left.emplace_back(grid, std::move(left));
    out.right.emplace_back(grid, std::move(right));
  }
  return out;
}

double interpolate(const GridSpec& grid, std::span<const double> values,
                   std::span<const double> state, bool* out_of_bounds) {
  for (double s : state) {
    if (!std::isfinite(s)) throw UsageError("interpolation state is not finite");
  }
  const GridLocation loc = state_to_index(grid, state);
  if (out_of_bounds) *out_of_bounds = loc.out_of_bounds;
  const std::size_t n = grid.ndim();
  // Base offset and the upper-neighbour step per dimension (periodic seam
  // steps back to index 0).
  std::size_t base = 0;
  std::array<std::ptrdiff_t, kMaxDims> step{};
  for (std::size_t d = 0; d < n; ++d) {
    const Axis& a = grid.axis(d);
    const auto stride = static_cast<std::ptrdiff_t>(grid.stride(d));
    base += loc.cell[d] * grid.stride(d);
    step[d] = (a.periodic && loc.cell[d] + 1 == a.count)
                  ? -static_cast<std::ptrdiff_t>(a.count - 1) * stride
                  : stride;
  }
  double acc = 0.0;
  const std::size_t corners = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    auto idx = static_cast<std::ptrdiff_t>(base);
    for (std::size_t d = 0; d < n; ++d) {
      if (mask & (std::size_t{1} << d)) {
        w *= loc.offset[d];
        idx += step[d];
      } else {
        w *= 1.0 - loc.offset[d];
      }
    }
    if (w != 0.0) acc += w * values[static_cast<std::size_t>(idx)];
  }
  return acc;
}

double interpolate(const ScalarField& field, std::span<const double> state, bool* out_of_bounds) {
  return interpolate(field.grid(), field.values(), state, out_of_bounds);
}

}  // namespace hjreach
