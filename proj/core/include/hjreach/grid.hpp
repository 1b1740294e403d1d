#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hjreach {

inline constexpr std::size_t kMaxDims = 7;

// One dimension of a rectilinear grid. Periodic axes identify `upper` with
// `lower`, so the upper bound itself is not a sample.
struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  std::size_t count = 3;
  bool periodic = false;

  double spacing() const noexcept {
    return periodic ? (upper - lower) / static_cast<double>(count)
                    : (upper - lower) / static_cast<double>(count - 1);
  }
  double coordinate(std::size_t i) const noexcept {
    return lower + static_cast<double>(i) * spacing();
  }
  double period() const noexcept { return upper - lower; }

  friend bool operator==(const Axis&, const Axis&) = default;
};

using MultiIndex = std::array<std::size_t, kMaxDims>;

// Where a state falls on the grid: lower cell corner plus fractional offset
// in [0, 1] per dimension.
struct GridLocation {
  MultiIndex cell{};
  std::array<double, kMaxDims> offset{};
  bool out_of_bounds = false;
};

class GridSpec {
 public:
  GridSpec() = default;
  // Throws UsageError if any axis is degenerate or the grid exceeds kMaxDims.
  explicit GridSpec(std::vector<Axis> axes);

  std::size_t ndim() const noexcept { return axes_.size(); }
  std::size_t size() const noexcept { return size_; }
  const Axis& axis(std::size_t d) const { return axes_.at(d); }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  double spacing(std::size_t d) const { return axes_.at(d).spacing(); }
  // Row-major, last dimension fastest.
  std::size_t stride(std::size_t d) const { return strides_.at(d); }

  std::size_t flat_index(std::span<const std::size_t> index) const;
  MultiIndex unflatten(std::size_t flat) const noexcept;
  // Physical coordinates of a node.
  void node_state(std::size_t flat, std::span<double> out) const;
  std::vector<double> node_state(std::size_t flat) const;

  // Wraps periodic coordinates into [lower, upper).
  double wrap(std::size_t d, double x) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) { return a.axes_ == b.axes_; }

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

// Samples of a scalar on every grid node. Immutable once built.
class ScalarField {
 public:
  ScalarField() = default;
  // Throws UsageError on length mismatch or non-finite samples.
  ScalarField(GridSpec grid, std::vector<double> values);
  static ScalarField constant(const GridSpec& grid, double c);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t flat) const noexcept { return values_[flat]; }
  std::size_t size() const noexcept { return values_.size(); }

  double min() const;
  double max() const;

  // Moves the sample buffer out; the field is left empty.
  std::vector<double> release() && { return std::move(values_); }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

// Samples fn at every node.
ScalarField sample_field(const GridSpec& grid,
                         const std::function<double(std::span<const double>)>& fn);

// Locates `state` on the grid. Non-periodic coordinates outside the bounds
// are clamped to the boundary cell and flagged; periodic ones wrap.
GridLocation state_to_index(const GridSpec& grid, std::span<const double> state);

// First-order one-sided differences at one node along dimension d. Non-periodic
// boundaries use a linearly extrapolated ghost node (2*edge - interior).
inline void one_sided_at(const double* v, std::size_t flat, std::size_t i, std::size_t count,
                         std::size_t stride, bool periodic, double inv_h, double& left,
                         double& right) noexcept {
  const double c = v[flat];
  if (periodic) {
    const double lo = i == 0 ? v[flat + (count - 1) * stride] : v[flat - stride];
    const double hi = i + 1 == count ? v[flat - (count - 1) * stride] : v[flat + stride];
    left = (c - lo) * inv_h;
    right = (hi - c) * inv_h;
    return;
  }
  if (i == 0) {
    right = (v[flat + stride] - c) * inv_h;
    left = right;
  } else if (i + 1 == count) {
    left = (c - v[flat - stride]) * inv_h;
    right = left;
  } else {
    left = (c - v[flat - stride]) * inv_h;
    right = (v[flat + stride] - c) * inv_h;
  }
}

struct OneSidedGradients {
  std::vector<ScalarField> left;   // one field per dimension
  std::vector<ScalarField> right;
};

OneSidedGradients one_sided_gradients(const ScalarField& field);

// Multilinear interpolation with periodic wrap and clamped extrapolation.
// Throws UsageError for a dimension mismatch or non-finite state.
double interpolate(const ScalarField& field, std::span<const double> state,
                   bool* out_of_bounds = nullptr);

// Same as interpolate() but over a raw sample buffer laid out on `grid`.
double interpolate(const GridSpec& grid, std::span<const double> values,
                   std::span<const double> state, bool* out_of_bounds = nullptr);

}  // namespace hjreach
