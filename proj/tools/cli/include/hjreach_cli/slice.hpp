#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hjreach/value_function.hpp"

namespace hjreach::cli {

// A 2-D plane through the grid: two free dims, every other dim fixed.
struct SlicePlane {
  std::size_t dim_x = 0;
  std::size_t dim_y = 1;
  std::vector<double> state;  // fixed coordinates; entries of free dims unused
};

// Builds the plane from name=value fixes. Throws UsageError unless exactly
// two dims remain free or a name is unknown.
SlicePlane make_plane(const GridSpec& grid, const std::vector<std::string>& dim_names,
                      const std::vector<std::pair<std::string, double>>& fixes);

struct Field2D {
  Axis x;
  Axis y;
  std::vector<double> values;  // values[i * y.count + j]

  double at(std::size_t i, std::size_t j) const { return values[i * y.count + j]; }
};

// V on the plane's nodes, multilinear in the fixed coordinates and linear in
// time between stored snapshots.
Field2D slice(const ValueFunction& vf, double t, const SlicePlane& plane);

// Header "x_name,y_name,V" then one row per node, x outer.
void write_slice_csv(std::ostream& out, const Field2D& f, const std::string& x_name,
                     const std::string& y_name);

struct Polyline {
  std::vector<std::array<double, 2>> points;
  bool closed = false;  // first point repeated at the end
};

// Level-set polylines by marching squares. Edge crossings are linearly
// interpolated; saddle cells are split by the cell-average value.
std::vector<Polyline> marching_squares(const Field2D& f, double level);

// Header "polyline,x_name,y_name" then one row per point.
void write_contour_csv(std::ostream& out, const std::vector<Polyline>& lines,
                       const std::string& x_name, const std::string& y_name);

}  // namespace hjreach::cli
