#pragma once

#include <optional>
#include <vector>

#include "hjreach/grid.hpp"

namespace hjreach {

// Rectangular car footprint, centered on the reference point.
struct BodyDims {
  double length_m = 4.5;
  double width_m = 1.8;
};

// Pose of body B in the frame of body A (A axis-aligned at the origin).
struct RelativePose {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
};

// Orientation-dependent margin m(dtheta) >= 0, sampled uniformly on the
// periodic interval [-pi, pi) and linearly interpolated.
class SeverityShape {
 public:
  explicit SeverityShape(std::vector<double> samples);
  double margin(double dtheta) const;
  const std::vector<double>& samples() const noexcept { return samples_; }

 private:
  std::vector<double> samples_;
};

// Positive separation when disjoint (Euclidean distance between the two
// rectangles), negative minimum separating-axis translation when overlapping,
// zero when touching.
double signed_distance_rect(const RelativePose& pose, const BodyDims& a, const BodyDims& b);

// Samples l(z) on a grid whose first three dims are (dx, dy, dtheta) with
// dtheta periodic over 2*pi. Trailing dims are ignored (l is constant along
// them). With a shape, l_shaped = l - m(dtheta).
ScalarField build_ell_field(const GridSpec& grid, const BodyDims& a, const BodyDims& b,
                            const std::optional<SeverityShape>& shape = std::nullopt);

}  // namespace hjreach
