#include "hjreach/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "hjreach/error.hpp"
#include "hjreach/parallel.hpp"

namespace hjreach {
namespace {

struct Vec2 {
  double x, y;
};

Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 q{a.x + t * ab.x - p.x, a.y + t * ab.y - p.y};
  return std::hypot(q.x, q.y);
}

std::array<Vec2, 4> corners(Vec2 c, double heading, const BodyDims& d) {
  const double hl = 0.5 * d.length_m, hw = 0.5 * d.width_m;
  const double ct = std::cos(heading), st = std::sin(heading);
  const Vec2 u{ct * hl, st * hl}, v{-st * hw, ct * hw};
  return {Vec2{c.x + u.x + v.x, c.y + u.y + v.y}, Vec2{c.x - u.x + v.x, c.y - u.y + v.y},
          Vec2{c.x - u.x - v.x, c.y - u.y - v.y}, Vec2{c.x + u.x - v.x, c.y + u.y - v.y}};
}

double polygon_distance(const std::array<Vec2, 4>& p, const std::array<Vec2, 4>& q) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 a0 = p[i], a1 = p[(i + 1) % 4];
    const Vec2 b0 = q[i], b1 = q[(i + 1) % 4];
    for (std::size_t j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(q[j], a0, a1));
      best = std::min(best, point_segment_distance(p[j], b0, b1));
    }
  }
  return best;
}

}  // namespace

SeverityShape::SeverityShape(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw UsageError("severity shape needs at least 2 samples");
  for (double m : samples_) {
    if (!std::isfinite(m) || m < 0.0) throw UsageError("severity margins must be finite and >= 0");
  }
}

double SeverityShape::margin(double dtheta) const {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(dtheta + std::numbers::pi, two_pi);
  if (r < 0.0) r += two_pi;
  const double u = r / two_pi * static_cast<double>(samples_.size());
  const auto i = std::min(static_cast<std::size_t>(u), samples_.size() - 1);
  const double f = u - static_cast<double>(i);
  const double hi = samples_[(i + 1) % samples_.size()];
  return (1.0 - f) * samples_[i] + f * hi;
}

double signed_distance_rect(const RelativePose& pose, const BodyDims& a, const BodyDims& b) {
  const double ct = std::cos(pose.dtheta), st = std::sin(pose.dtheta);
  const Vec2 center{pose.dx, pose.dy};
  const std::array<Vec2, 4> axes{Vec2{1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{ct, st}, Vec2{-st, ct}};
  const Vec2 bu{ct, st}, bv{-st, ct};
  double min_overlap = std::numeric_limits<double>::infinity();
  bool separated = false;
  for (const Vec2& n : axes) {
    const double ra = 0.5 * a.length_m * std::abs(n.x) + 0.5 * a.width_m * std::abs(n.y);
    const double rb = 0.5 * b.length_m * std::abs(dot(n, bu)) + 0.5 * b.width_m * std::abs(dot(n, bv));
    const double overlap = ra + rb - std::abs(dot(n, center));
    if (overlap < 0.0) {
      separated = true;
      break;
    }
    min_overlap = std::min(min_overlap, overlap);
  }
  if (separated) {
    return polygon_distance(corners({0.0, 0.0}, 0.0, a), corners(center, pose.dtheta, b));
  }
  return min_overlap == 0.0 ? 0.0 : -min_overlap;
}

ScalarField build_ell_field(const GridSpec& grid, const BodyDims& a, const BodyDims& b,
                            const std::optional<SeverityShape>& shape) {
  if (grid.ndim() < 3 || !grid.axis(2).periodic ||
      std::abs(grid.axis(2).period() - 2.0 * std::numbers::pi) > 1e-9 || grid.axis(0).periodic ||
      grid.axis(1).periodic) {
    throw UsageError("ell grid must start with (dx, dy, dtheta) and dtheta periodic over 2*pi");
  }
  const Axis& ax = grid.axis(0);
  const Axis& ay = grid.axis(1);
  const Axis& at = grid.axis(2);
  const std::size_t plane = ax.count * ay.count * at.count;
  // l depends only on the first three coordinates; compute once per pose.
  std::vector<double> pose_values(plane);
  parallel_for(plane, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t it = k % at.count;
      const std::size_t iy = (k / at.count) % ay.count;
      const std::size_t ix = k / (at.count * ay.count);
      const RelativePose pose{ax.coordinate(ix), ay.coordinate(iy), at.coordinate(it)};
      double l = signed_distance_rect(pose, a, b);
      if (shape) l -= shape->margin(pose.dtheta);
      pose_values[k] = l;
    }
  });
  const std::size_t tail = grid.size() / plane;
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < plane; ++k) {
    std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(k * tail), tail, pose_values[k]);
  }
  return ScalarField(grid, std::move(values));
}

}  // namespace hjreach
