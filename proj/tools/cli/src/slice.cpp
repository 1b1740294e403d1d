#include "hjreach_cli/slice.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

#include "hjreach/error.hpp"
#include "hjreach/grid.hpp"
#include "hjreach_cli/toml.hpp"

namespace hjreach::cli {
namespace {

// Edge of the node lattice: horizontal edges join (i,j)-(i+1,j), vertical
// ones (i,j)-(i,j+1).
struct EdgeKey {
  std::size_t i, j;
  bool vertical;
  auto operator<=>(const EdgeKey&) const = default;
};

struct Segment {
  EdgeKey a, b;
  std::array<double, 2> pa, pb;
};

}  // namespace

SlicePlane make_plane(const GridSpec& grid, const std::vector<std::string>& dim_names,
                      const std::vector<std::pair<std::string, double>>& fixes) {
  if (dim_names.size() != grid.ndim()) throw UsageError("dimension names do not match the grid");
  SlicePlane p;
  p.state.assign(grid.ndim(), 0.0);
  std::vector<bool> fixed(grid.ndim(), false);
  for (const auto& [name, value] : fixes) {
    const auto it = std::find(dim_names.begin(), dim_names.end(), name);
    if (it == dim_names.end()) throw UsageError("unknown dimension '" + name + "'");
    const auto d = static_cast<std::size_t>(it - dim_names.begin());
    if (fixed[d]) throw UsageError("dimension '" + name + "' fixed twice");
    fixed[d] = true;
    p.state[d] = value;
  }
  std::vector<std::size_t> free;
  for (std::size_t d = 0; d < grid.ndim(); ++d) {
    if (!fixed[d]) free.push_back(d);
  }
  if (free.size() != 2) {
    throw UsageError("a slice needs exactly two free dimensions, got " + std::to_string(free.size()));
  }
  p.dim_x = free[0];
  p.dim_y = free[1];
  return p;
}

Field2D slice(const ValueFunction& vf, double t, const SlicePlane& plane) {
  if (vf.times.empty()) throw UsageError("value function has no snapshots");
  const double lo = vf.times.front();
  const double slack = 1e-9 * std::max(1.0, std::abs(lo));
  if (!(t >= lo - slack && t <= slack)) throw UsageError("time outside the stored range");
  std::size_t k = 0;
  double w = 0.0;
  if (t >= vf.times.back()) {
    k = vf.times.size() - 1;
  } else if (t > lo) {
    k = static_cast<std::size_t>(std::upper_bound(vf.times.begin(), vf.times.end(), t) -
                                 vf.times.begin()) - 1;
    w = (t - vf.times[k]) / (vf.times[k + 1] - vf.times[k]);
  }
  Field2D f{vf.grid.axis(plane.dim_x), vf.grid.axis(plane.dim_y), {}};
  f.values.resize(f.x.count * f.y.count);
  std::vector<double> z = plane.state;
  for (std::size_t i = 0; i < f.x.count; ++i) {
    z[plane.dim_x] = f.x.coordinate(i);
    for (std::size_t j = 0; j < f.y.count; ++j) {
      z[plane.dim_y] = f.y.coordinate(j);
      double v = interpolate(vf.fields[k], z);
      if (w > 0.0) v = (1.0 - w) * v + w * interpolate(vf.fields[k + 1], z);
      f.values[i * f.y.count + j] = v;
    }
  }
  return f;
}

void write_slice_csv(std::ostream& out, const Field2D& f, const std::string& x_name,
                     const std::string& y_name) {
  out << x_name << "," << y_name << ",V\n";
  for (std::size_t i = 0; i < f.x.count; ++i) {
    for (std::size_t j = 0; j < f.y.count; ++j) {
      out << toml::format_number(f.x.coordinate(i)) << "," << toml::format_number(f.y.coordinate(j))
          << "," << toml::format_number(f.at(i, j)) << "\n";
    }
  }
}

std::vector<Polyline> marching_squares(const Field2D& f, double level) {
  const std::size_t nx = f.x.count, ny = f.y.count;
  auto point = [&](const EdgeKey& e) -> std::array<double, 2> {
    const std::size_t i1 = e.vertical ? e.i : e.i + 1;
    const std::size_t j1 = e.vertical ? e.j + 1 : e.j;
    const double va = f.at(e.i, e.j), vb = f.at(i1, j1);
    const double s = (level - va) / (vb - va);
    const double xa = f.x.coordinate(e.i), ya = f.y.coordinate(e.j);
    const double xb = f.x.coordinate(i1), yb = f.y.coordinate(j1);
    return {xa + s * (xb - xa), ya + s * (yb - ya)};
  };

  std::vector<Segment> segs;
  auto add = [&](EdgeKey a, EdgeKey b) { segs.push_back({a, b, point(a), point(b)}); };
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const double c[4] = {f.at(i, j), f.at(i + 1, j), f.at(i + 1, j + 1), f.at(i, j + 1)};
      bool up[4];
      for (int q = 0; q < 4; ++q) up[q] = c[q] >= level;
      const EdgeKey bottom{i, j, false}, right{i + 1, j, true}, top{i, j + 1, false},
          left{i, j, true};
      std::vector<EdgeKey> cut;
      if (up[0] != up[1]) cut.push_back(bottom);
      if (up[1] != up[2]) cut.push_back(right);
      if (up[2] != up[3]) cut.push_back(top);
      if (up[3] != up[0]) cut.push_back(left);
      if (cut.size() == 2) {
        add(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        const bool centre_up = 0.25 * (c[0] + c[1] + c[2] + c[3]) >= level;
        if (centre_up == up[0]) {
          add(bottom, right);  // isolates corner 1
          add(top, left);      // isolates corner 3
        } else {
          add(left, bottom);
          add(right, top);
        }
      }
    }
  }

  std::map<EdgeKey, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    incident[segs[s].a].push_back(s);
    incident[segs[s].b].push_back(s);
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<Polyline> out;
  auto trace = [&](EdgeKey start, bool closed) {
    Polyline pl;
    EdgeKey at = start;
    pl.points.push_back(segs[incident[at].front()].a == at ? segs[incident[at].front()].pa
                                                            : segs[incident[at].front()].pb);
    for (;;) {
      std::size_t next = segs.size();
      for (std::size_t s : incident[at]) {
        if (!used[s]) {
          next = s;
          break;
        }
      }
      if (next == segs.size()) break;
      used[next] = true;
      const Segment& sg = segs[next];
      const bool forward = sg.a == at;
      at = forward ? sg.b : sg.a;
      pl.points.push_back(forward ? sg.pb : sg.pa);
    }
    pl.closed = closed;
    out.push_back(std::move(pl));
  };
  // Open chains start at edges touched by a single segment.
  for (const auto& [key, list] : incident) {
    if (list.size() == 1 && !used[list.front()]) trace(key, false);
  }
  for (const auto& [key, list] : incident) {
    for (std::size_t s : list) {
      if (!used[s]) trace(key, true);
    }
  }
  return out;
}

void write_contour_csv(std::ostream& out, const std::vector<Polyline>& lines,
                       const std::string& x_name, const std::string& y_name) {
  out << "polyline," << x_name << "," << y_name << "\n";
  for (std::size_t k = 0; k < lines.size(); ++k) {
    for (const auto& p : lines[k].points) {
      out << k << "," << toml::format_number(p[0]) << "," << toml::format_number(p[1]) << "\n";
    }
  }
}

}  // namespace hjreach::cli
