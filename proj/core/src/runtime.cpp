#include "hjreach/runtime.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "hjreach/error.hpp"
#include "hjreach/grid.hpp"

namespace hjreach {
namespace {

void check_time(const ValueFunction& vf, double t) {
  if (vf.times.empty()) throw UsageError("value function has no snapshots");
  const double lo = vf.times.front();
  const double slack = 1e-9 * std::max(1.0, std::abs(lo));
  if (!(t >= lo - slack && t <= slack)) {
    throw UsageError("time " + std::to_string(t) + " outside [" + std::to_string(lo) + ", 0]");
  }
}

// Bracketing snapshot pair and blend weight toward the later one.
struct TimeBracket {
  std::size_t k = 0;
  double w = 0.0;
};

TimeBracket bracket(const ValueFunction& vf, double t) {
  const std::size_t n = vf.times.size();
  if (n == 1 || t <= vf.times.front()) return {0, 0.0};
  if (t >= vf.times.back()) return {n - 1, 0.0};
  const auto it = std::upper_bound(vf.times.begin(), vf.times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - vf.times.begin()) - 1;
  const double w = (t - vf.times[k]) / (vf.times[k + 1] - vf.times[k]);
  return {k, w};
}

double value_blend(const ValueFunction& vf, const TimeBracket& b, std::span<const double> z,
                   bool* oob = nullptr) {
  const double v0 = interpolate(vf.fields[b.k], z, oob);
  if (b.w == 0.0) return v0;
  return (1.0 - b.w) * v0 + b.w * interpolate(vf.fields[b.k + 1], z);
}

double time_derivative(const ValueFunction& vf, std::span<const double> z, double t) {
  const std::size_t n = vf.times.size();
  if (n < 2) return 0.0;
  auto at = [&](std::size_t k) { return interpolate(vf.fields[k], z); };
  auto diff = [&](std::size_t i, std::size_t j) {
    return (at(j) - at(i)) / (vf.times[j] - vf.times[i]);
  };
  const double tol = 1e-12 * std::max(1.0, std::abs(vf.times.front()));
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(t - vf.times[k]) <= tol) {
      if (k == 0) return diff(0, 1);
      if (k + 1 == n) return diff(n - 2, n - 1);
      return diff(k - 1, k + 1);
    }
  }
  const TimeBracket b = bracket(vf, t);
  return diff(b.k, std::min(b.k + 1, n - 1));
}

std::vector<double> steering_partition(const Interval& steer, std::size_t samples) {
  if (steer.singleton() || samples < 2) return {steer.lo};
  std::vector<double> out(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    out[j] = steer.lo + (steer.hi - steer.lo) * static_cast<double>(j) / static_cast<double>(samples - 1);
  }
  out.back() = steer.hi;
  return out;
}

// dV/dt + p.f(z, (a, steer), ub)
double preservation_margin(const GameDynamics& dyn, std::span<const double> z,
                           std::span<const double> p, double dvdt, double a, double steer,
                           const AgentControl& ub) {
  std::array<double, kMaxDims> f{};
  dyn.flow(z, {a, steer}, ub, std::span<double>(f.data(), z.size()));
  double g = dvdt;
  for (std::size_t i = 0; i < z.size(); ++i) g += p[i] * f[i];
  return g;
}

}  // namespace

SafetyQueryResult value_at(const ValueFunction& vf, std::span<const double> z, double t) {
  check_time(vf, t);
  if (z.size() != vf.grid.ndim()) {
    throw UsageError("state has dimension " + std::to_string(z.size()) + ", value function has " +
                     std::to_string(vf.grid.ndim()));
  }
  const TimeBracket b = bracket(vf, t);
  SafetyQueryResult r;
  r.value = value_blend(vf, b, z, &r.out_of_bounds);
  r.unsafe = r.value < 0.0;
  r.gradient.resize(z.size());
  std::vector<double> probe(z.begin(), z.end());
  for (std::size_t d = 0; d < z.size(); ++d) {
    const double h = vf.grid.spacing(d);
    probe[d] = z[d] + 0.5 * h;
    const double hi = value_blend(vf, b, probe);
    probe[d] = z[d] - 0.5 * h;
    const double lo = value_blend(vf, b, probe);
    probe[d] = z[d];
    r.gradient[d] = (hi - lo) / h;
  }
  r.dvdt = time_derivative(vf, z, t);
  return r;
}

ControlPair optimal_pair(const ValueFunction& vf, const GameDynamics& dyn,
                         std::span<const double> z, double t) {
  const SafetyQueryResult q = value_at(vf, z, t);
  return dyn.optimal_controls(z, q.gradient);
}

AgentControl worst_case_b(const ValueFunction& vf, const GameDynamics& dyn,
                          std::span<const double> z, double t) {
  return optimal_pair(vf, dyn, z, t).b;
}

bool PreservingSet::empty() const noexcept {
  return std::all_of(slabs.begin(), slabs.end(), [](const PreservingSlab& s) { return s.empty; });
}

PreservingSet safety_preserving_set(const ValueFunction& vf, const GameDynamics& dyn,
                                    std::span<const double> z, double t, const AgentControl& ub,
                                    std::size_t steering_samples) {
  const SafetyQueryResult q = value_at(vf, z, t);
  const ControlBox ba = dyn.box_a(z);
  const ControlBox bb = dyn.box_b(z);
  const double eps = 1e-9;
  if (ub.accel < bb.accel.lo - eps || ub.accel > bb.accel.hi + eps || ub.steer < bb.steer.lo - eps ||
      ub.steer > bb.steer.hi + eps) {
    throw UsageError("uB lies outside B's admissible controls");
  }
  // The margin is affine in acceleration except for a possible kink at 0
  // where velocity saturation switches on; split there.
  std::vector<double> knots{ba.accel.lo};
  if (ba.accel.lo < 0.0 && 0.0 < ba.accel.hi) knots.push_back(0.0);
  knots.push_back(ba.accel.hi);

  PreservingSet out;
  for (double steer : steering_partition(ba.steer, steering_samples)) {
    PreservingSlab slab{steer, {}, true};
    std::vector<double> g(knots.size());
    for (std::size_t i = 0; i < knots.size(); ++i) {
      g[i] = preservation_margin(dyn, z, q.gradient, q.dvdt, knots[i], steer, ub);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto include = [&](double a0, double a1) {
      lo = std::min(lo, a0);
      hi = std::max(hi, a1);
    };
    if (knots.front() == knots.back()) {
      if (g.front() >= 0.0) include(knots.front(), knots.front());
    }
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      const double x0 = knots[i], x1 = knots[i + 1], g0 = g[i], g1 = g[i + 1];
      if (x0 == x1) continue;
      if (g0 >= 0.0 && g1 >= 0.0) {
        include(x0, x1);
      } else if (g0 >= 0.0 || g1 >= 0.0) {
        const double xc = std::clamp(x0 + (x1 - x0) * g0 / (g0 - g1), x0, x1);
        if (g0 >= 0.0) include(x0, xc);
        else include(xc, x1);
      }
    }
    if (lo <= hi) {
      slab.accel = {lo, hi};
      slab.empty = false;
    }
    out.slabs.push_back(slab);
  }
  return out;
}

FilterResult safety_filter(const ValueFunction& vf, const GameDynamics& dyn,
                           std::span<const double> z, double t, const AgentControl& u_desired,
                           const AgentControl& ub_assumed, std::size_t steering_samples) {
  if (!std::isfinite(u_desired.accel) || !std::isfinite(u_desired.steer)) {
    throw UsageError("desired control must be finite");
  }
  const ControlBox ba = dyn.box_a(z);
  const SafetyQueryResult q = value_at(vf, z, t);
  if (ba.contains(u_desired) &&
      preservation_margin(dyn, z, q.gradient, q.dvdt, u_desired.accel, u_desired.steer,
                          ub_assumed) >= 0.0) {
    return {u_desired, false, false};
  }
  const PreservingSet set = safety_preserving_set(vf, dyn, z, t, ub_assumed, steering_samples);
  double best = std::numeric_limits<double>::infinity();
  AgentControl choice{};
  for (const PreservingSlab& s : set.slabs) {
    if (s.empty) continue;
    const double a = s.accel.clamp(u_desired.accel);
    const double d = (a - u_desired.accel) * (a - u_desired.accel) +
                     (s.steer - u_desired.steer) * (s.steer - u_desired.steer);
    if (d < best) {
      best = d;
      choice = {a, s.steer};
    }
  }
  if (std::isfinite(best)) return {choice, true, false};
  return {dyn.optimal_controls(z, q.gradient).a, true, true};
}

SimulationResult simulate(std::span<const double> z0, const Policy& policy_a,
                          const Policy& policy_b, const GameDynamics& dyn, const ValueFunction& vf,
                          const SimulationOptions& options) {
  if (!(options.dt > 0.0)) throw UsageError("simulation dt must be > 0");
  const std::size_t n = dyn.state_dim();
  if (z0.size() != n) throw UsageError("simulation state dimension mismatch");
  const GridSpec& grid = vf.grid;
  auto query_time = [&](double elapsed) {
    return options.advance_time ? std::min(0.0, options.t_start + elapsed) : options.t_start;
  };
  auto inside = [&](std::span<const double> x) {
    for (std::size_t d = 0; d < n; ++d) {
      const Axis& a = grid.axis(d);
      if (!a.periodic && (x[d] < a.lower - 1e-9 || x[d] > a.upper + 1e-9)) return false;
    }
    return true;
  };
  auto wrap = [&](std::vector<double>& x) {
    for (std::size_t d = 0; d < n; ++d) x[d] = grid.wrap(d, x[d]);
  };

  SimulationResult r;
  std::vector<double> x(z0.begin(), z0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  double elapsed = 0.0;
  r.times.push_back(0.0);
  r.states.push_back(x);
  r.values.push_back(value_at(vf, x, query_time(0.0)).value);
  while (elapsed < options.duration - 1e-12) {
    const double h = std::min(options.dt, options.duration - elapsed);
    const AgentControl ua = policy_a(elapsed, x);
    const AgentControl ub = policy_b(elapsed, x);
    dyn.flow(x, ua, ub, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    dyn.flow(tmp, ua, ub, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    dyn.flow(tmp, ua, ub, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    dyn.flow(tmp, ua, ub, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    wrap(x);
    elapsed += h;
    if (!inside(x)) {
      r.truncated = true;
      break;
    }
    r.times.push_back(elapsed);
    r.states.push_back(x);
    r.values.push_back(value_at(vf, x, query_time(elapsed)).value);
  }
  return r;
}

}  // namespace hjreach
