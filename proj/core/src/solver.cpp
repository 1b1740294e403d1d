#include "hjreach/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjreach/error.hpp"
#include "hjreach/parallel.hpp"

namespace hjreach {

void SolveConfig::validate() const {
  if (!(horizon_s > 0.0) || !std::isfinite(horizon_s)) throw ConfigError("horizon_s", "must be > 0");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl", "must lie in (0, 1]");
  if (convergence_tol && !(*convergence_tol > 0.0)) {
    throw ConfigError("convergence_tol", "must be > 0 when present");
  }
  if (snapshot_stride == 0) throw ConfigError("snapshot_stride", "must be >= 1");
}

double default_convergence_tol(const ScalarField& ell) {
  const double range = ell.max() - ell.min();
  return 1e-3 * (range > 0.0 ? range : 1.0);
}

namespace {

// Walks flat indices [begin, end) keeping the multi-index and node
// coordinates in sync.
class NodeCursor {
 public:
  NodeCursor(const GridSpec& grid, const std::vector<std::vector<double>>& coords, std::size_t flat)
      : grid_(grid), coords_(coords), idx_(grid.unflatten(flat)) {
    for (std::size_t d = 0; d < grid.ndim(); ++d) x_[d] = coords[d][idx_[d]];
  }

  const MultiIndex& index() const noexcept { return idx_; }
  std::span<const double> state() const noexcept { return {x_.data(), grid_.ndim()}; }

  void advance() noexcept {
    for (std::size_t d = grid_.ndim(); d-- > 0;) {
      if (++idx_[d] < grid_.axis(d).count) {
        x_[d] = coords_[d][idx_[d]];
        return;
      }
      idx_[d] = 0;
      x_[d] = coords_[d][0];
    }
  }

 private:
  const GridSpec& grid_;
  const std::vector<std::vector<double>>& coords_;
  MultiIndex idx_;
  std::array<double, kMaxDims> x_{};
};

std::vector<std::vector<double>> node_coordinates(const GridSpec& grid) {
  std::vector<std::vector<double>> coords(grid.ndim());
  for (std::size_t d = 0; d < grid.ndim(); ++d) {
    const Axis& a = grid.axis(d);
    for (std::size_t i = 0; i < a.count; ++i) coords[d].push_back(a.coordinate(i));
  }
  return coords;
}

void check_dims(const GridSpec& grid, const GameDynamics& dyn) {
  if (grid.ndim() != dyn.state_dim()) {
    throw UsageError("grid has " + std::to_string(grid.ndim()) + " dims, dynamics expects " +
                     std::to_string(dyn.state_dim()));
  }
}

// Bound evaluator for one grid: owns the dynamics kernel and the node
// coordinate tables, and applies freezing stages.
class Stepper {
 public:
  Stepper(const GridSpec& grid, const GameDynamics& dyn)
      : grid_(grid), kernel_(dyn.bind(grid)), coords_(node_coordinates(grid)) {
    for (std::size_t d = 0; d < grid.ndim(); ++d) inv_h_[d] = 1.0 / grid.spacing(d);
  }

  // max_z sum_i sigma_i(z) / h_i
  double max_rate() const {
    const std::size_t n = grid_.size();
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(n, 64));
    std::vector<double> partial(chunks, 0.0);
    const std::size_t per = (n + chunks - 1) / chunks;
    parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
      for (std::size_t c = cb; c < ce; ++c) {
        const std::size_t begin = c * per, end = std::min(n, begin + per);
        if (begin >= end) continue;
        NodeCursor cur(grid_, coords_, begin);
        double local = 0.0;
        std::array<double, kMaxDims> sigma{};
        for (std::size_t k = begin; k < end; ++k, cur.advance()) {
          kernel_->speed_bounds(cur.index(), cur.state(), sigma.data());
          double r = 0.0;
          for (std::size_t d = 0; d < grid_.ndim(); ++d) r += sigma[d] * inv_h_[d];
          local = std::max(local, r);
        }
        partial[c] = local;
      }
    });
    return *std::max_element(partial.begin(), partial.end());
  }

  // out = v + dt * min{0, H_LF(v)}, then the optional obstacle mask. Works
  // one line of the last dimension at a time.
  void stage(const std::vector<double>& v, double dt, std::vector<double>& out,
             const std::vector<double>* neg_avoid) const {
    const std::size_t ndim = grid_.ndim(), last = ndim - 1;
    const std::size_t count = grid_.axis(last).count;
    const std::size_t lines = v.size() / count;
    const double* pv = v.data();
    parallel_for(lines, [&](std::size_t begin, std::size_t end) {
      std::vector<double> pm(count * ndim), pp(count * ndim), h(count);
      std::array<std::ptrdiff_t, kMaxDims> lm0{}, lm1{}, rp0{}, rp1{};
      std::array<double, kMaxDims> x{};
      for (std::size_t line = begin; line < end; ++line) {
        const std::size_t base = line * count;
        MultiIndex idx = grid_.unflatten(base);
        for (std::size_t d = 0; d < ndim; ++d) x[d] = coords_[d][idx[d]];
        // Leading dims: the stencil offsets are fixed along the line.
        for (std::size_t d = 0; d < last; ++d) {
          stencil(d, idx[d], lm0[d], lm1[d], rp0[d], rp1[d]);
        }
        for (std::size_t j = 0; j < count; ++j) {
          const std::size_t k = base + j;
          double* m = &pm[j * ndim];
          double* p = &pp[j * ndim];
          for (std::size_t d = 0; d < last; ++d) {
            m[d] = (pv[k + lm0[d]] - pv[k + lm1[d]]) * inv_h_[d];
            p[d] = (pv[k + rp0[d]] - pv[k + rp1[d]]) * inv_h_[d];
          }
          const Axis& a = grid_.axis(last);
          one_sided_at(pv, k, j, count, 1, a.periodic, inv_h_[last], m[last], p[last]);
        }
        kernel_->lax_friedrichs_line(idx, {x.data(), ndim}, coords_[last].data(), count, pm.data(),
                                     pp.data(), h.data());
        for (std::size_t j = 0; j < count; ++j) {
          const std::size_t k = base + j;
          double nv = pv[k] + dt * (h[j] >= 0.0 ? 0.0 : h[j]);  // NaN propagates
          if (neg_avoid) nv = std::max(nv, (*neg_avoid)[k]);
          out[k] = nv;
        }
      }
    });
  }

 private:
  // Offsets such that left = v[k+lm0] - v[k+lm1], right = v[k+rp0] - v[k+rp1],
  // matching one_sided_at() for node index i along dimension d.
  void stencil(std::size_t d, std::size_t i, std::ptrdiff_t& lm0, std::ptrdiff_t& lm1,
               std::ptrdiff_t& rp0, std::ptrdiff_t& rp1) const {
    const Axis& a = grid_.axis(d);
    const auto s = static_cast<std::ptrdiff_t>(grid_.stride(d));
    const auto wrap = static_cast<std::ptrdiff_t>(a.count - 1) * s;
    const std::ptrdiff_t down = i == 0 ? (a.periodic ? wrap : 0) : -s;
    const std::ptrdiff_t up = i + 1 == a.count ? (a.periodic ? -wrap : 0) : s;
    lm0 = 0;
    lm1 = down;
    rp0 = up;
    rp1 = 0;
    if (!a.periodic && i == 0) {
      lm0 = s;
      lm1 = 0;
    } else if (!a.periodic && i + 1 == a.count) {
      rp0 = 0;
      rp1 = -s;
    }
  }

  const GridSpec& grid_;
  std::unique_ptr<GameDynamics::NodeKernel> kernel_;
  std::vector<std::vector<double>> coords_;
  std::array<double, kMaxDims> inv_h_{};
};

bool all_finite(const std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(n, 64));
  std::vector<std::uint8_t> ok(chunks, 1);
  const std::size_t per = (n + chunks - 1) / chunks;
  parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      for (std::size_t k = c * per; k < std::min(n, (c + 1) * per); ++k) {
        if (!std::isfinite(v[k])) {
          ok[c] = 0;
          break;
        }
      }
    }
  });
  return std::all_of(ok.begin(), ok.end(), [](std::uint8_t b) { return b != 0; });
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

ValueFunction integrate(const ScalarField& ell, const ScalarField* avoid, const GameDynamics& dyn,
                        const SolveConfig& cfg, SolveInfo* info) {
  cfg.validate();
  const GridSpec& grid = ell.grid();
  check_dims(grid, dyn);
  std::vector<double> neg_avoid;
  if (avoid) {
    if (!(avoid->grid() == grid)) throw UsageError("reach and avoid fields must share a grid");
    neg_avoid.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) neg_avoid[k] = -(*avoid)[k];
  }
  const std::vector<double>* mask = avoid ? &neg_avoid : nullptr;

  Stepper stepper(grid, dyn);
  const double rate = stepper.max_rate();
  const double dt_max = rate > 0.0 ? cfg.cfl / rate : cfg.horizon_s;
  // Uniform steps no longer than dt_max that land exactly on the horizon; a
  // horizon shorter than one stable step yields only the boundary condition.
  const double ratio = cfg.horizon_s / dt_max * (1.0 - 1e-12);
  const auto steps = ratio < 1.0 ? std::size_t{0} : static_cast<std::size_t>(std::ceil(ratio));
  const double dt = steps > 0 ? cfg.horizon_s / static_cast<double>(steps) : dt_max;

  // Snapshots in order of increasing |t|; reversed at the end.
  std::vector<double> v(ell.values().begin(), ell.values().end());
  if (mask) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::max(v[k], neg_avoid[k]);
  }
  // Tube mode stores ell itself as V(., 0); reach-avoid stores the masked
  // target, which equals ell wherever the obstacle is inactive.
  std::vector<double> s_times{0.0};
  std::vector<ScalarField> snaps;
  if (mask) {
    snaps.emplace_back(grid, v);
  } else {
    snaps.push_back(ell);
  }
  std::vector<double> v1(v.size()), v2(v.size());
  bool converged = false;
  std::size_t done = 0;
  for (std::size_t step = 1; step <= steps; ++step) {
    stepper.stage(v, dt, v1, mask);
    if (cfg.integrator == Integrator::TvdRk2) {
      stepper.stage(v1, dt, v2, mask);
      parallel_for(v.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) v1[k] = 0.5 * (v[k] + v2[k]);
      });
    }
    if (!all_finite(v1)) throw NumericalError(step, "non-finite value function");
    const double change = cfg.convergence_tol ? max_abs_diff(v, v1) / dt : 0.0;
    v.swap(v1);
    done = step;
    if (cfg.convergence_tol && change < *cfg.convergence_tol) converged = true;
    if (step % cfg.snapshot_stride == 0 || step == steps || converged) {
      s_times.push_back(static_cast<double>(step) * dt);
      snaps.emplace_back(grid, v);
    }
    if (converged) break;
  }

  ValueFunction vf;
  vf.grid = grid;
  vf.converged = converged;
  for (std::size_t k = snaps.size(); k-- > 0;) {
    vf.times.push_back(k == 0 ? 0.0 : -s_times[k]);
    vf.fields.push_back(std::move(snaps[k]));
  }
  if (info) *info = SolveInfo{done, dt, static_cast<double>(done) * dt, converged};
  return vf;
}

}  // namespace

double max_stable_dt(const GridSpec& grid, const GameDynamics& dyn, double cfl) {
  check_dims(grid, dyn);
  const double rate = Stepper(grid, dyn).max_rate();
  return rate > 0.0 ? cfl / rate : std::numeric_limits<double>::infinity();
}

ScalarField lf_step(const ScalarField& v, const GameDynamics& dyn, double dt) {
  const GridSpec& grid = v.grid();
  check_dims(grid, dyn);
  Stepper stepper(grid, dyn);
  if (dt * stepper.max_rate() > 1.0 + 1e-12) {
    throw InternalError("time step violates the CFL bound");
  }
  std::vector<double> in(v.values().begin(), v.values().end()), out(in.size());
  stepper.stage(in, dt, out, nullptr);
  if (!all_finite(out)) throw NumericalError(1, "non-finite value function");
  return ScalarField(grid, std::move(out));
}

ValueFunction solve_tube(const ScalarField& ell, const GameDynamics& dyn, const SolveConfig& cfg,
                         SolveInfo* info) {
  SolveConfig c = cfg;
  c.mode = SolveMode::Tube;
  return integrate(ell, nullptr, dyn, c, info);
}

ValueFunction solve_reach_avoid(const ScalarField& ell_reach, const ScalarField& g_avoid,
                                const GameDynamics& dyn, const SolveConfig& cfg, SolveInfo* info) {
  SolveConfig c = cfg;
  c.mode = SolveMode::ReachAvoid;
  return integrate(ell_reach, &g_avoid, dyn, c, info);
}

std::size_t nearest_snapshot(const ValueFunction& vf, double t) {
  if (vf.times.empty()) throw UsageError("value function has no snapshots");
  const double lo = vf.times.front(), hi = vf.times.back();
  const double slack = 1e-9 * std::max(1.0, std::abs(lo));
  if (!(t >= lo - slack && t <= hi + slack)) {
    throw UsageError("time " + std::to_string(t) + " outside stored range [" + std::to_string(lo) +
                     ", " + std::to_string(hi) + "]");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < vf.times.size(); ++k) {
    if (std::abs(vf.times[k] - t) < std::abs(vf.times[best] - t)) best = k;
  }
  return best;
}

std::vector<std::uint8_t> unsafe_set(const ValueFunction& vf, double t) {
  const ScalarField& f = vf.fields[nearest_snapshot(vf, t)];
  std::vector<std::uint8_t> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k] < 0.0 ? 1 : 0;
  return out;
}

}  // namespace hjreach
