#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hjreach/error.hpp"
#include "hjreach/parallel.hpp"
#include "hjreach/solver.hpp"

using namespace hjreach;

namespace {

ScalarField identity_field(const GridSpec& g, std::size_t d = 0) {
  return sample_field(g, [d](std::span<const double> x) { return x[d]; });
}

// (gap, v): gap' = -v, |a| <= decel, A alone.
GapDynamics braking(double decel, double v_max, Role role = Role::Max) {
  return GapDynamics(-1.0, 0.0, {{-decel, decel}, {0.0, v_max}}, {}, {role, Role::Min, Agent::B}, 0.0);
}

class NanDynamics final : public GameDynamics {
 public:
  NanDynamics() : GameDynamics({}) {}
  std::size_t state_dim() const override { return 1; }
  ControlBox box_a(std::span<const double>) const override { return {}; }
  ControlBox box_b(std::span<const double>) const override { return {}; }
  void flow(std::span<const double>, const AgentControl&, const AgentControl&,
            std::span<double> out) const override {
    out[0] = -1.0;
  }
  ControlPair optimal_controls(std::span<const double>, std::span<const double>) const override {
    return {};
  }
  double hamiltonian(std::span<const double>, std::span<const double>) const override {
    return -std::numeric_limits<double>::quiet_NaN();
  }
  void speed_bounds(std::span<const double>, std::span<double> s) const override { s[0] = 1.0; }
};

}  // namespace

TEST(SolveConfig, Validation) {
  SolveConfig c;
  c.horizon_s = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SolveConfig{};
  c.cfl = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SolveConfig{};
  c.convergence_tol = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SolveConfig{};
  c.snapshot_stride = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(LfStep, StaticDynamicsLeaveValueUnchanged) {
  const GridSpec g({{-1, 1, 21, false}, {0, 1, 5, false}});
  const ScalarField v = sample_field(g, [](std::span<const double> x) { return x[0] * x[0] - x[1]; });
  const ConstantFlowDynamics still({0.0, 0.0});
  const ScalarField out = lf_step(v, still, 10.0);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(out[k], v[k]);
}

TEST(LfStep, AdvectionShiftsLinearField) {
  const GridSpec g({{-5, 5, 101, false}});
  const ConstantFlowDynamics left({-1.0});
  const ScalarField out = lf_step(identity_field(g), left, 0.05);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(out[k], g.axis(0).coordinate(k) - 0.05, 1e-12);
}

TEST(LfStep, FreezesWherePositive) {
  const GridSpec g({{-5, 5, 101, false}});
  const ConstantFlowDynamics right({1.0});
  const ScalarField v = identity_field(g);
  const ScalarField out = lf_step(v, right, 0.05);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(out[k], v[k]);
}

TEST(LfStep, RejectsCflViolation) {
  const GridSpec g({{-5, 5, 101, false}});
  EXPECT_THROW(lf_step(identity_field(g), ConstantFlowDynamics({-1.0}), 0.2), InternalError);
}

TEST(MaxStableDt, ConstantFlow) {
  const GridSpec g({{0, 1, 11, false}, {0, 2, 11, false}});
  EXPECT_NEAR(max_stable_dt(g, ConstantFlowDynamics({1.0, -2.0}), 0.5), 0.5 / (10.0 + 10.0), 1e-15);
}

TEST(SolveTube, AdvectionMatchesCharacteristics) {
  const GridSpec g({{-5, 5, 201, false}});
  SolveConfig cfg;
  cfg.horizon_s = 2.0;
  const ValueFunction vf = solve_tube(identity_field(g), ConstantFlowDynamics({-1.0}), cfg);
  EXPECT_EQ(vf.times.back(), 0.0);
  EXPECT_NEAR(vf.times.front(), -2.0, 1e-12);
  for (std::size_t s = 0; s < vf.times.size(); ++s) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      EXPECT_NEAR(vf.fields[s][k], g.axis(0).coordinate(k) + vf.times[s], 1e-9);
    }
  }
}

TEST(SolveTube, ShortHorizonReturnsOnlyBoundary) {
  const GridSpec g({{-5, 5, 101, false}});
  SolveConfig cfg;
  cfg.horizon_s = 1e-4;
  SolveInfo info;
  const ValueFunction vf = solve_tube(identity_field(g), ConstantFlowDynamics({-1.0}), cfg, &info);
  EXPECT_EQ(vf.snapshot_count(), 1u);
  EXPECT_EQ(info.steps, 0u);
}

TEST(SolveTube, BoundaryBitwiseAndTimeNesting) {
  const GridSpec g({{-5, 15, 81, false}, {0, 10, 41, false}});
  const ScalarField ell = identity_field(g);
  SolveConfig cfg;
  cfg.horizon_s = 2.0;
  const ValueFunction vf = solve_tube(ell, braking(5.0, 10.0), cfg);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(vf.at_zero()[k], ell[k]);
  for (std::size_t s = 0; s + 1 < vf.times.size(); ++s) {
    EXPECT_LT(vf.times[s], vf.times[s + 1]);
    for (std::size_t k = 0; k < g.size(); ++k) ASSERT_LE(vf.fields[s][k], vf.fields[s + 1][k]);
  }
  const auto early = unsafe_set(vf, 0.0), late = unsafe_set(vf, -2.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(early[k], ell[k] < 0.0 ? 1 : 0);
    EXPECT_LE(early[k], late[k]);
  }
}

TEST(SolveTube, SnapshotStride) {
  const GridSpec g({{-5, 5, 101, false}});
  SolveConfig cfg;
  cfg.horizon_s = 1.0;
  cfg.snapshot_stride = 4;
  SolveInfo info;
  const ValueFunction vf = solve_tube(identity_field(g), ConstantFlowDynamics({-1.0}), cfg, &info);
  EXPECT_EQ(info.steps, 20u);
  EXPECT_EQ(vf.snapshot_count(), 6u);
  EXPECT_NEAR(vf.times.front(), -1.0, 1e-12);
  EXPECT_NEAR(vf.times[1], -0.8, 1e-12);
}

TEST(SolveTube, BrakingConvergesToStoppingDistance) {
  const GridSpec g({{-5, 15, 201, false}, {0, 10, 101, false}});
  SolveConfig cfg;
  cfg.horizon_s = 10.0;
  cfg.convergence_tol = 1e-3;
  SolveInfo info;
  const ValueFunction vf = solve_tube(identity_field(g), braking(5.0, 10.0), cfg, &info);
  EXPECT_TRUE(info.converged);
  EXPECT_TRUE(vf.converged);
  EXPECT_LT(info.final_time, 10.0);
  // V approaches d - v^2 / (2 a).
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto x = g.node_state(k);
    worst = std::max(worst, std::abs(vf.final_snapshot()[k] - (x[0] - x[1] * x[1] / 10.0)));
  }
  EXPECT_LT(worst, 0.2);
}

TEST(SolveTube, RefinementReducesZeroSetError) {
  std::vector<double> errors;
  for (std::size_t n : {26, 51, 101}) {
    const GridSpec g({{-5, 15, 4 * (n - 1) / 2 + 1, false}, {0, 10, n, false}});
    SolveConfig cfg;
    cfg.horizon_s = 10.0;
    cfg.convergence_tol = 1e-4;
    const ValueFunction vf = solve_tube(identity_field(g), braking(5.0, 10.0), cfg);
    // Zero crossing along d for each v row versus v^2 / (2 a).
    const Axis& ad = g.axis(0);
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = g.axis(1).coordinate(j);
      for (std::size_t i = 0; i + 1 < ad.count; ++i) {
        const double a = vf.final_snapshot()[i * n + j], b = vf.final_snapshot()[(i + 1) * n + j];
        if (a < 0.0 && b >= 0.0) {
          const double d0 = ad.coordinate(i) + ad.spacing() * a / (a - b);
          err = std::max(err, std::abs(d0 - v * v / 10.0));
          break;
        }
      }
    }
    errors.push_back(err);
  }
  EXPECT_GT(errors[0], errors[1]);
  EXPECT_GT(errors[1], errors[2]);
}

TEST(SolveTube, DeterministicAcrossThreadCounts) {
  const GridSpec g({{-5, 15, 101, false}, {0, 10, 81, false}});
  SolveConfig cfg;
  cfg.horizon_s = 1.0;
  set_thread_count(1);
  const ValueFunction a = solve_tube(identity_field(g), braking(5.0, 10.0), cfg);
  set_thread_count(3);
  const ValueFunction b = solve_tube(identity_field(g), braking(5.0, 10.0), cfg);
  set_thread_count(0);
  ASSERT_EQ(a.times, b.times);
  for (std::size_t s = 0; s < a.times.size(); ++s) {
    for (std::size_t k = 0; k < g.size(); ++k) ASSERT_EQ(a.fields[s][k], b.fields[s][k]);
  }
}

TEST(SolveTube, NonFiniteValuesReportStep) {
  const GridSpec g({{-5, 5, 11, false}});
  SolveConfig cfg;
  cfg.horizon_s = 1.0;
  try {
    solve_tube(identity_field(g), NanDynamics(), cfg);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.step(), 1u);
  }
}

TEST(SolveTube, DimensionMismatch) {
  const GridSpec g({{-5, 5, 11, false}});
  EXPECT_THROW(solve_tube(identity_field(g), ConstantFlowDynamics({1.0, 1.0}), SolveConfig{}), UsageError);
}

TEST(ReachAvoid, InertMaskMatchesTube) {
  const GridSpec g({{-5, 15, 61, false}, {0, 10, 31, false}});
  SolveConfig cfg;
  cfg.horizon_s = 1.0;
  const ScalarField ell = identity_field(g);
  const ValueFunction tube = solve_tube(ell, braking(5.0, 10.0), cfg);
  const ValueFunction ra = solve_reach_avoid(ell, ScalarField::constant(g, 1e9), braking(5.0, 10.0), cfg);
  ASSERT_EQ(tube.times, ra.times);
  for (std::size_t s = 0; s < tube.times.size(); ++s) {
    for (std::size_t k = 0; k < g.size(); ++k) ASSERT_EQ(tube.fields[s][k], ra.fields[s][k]);
  }
}

TEST(ReachAvoid, StopBeforeWall) {
  // Gap to a wall and speed; A brakes to reach v < 1 while keeping gap >= 0.
  const double decel = 4.0;
  const GridSpec g({{-2, 20, 111, false}, {0, 10, 51, false}});
  const ScalarField reach = sample_field(g, [](std::span<const double> x) { return x[1] - 1.0; });
  const ScalarField avoid = identity_field(g);
  SolveConfig cfg;
  cfg.horizon_s = 4.0;
  const ValueFunction vf = solve_reach_avoid(reach, avoid, braking(decel, 10.0, Role::Min), cfg);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto x = g.node_state(k);
    const double stop = x[1] * x[1] / (2 * decel);
    for (const ScalarField& f : vf.fields) {
      if (x[0] < 0.0) ASSERT_GT(f[k], 0.0);
    }
    if (x[1] > 2.0 && x[0] < stop - 1.0) EXPECT_GT(vf.final_snapshot()[k], 0.0) << x[0] << " " << x[1];
    if (x[1] > 2.0 && x[0] > stop + 1.0) EXPECT_LT(vf.final_snapshot()[k], 0.0) << x[0] << " " << x[1];
  }
}

TEST(NearestSnapshot, RangeChecks) {
  const GridSpec g({{-5, 5, 101, false}});
  SolveConfig cfg;
  cfg.horizon_s = 1.0;
  const ValueFunction vf = solve_tube(identity_field(g), ConstantFlowDynamics({-1.0}), cfg);
  EXPECT_EQ(nearest_snapshot(vf, 0.0), vf.times.size() - 1);
  EXPECT_EQ(nearest_snapshot(vf, -1.0), 0u);
  EXPECT_THROW(nearest_snapshot(vf, 0.5), UsageError);
  EXPECT_THROW(nearest_snapshot(vf, -1.5), UsageError);
}

TEST(SolveTube, StepNeverExceedsConfiguredCfl) {
  const GridSpec g({{-5, 5, 101, false}});
  SolveConfig cfg;
  cfg.horizon_s = 1.01;
  SolveInfo info;
  solve_tube(identity_field(g), ConstantFlowDynamics({-1.0}), cfg, &info);
  EXPECT_EQ(info.steps, 21u);
  EXPECT_LE(info.dt, 0.05);
  EXPECT_NEAR(info.final_time, 1.01, 1e-12);
}
