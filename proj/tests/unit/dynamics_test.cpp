#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hjreach/dynamics.hpp"
#include "hjreach/error.hpp"

using namespace hjreach;

namespace {

constexpr double kPi = std::numbers::pi;

double dot5(const Flow5& p, const Flow5& f) {
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += p[i] * f[i];
  return s;
}

std::vector<double> linspace(const Interval& r, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(r.lo + (r.hi - r.lo) * i / (n - 1));
  return out;
}

}  // namespace

TEST(RelativeFlow, MatchesHandComputation) {
  const CarParams car;
  const RelativeState z{10.0, 2.0, kPi / 2, 5.0, 8.0};
  const Flow5 f = relative_flow(z, {1.0, 0.05}, {-2.0, -0.05}, car, car);
  const double wa = 5.0 / 2.7 * std::tan(0.05), wb = 8.0 / 2.7 * std::tan(-0.05);
  EXPECT_NEAR(f[0], -5.0 + 8.0 * std::cos(kPi / 2) + wa * 2.0, 1e-12);
  EXPECT_NEAR(f[1], 8.0 - wa * 10.0, 1e-12);
  EXPECT_NEAR(f[2], wb - wa, 1e-12);
  EXPECT_EQ(f[3], 1.0);
  EXPECT_EQ(f[4], -2.0);
}

TEST(RelativeFlow, VelocitySaturation) {
  const CarParams car;
  const Flow5 top = relative_flow({0, 0, 0, 15.0, 0.0}, {3.0, 0.0}, {-1.0, 0.0}, car, car);
  EXPECT_EQ(top[3], 0.0);
  EXPECT_EQ(top[4], 0.0);
  const Flow5 inside = relative_flow({0, 0, 0, 15.0, 0.0}, {-3.0, 0.0}, {1.0, 0.0}, car, car);
  EXPECT_EQ(inside[3], -3.0);
  EXPECT_EQ(inside[4], 1.0);
}

TEST(RelativeFlow, RejectsSteeringAtRightAngle) {
  const CarParams car;
  EXPECT_THROW(relative_flow({}, {0.0, kPi / 2}, {}, car, car), UsageError);
  EXPECT_THROW(relative_flow({}, {}, {0.0, -2.0}, car, car), UsageError);
}

TEST(Extremize, EndpointsAndTies) {
  const Interval r{-6.0, 3.0};
  EXPECT_EQ(extremize(1.0, r, Role::Max), 3.0);
  EXPECT_EQ(extremize(1.0, r, Role::Min), -6.0);
  EXPECT_EQ(extremize(-1.0, r, Role::Max), -6.0);
  EXPECT_EQ(extremize(-1.0, r, Role::Min), 3.0);
  EXPECT_EQ(extremize(0.0, r, Role::Max), 0.0);
  EXPECT_EQ(extremize(0.0, Interval{1.0, 2.0}, Role::Min), 1.0);
}

TEST(SaturateAccel, ClipsAtBounds) {
  const Interval v{0.0, 15.0};
  EXPECT_EQ(saturate_accel({-6, 3}, 15.0, v), (Interval{-6, 0}));
  EXPECT_EQ(saturate_accel({-6, 3}, 0.0, v), (Interval{0, 3}));
  EXPECT_EQ(saturate_accel({-6, 3}, 7.0, v), (Interval{-6, 3}));
  EXPECT_EQ(saturate_accel({-8, -2}, 0.0, v), (Interval{0, 0}));
}

TEST(ScaledBounds, StateDependentFactors) {
  const CarParams car;
  const ControlBox box{{-6, 3}, {-0.1, 0.1}};
  const ScaledBox lo = scaled_bounds(box, ScalingMode::StateDependent, 0.2, 0.0, car);
  EXPECT_DOUBLE_EQ(lo.steer_factor, 1.0);
  EXPECT_DOUBLE_EQ(lo.accel_factor, 0.2);
  const ScaledBox hi = scaled_bounds(box, ScalingMode::StateDependent, 0.2, 15.0, car);
  EXPECT_DOUBLE_EQ(hi.steer_factor, 0.2);
  EXPECT_DOUBLE_EQ(hi.accel_factor, 1.0);
  EXPECT_NEAR(hi.box.steer.hi, 0.02, 1e-15);
  const ScaledBox mid = scaled_bounds(box, ScalingMode::StateDependent, 0.2, 7.5, car);
  EXPECT_DOUBLE_EQ(mid.steer_factor, 0.6);
  EXPECT_DOUBLE_EQ(mid.accel_factor, 0.6);
  EXPECT_FALSE(mid.clamped);
  EXPECT_TRUE(scaled_bounds(box, ScalingMode::StateDependent, 0.2, 20.0, car).clamped);
  const ScaledBox none = scaled_bounds(box, ScalingMode::None, 0.2, 7.5, car);
  EXPECT_EQ(none.box.accel, box.accel);
}

TEST(Validation, CarAndBounds) {
  CarParams car;
  car.steer = {-1.6, 0.1};
  EXPECT_THROW(car.validate(), ConfigError);
  car = CarParams{};
  car.velocity = {5.0, 5.0};
  EXPECT_THROW(car.validate(), ConfigError);
  ControlBounds b{{{1, 0}, {}}, {}};
  EXPECT_THROW(b.validate(), ConfigError);
  ControlBounds g{{}, {}, ScalingMode::StateDependent, 0.0};
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Hamiltonian, DominatesControlGridMaxMin) {
  const CarParams car;
  const ControlBox box{car.accel, car.steer};
  const GameConfig game{Role::Max, Role::Min, Agent::B};
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> pos(-30, 30), ang(-kPi, kPi), vel(0, 15), grad(-1, 1);
  const auto accels = linspace(box.accel, 21), steers = linspace(box.steer, 21);
  int violations = 0;
  for (int n = 0; n < 300; ++n) {
    const RelativeState z{pos(rng), pos(rng), ang(rng), n % 10 == 0 ? 15.0 : vel(rng), vel(rng)};
    const Flow5 p{grad(rng), grad(rng), grad(rng), grad(rng), grad(rng)};
    const double h = hamiltonian(z, p, box, box, game, car, car);
    double best = -std::numeric_limits<double>::infinity();
    for (double aa : accels) {
      for (double sa : steers) {
        double worst = std::numeric_limits<double>::infinity();
        for (double ab : accels) {
          for (double sb : steers) {
            worst = std::min(worst, dot5(p, relative_flow(z, {aa, sa}, {ab, sb}, car, car)));
          }
        }
        if (worst > h + 1e-9) ++violations;
        best = std::max(best, worst);
      }
    }
    EXPECT_NEAR(best, h, 1e-9);
  }
  EXPECT_EQ(violations, 0);
}

TEST(Hamiltonian, OptimalControlsAttainIt) {
  const CarParams car;
  const ControlBounds bounds{{car.accel, car.steer}, {car.accel, car.steer}};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> pos(-30, 30), ang(-kPi, kPi), vel(0, 15), grad(-1, 1);
  for (const GameConfig game : {GameConfig{Role::Max, Role::Min, Agent::B},
                                GameConfig{Role::Min, Role::Min, Agent::B},
                                GameConfig{Role::Max, Role::Max, Agent::A}}) {
    const RelativeCarDynamics dyn(car, car, bounds, game);
    for (int n = 0; n < 200; ++n) {
      const std::vector<double> x{pos(rng), pos(rng), ang(rng), vel(rng), vel(rng)};
      const std::vector<double> p{grad(rng), grad(rng), grad(rng), grad(rng), grad(rng)};
      const ControlPair u = dyn.optimal_controls(x, p);
      std::vector<double> f(5);
      dyn.flow(x, u.a, u.b, f);
      double pf = 0.0;
      for (int i = 0; i < 5; ++i) pf += p[i] * f[i];
      EXPECT_NEAR(pf, dyn.hamiltonian(x, p), 1e-9);
      EXPECT_TRUE(dyn.box_a(x).contains(u.a));
      EXPECT_TRUE(dyn.box_b(x).contains(u.b));
    }
  }
}

TEST(Hamiltonian, ZeroGradientPicksTieControls) {
  const CarParams car;
  const RelativeCarDynamics dyn(car, car, {{car.accel, car.steer}, {car.accel, car.steer}}, {});
  const std::vector<double> x{5, 1, 0.3, 4, 6}, p(5, 0.0);
  const ControlPair u = dyn.optimal_controls(x, p);
  EXPECT_EQ(u.a, (AgentControl{0.0, 0.0}));
  EXPECT_EQ(u.b, (AgentControl{0.0, 0.0}));
}

TEST(SpeedBounds, CoverEveryAdmissibleFlow) {
  const CarParams car;
  const ControlBox box{car.accel, car.steer};
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> pos(-30, 30), ang(-kPi, kPi), vel(0, 15), u01(0, 1);
  for (int n = 0; n < 2000; ++n) {
    const RelativeState z{pos(rng), pos(rng), ang(rng), vel(rng), vel(rng)};
    const Flow5 s = speed_bounds(z, box, box, car, car);
    const AgentControl ua{box.accel.lo + u01(rng) * 9, box.steer.lo + u01(rng) * 0.2};
    const AgentControl ub{box.accel.lo + u01(rng) * 9, box.steer.lo + u01(rng) * 0.2};
    const Flow5 f = relative_flow(z, ua, ub, car, car);
    for (int i = 0; i < 5; ++i) EXPECT_LE(std::abs(f[i]), s[i] + 1e-12);
  }
}

TEST(NodeKernel, FastPathMatchesGenericEvaluation) {
  CarParams ca, cb;
  cb.velocity = {0.0, 12.0};
  const GridSpec grid({{-10, 10, 5, false}, {-4, 4, 5, false}, {-kPi, kPi, 6, true}, {0, 15, 4, false},
                       {0, 15, 5, false}});
  for (ScalingMode mode : {ScalingMode::None, ScalingMode::StateDependent}) {
    const ControlBounds bounds{{ca.accel, ca.steer}, {cb.accel.scaled(0.5), cb.steer}, mode, 0.2};
    const RelativeCarDynamics dyn(ca, cb, bounds, {Role::Max, Role::Min, Agent::B});
    const auto fast = dyn.bind(grid);
    const auto slow = dyn.GameDynamics::bind(grid);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> g(-2, 2);
    for (std::size_t k = 0; k < grid.size(); k += 7) {
      const MultiIndex idx = grid.unflatten(k);
      const auto x = grid.node_state(k);
      double pm[5], pp[5], s1[5], s2[5];
      for (int i = 0; i < 5; ++i) {
        pm[i] = g(rng);
        pp[i] = g(rng);
      }
      EXPECT_NEAR(fast->lax_friedrichs(idx, x, pm, pp), slow->lax_friedrichs(idx, x, pm, pp), 1e-9);
      fast->speed_bounds(idx, x, s1);
      slow->speed_bounds(idx, x, s2);
      for (int i = 0; i < 5; ++i) EXPECT_NEAR(s1[i], s2[i], 1e-12);
    }
  }
}

TEST(GapDynamics, FollowingFlow) {
  const GapDynamics dyn(-1.0, 1.0, {{-4, -4}, {0, 30}}, {{-8, -8}, {0, 30}}, {Role::Min, Role::Min, Agent::B});
  std::vector<double> f(3);
  dyn.flow(std::vector<double>{10, 20, 5}, {-4, 0}, {-8, 0}, f);
  EXPECT_EQ(f[0], -15.0);
  EXPECT_EQ(f[1], -4.0);
  EXPECT_EQ(f[2], -8.0);
  dyn.flow(std::vector<double>{10, 0, 0}, {-4, 0}, {-8, 0}, f);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[2], 0.0);
}

TEST(GapDynamics, BrakeToZeroChannel) {
  const GapDynamics dyn(-1.0, -1.0, {{}, {-2, 2}, 1.0}, {{}, {-2, 2}, 1.0}, {Role::Min, Role::Min, Agent::B});
  EXPECT_EQ(dyn.box_a(std::vector<double>{0, 1.5, -0.5}).accel, (Interval{-1, -1}));
  EXPECT_EQ(dyn.box_b(std::vector<double>{0, 1.5, -0.5}).accel, (Interval{1, 1}));
  EXPECT_EQ(dyn.box_a(std::vector<double>{0, 0.0, 0.0}).accel, (Interval{0, 0}));
}

TEST(GapDynamics, PinnedLeadSpeed) {
  const GapDynamics dyn(-1.0, 0.0, {{-5, 5}, {0, 10}}, {}, {Role::Max, Role::Min, Agent::B}, 0.0);
  EXPECT_EQ(dyn.state_dim(), 2u);
  const std::vector<double> x{4, 6}, p{1, -1};
  EXPECT_EQ(dyn.optimal_controls(x, p).a.accel, -5.0);
  EXPECT_DOUBLE_EQ(dyn.hamiltonian(x, p), -6.0 + 5.0);
}

TEST(ConstantFlow, NoControls) {
  const ConstantFlowDynamics dyn({-1.0, 2.0});
  std::vector<double> f(2), s(2);
  dyn.flow(std::vector<double>{0, 0}, {}, {}, f);
  EXPECT_EQ(f, (std::vector<double>{-1.0, 2.0}));
  dyn.speed_bounds(std::vector<double>{0, 0}, s);
  EXPECT_EQ(s, (std::vector<double>{1.0, 2.0}));
}
