#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hjreach/concepts.hpp"
#include "hjreach/error.hpp"

using namespace hjreach;

namespace {

constexpr double kPi = std::numbers::pi;

Scenario car_scenario(std::size_t n = 9, std::size_t nt = 8, std::size_t nv = 3) {
  Scenario s;
  s.grid = GridSpec({{-12, 12, n, false},
                     {-8, 8, n, false},
                     {-kPi, kPi, nt, true},
                     {0, 15, nv, false},
                     {0, 15, nv, false}});
  s.solve.horizon_s = 0.5;
  return s;
}

Scenario gap_scenario() {
  Scenario s;
  s.grid = GridSpec({{-5, 60, 131, false}, {0, 15, 31, false}, {0, 15, 31, false}});
  s.solve.horizon_s = 5.0;
  return s;
}

ConceptSolve constant_motion(double da = 0.0, double db = 0.0) {
  SafetyConceptSpec spec = SafetyConceptSpec::preset(ConceptKind::ConstantMotion);
  spec.constant_motion.steer_a_rad = da;
  spec.constant_motion.steer_b_rad = db;
  return build(spec, car_scenario()).solves.at(0);
}

template <class F>
std::string config_field(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

}  // namespace

TEST(ConceptKind, NamesRoundTrip) {
  for (auto k : {ConceptKind::WorstCase, ConceptKind::Frs, ConceptKind::Sff, ConceptKind::Rss,
                 ConceptKind::Contingency, ConceptKind::ConstantMotion, ConceptKind::Custom}) {
    EXPECT_EQ(concept_kind_from_string(to_string(k)), k);
  }
  EXPECT_EQ(config_field([] { concept_kind_from_string("bogus"); }), "kind");
  EXPECT_EQ(behavior_model_from_string("adversarial"), BehaviorModel::Adversarial);
  EXPECT_EQ(config_field([] { behavior_model_from_string("erratic"); }), "contingency.b_model");
}

TEST(RssClosedForm, RearCarStoppingBehindStationaryLead) {
  const RssVerdict r = rss_closed_form(20.0, 0.0, -4.0, -8.0, 49.0);
  EXPECT_NEAR(r.critical_gap_m, 50.0, 1e-12);
  EXPECT_FALSE(r.safe);
  EXPECT_TRUE(rss_closed_form(20.0, 0.0, -4.0, -8.0, 50.0).safe);
}

TEST(RssClosedForm, EqualSpeedsAndDecelerations) {
  EXPECT_EQ(rss_closed_form(12.0, 12.0, -5.0, -5.0, 0.0).critical_gap_m, 0.0);
  EXPECT_TRUE(rss_closed_form(12.0, 12.0, -5.0, -5.0, 0.0).safe);
}

TEST(RssClosedForm, MatchesSimulatedEpisode) {
  for (double va : {0.0, 4.0, 11.0, 17.0}) {
    for (double vb : {0.0, 3.0, 9.0, 20.0}) {
      for (auto [ba, bb] : {std::pair{-4.0, -8.0}, std::pair{-6.0, -3.0}, std::pair{-5.0, -5.0}}) {
        double xa = 0.0, xb = 0.0, ua = va, ub = vb, worst = 0.0;
        const double dt = 1e-4;
        for (int k = 0; k < 200000 && (ua > 0.0 || ub > 0.0); ++k) {
          const double na = std::max(0.0, ua + ba * dt), nb = std::max(0.0, ub + bb * dt);
          xa += 0.5 * (ua + na) * dt;
          xb += 0.5 * (ub + nb) * dt;
          ua = na;
          ub = nb;
          worst = std::max(worst, xa - xb);
        }
        EXPECT_NEAR(rss_closed_form(va, vb, ba, bb, 0.0).critical_gap_m, worst, 1e-3)
            << va << " " << vb << " " << ba << " " << bb;
      }
    }
  }
}

TEST(RssClosedForm, RejectsBadInputs) {
  EXPECT_THROW(rss_closed_form(1.0, 1.0, 0.0, -1.0, 1.0), UsageError);
  EXPECT_THROW(rss_closed_form(-1.0, 1.0, -1.0, -1.0, 1.0), UsageError);
}

TEST(Build, PresetsBuildForEveryKind) {
  for (auto k : {ConceptKind::WorstCase, ConceptKind::Frs, ConceptKind::Sff,
                 ConceptKind::Contingency, ConceptKind::ConstantMotion, ConceptKind::Custom}) {
    const ConceptProblem p = build(SafetyConceptSpec::preset(k), car_scenario());
    ASSERT_EQ(p.solves.size(), 1u) << to_string(k);
    EXPECT_EQ(p.solves[0].dynamics->state_dim(), 5u);
    EXPECT_EQ(p.unsafe_when_negative, k != ConceptKind::Contingency);
    EXPECT_EQ(p.solves[0].avoid.has_value(), k == ConceptKind::Contingency);
  }
  const ConceptProblem rss = build(SafetyConceptSpec::preset(ConceptKind::Rss), gap_scenario());
  ASSERT_EQ(rss.solves.size(), 2u);
  EXPECT_EQ(rss.solves[0].label, "longitudinal");
  EXPECT_EQ(rss.solves[1].label, "lateral");
}

TEST(Build, ConfigErrorsNameTheField) {
  const Scenario sc = car_scenario();
  SafetyConceptSpec sff;
  sff.kind = ConceptKind::Sff;
  EXPECT_EQ(config_field([&] { build(sff, sc); }), "sff.b_hard_mps2");
  sff = SafetyConceptSpec::preset(ConceptKind::Sff);
  sff.sff.b_soft_mps2 = -10.0;
  EXPECT_EQ(config_field([&] { build(sff, sc); }), "sff.b_soft_mps2");

  SafetyConceptSpec custom;
  custom.kind = ConceptKind::Custom;
  EXPECT_EQ(config_field([&] { build(custom, sc); }), "game");

  SafetyConceptSpec rss;
  rss.kind = ConceptKind::Rss;
  EXPECT_EQ(config_field([&] { build(rss, gap_scenario()); }), "rss.b_a_mps2");
  rss = SafetyConceptSpec::preset(ConceptKind::Rss);
  rss.rss.lat_b_mps2 = 0.0;
  EXPECT_EQ(config_field([&] { build(rss, gap_scenario()); }), "rss.lat_b_mps2");

  SafetyConceptSpec cont = SafetyConceptSpec::preset(ConceptKind::Contingency);
  cont.contingency.v_stop_mps.reset();
  EXPECT_EQ(config_field([&] { build(cont, sc); }), "contingency.v_stop_mps");

  SafetyConceptSpec wc = SafetyConceptSpec::preset(ConceptKind::WorstCase);
  EXPECT_EQ(config_field([&] { build(wc, gap_scenario()); }), "grid");
  Scenario bad = sc;
  bad.car_a.wheelbase_m = 0.0;
  EXPECT_THROW(build(wc, bad), ConfigError);
}

TEST(Rollout, HeadOnClosesAtCombinedSpeed) {
  const ConceptSolve s = constant_motion();
  const std::vector<double> x0{10.0, 0.0, kPi, 1.0, 1.0};
  // Bumpers touch after (10 - 4.5) / 2 s.
  EXPECT_NEAR(rollout_value(x0, *s.dynamics, s.ell_fn, 2.0, 0.01), 1.5, 1e-9);
  EXPECT_NEAR(rollout_value(x0, *s.dynamics, s.ell_fn, 2.75, 0.01), 0.0, 1e-9);
  EXPECT_LT(rollout_value(x0, *s.dynamics, s.ell_fn, 3.0, 0.01), 0.0);
}

TEST(Rollout, ParallelLanesKeepTheirGap) {
  const ConceptSolve s = constant_motion();
  const std::vector<double> x0{0.0, 3.6, 0.0, 10.0, 10.0};
  EXPECT_NEAR(rollout_value(x0, *s.dynamics, s.ell_fn, 5.0, 0.05), 1.8, 1e-9);
}

TEST(Rollout, RequiresSingletonControls) {
  const ConceptProblem p = build(SafetyConceptSpec::preset(ConceptKind::WorstCase), car_scenario());
  const std::vector<double> x0{10.0, 0.0, 0.0, 1.0, 1.0};
  EXPECT_THROW(rollout_value(x0, *p.solves[0].dynamics, p.solves[0].ell_fn, 1.0, 0.1), UsageError);
}

TEST(Solve, ConstantMotionTracksRollouts) {
  Scenario sc;
  sc.grid = GridSpec({{-15, 15, 61, false},
                      {-8, 8, 33, false},
                      {-kPi, kPi, 16, true},
                      {0, 10, 3, false},
                      {0, 10, 3, false}});
  sc.solve.horizon_s = 1.0;
  SafetyConceptSpec spec = SafetyConceptSpec::preset(ConceptKind::ConstantMotion);
  const ConceptProblem p = build(spec, sc);
  const ValueFunction vf = solve(p).at(0);
  const GridSpec& g = sc.grid;
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); k += 7) {
    const auto x = g.node_state(k);
    if (std::abs(x[0]) > 10.0 || std::abs(x[1]) > 5.0) continue;
    const double ref = rollout_value(x, *p.solves[0].dynamics, p.solves[0].ell_fn, 1.0, 0.01);
    worst = std::max(worst, std::abs(vf.final_snapshot()[k] - ref));
  }
  // Two cells of value change: the ell Lipschitz constant along dtheta is B's
  // half diagonal.
  const double band = 2.0 * std::max({g.spacing(0), g.spacing(1), g.spacing(2) * std::hypot(2.25, 0.9)});
  EXPECT_LT(worst, band);
}

TEST(Solve, ForwardReachableSetContainsWorstCase) {
  const Scenario sc = car_scenario(13, 8, 3);
  const ValueFunction wc = solve(build(SafetyConceptSpec::preset(ConceptKind::WorstCase), sc)).at(0);
  const ValueFunction frs = solve(build(SafetyConceptSpec::preset(ConceptKind::Frs), sc)).at(0);
  ASSERT_EQ(wc.times, frs.times);
  for (std::size_t k = 0; k < sc.grid.size(); ++k) {
    ASSERT_LE(frs.final_snapshot()[k], wc.final_snapshot()[k] + 1e-9);
  }
}

TEST(Solve, ContingencyUnsafeMaskFlipsSign) {
  const Scenario sc = car_scenario();
  const ConceptProblem p = build(SafetyConceptSpec::preset(ConceptKind::Contingency), sc);
  const ValueFunction vf = solve(p).at(0);
  const auto mask = concept_unsafe_set(p, vf, -sc.solve.horizon_s);
  for (std::size_t k = 0; k < sc.grid.size(); ++k) {
    EXPECT_EQ(mask[k], vf.final_snapshot()[k] >= 0.0 ? 1 : 0);
  }
}

TEST(Solve, RssLongitudinalMatchesClosedForm) {
  const Scenario sc = gap_scenario();
  SafetyConceptSpec spec = SafetyConceptSpec::preset(ConceptKind::Rss);
  const ConceptProblem p = build(spec, sc);
  ConceptProblem lon = p;
  lon.solves.resize(1);
  const ValueFunction vf = solve(lon).at(0);
  const GridSpec& g = sc.grid;
  std::size_t agree = 0, total = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto x = g.node_state(k);
    const RssVerdict r = rss_closed_form(x[1], x[2], -4.0, -8.0, x[0]);
    // Skip nodes within two cells of the closed-form boundary.
    if (std::abs(x[0] - r.critical_gap_m) < 2 * g.spacing(0) || x[0] > 55.0) continue;
    ++total;
    agree += (vf.final_snapshot()[k] < 0.0) == !r.safe;
  }
  EXPECT_GT(total, 1000u);
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(total), 0.99);
}
