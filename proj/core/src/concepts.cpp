#include "hjreach/concepts.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "hjreach/error.hpp"

namespace hjreach {
namespace {

template <class T>
T require(const std::optional<T>& v, const char* field) {
  if (!v) throw ConfigError(field, "missing parameter");
  return *v;
}

ControlBox scaled_box(const CarParams& car, double accel_scale, double steer_scale) {
  if (!(accel_scale >= 0.0) || !(steer_scale >= 0.0)) {
    throw ConfigError("control scale", "must be >= 0");
  }
  return {car.accel.scaled(accel_scale), car.steer.scaled(steer_scale)};
}

void require_car_grid(const GridSpec& grid, std::size_t ndim) {
  if (grid.ndim() != ndim) {
    throw ConfigError("grid", "expected " + std::to_string(ndim) + " dims, got " +
                                  std::to_string(grid.ndim()));
  }
  if (!grid.axis(2).periodic) throw ConfigError("grid.dtheta_rad", "must be periodic");
}

std::function<double(std::span<const double>)> car_ell(const BodyDims& a, const BodyDims& b,
                                                       const std::optional<SeverityShape>& shape) {
  return [a, b, shape](std::span<const double> x) {
    double l = signed_distance_rect({x[0], x[1], x[2]}, a, b);
    if (shape) l -= shape->margin(x[2]);
    return l;
  };
}

double gap_ell(std::span<const double> x) { return x[0]; }

ConceptSolve car_solve(const Scenario& sc, const SafetyConceptSpec& spec, ControlBounds bounds,
                       GameConfig game, CarLayout layout = CarLayout::full()) {
  auto dyn = std::make_shared<RelativeCarDynamics>(sc.car_a, sc.car_b, bounds, game, layout);
  ConceptSolve s{"main", dyn, build_ell_field(sc.grid, sc.body_a, sc.body_b, spec.shape),
                 std::nullopt, sc.solve, car_ell(sc.body_a, sc.body_b, spec.shape)};
  s.config.mode = SolveMode::Tube;
  return s;
}

ControlBounds override_bounds(const Scenario& sc, const ControlOverrides& o) {
  ControlBounds b{scaled_box(sc.car_a, o.a_accel_scale, o.a_steer_scale),
                  scaled_box(sc.car_b, o.b_accel_scale, o.b_steer_scale), o.scaling, o.gamma};
  b.validate();
  return b;
}

ConceptProblem build_rss(const SafetyConceptSpec& spec, const Scenario& sc) {
  const double b_a = require(spec.rss.b_a_mps2, "rss.b_a_mps2");
  const double b_b = require(spec.rss.b_b_mps2, "rss.b_b_mps2");
  const double lat_b = require(spec.rss.lat_b_mps2, "rss.lat_b_mps2");
  const std::vector<Axis> lat_axes = require(spec.rss.lateral_grid, "rss.lateral_grid");
  if (!(b_a < 0.0)) throw ConfigError("rss.b_a_mps2", "must be < 0");
  if (!(b_b < 0.0)) throw ConfigError("rss.b_b_mps2", "must be < 0");
  if (!(lat_b > 0.0)) throw ConfigError("rss.lat_b_mps2", "must be > 0");
  if (sc.grid.ndim() != 3) throw ConfigError("grid", "rss longitudinal grid must be (gap, vA, vB)");
  if (lat_axes.size() != 3) throw ConfigError("rss.lateral_grid", "must have 3 dims");
  const GridSpec lat_grid(lat_axes);

  const GameConfig singleton_game{Role::Min, Role::Min, Agent::B};
  ConceptProblem p{ConceptKind::Rss, {}, true};

  auto lon = std::make_shared<GapDynamics>(-1.0, 1.0, SpeedChannel{{b_a, b_a}, sc.car_a.velocity},
                                           SpeedChannel{{b_b, b_b}, sc.car_b.velocity},
                                           singleton_game);
  ConceptSolve ls{"longitudinal", lon, sample_field(sc.grid, gap_ell), std::nullopt, sc.solve,
                  gap_ell};
  ls.config.mode = SolveMode::Tube;
  p.solves.push_back(std::move(ls));

  const Axis& wa = lat_grid.axis(1);
  const Axis& wb = lat_grid.axis(2);
  auto lat = std::make_shared<GapDynamics>(-1.0, -1.0, SpeedChannel{{}, {wa.lower, wa.upper}, lat_b},
                                           SpeedChannel{{}, {wb.lower, wb.upper}, lat_b},
                                           singleton_game);
  ConceptSolve ts{"lateral", lat, sample_field(lat_grid, gap_ell), std::nullopt, sc.solve, gap_ell};
  ts.config.mode = SolveMode::Tube;
  p.solves.push_back(std::move(ts));
  return p;
}

}  // namespace

std::string_view to_string(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::WorstCase: return "worst_case";
    case ConceptKind::Frs: return "frs";
    case ConceptKind::Sff: return "sff";
    case ConceptKind::Rss: return "rss";
    case ConceptKind::Contingency: return "contingency";
    case ConceptKind::ConstantMotion: return "constant_motion";
    case ConceptKind::Custom: return "custom";
  }
  return "?";
}

ConceptKind concept_kind_from_string(std::string_view name) {
  for (ConceptKind k : {ConceptKind::WorstCase, ConceptKind::Frs, ConceptKind::Sff, ConceptKind::Rss,
                        ConceptKind::Contingency, ConceptKind::ConstantMotion, ConceptKind::Custom}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("kind", "unknown safety concept '" + std::string(name) + "'");
}

std::string_view to_string(BehaviorModel model) {
  switch (model) {
    case BehaviorModel::Maintain: return "maintain";
    case BehaviorModel::Brake: return "brake";
    case BehaviorModel::Adversarial: return "adversarial";
  }
  return "?";
}

BehaviorModel behavior_model_from_string(std::string_view name) {
  for (BehaviorModel m : {BehaviorModel::Maintain, BehaviorModel::Brake, BehaviorModel::Adversarial}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("contingency.b_model", "unknown behavior model '" + std::string(name) + "'");
}

SafetyConceptSpec SafetyConceptSpec::preset(ConceptKind kind) {
  SafetyConceptSpec s;
  s.kind = kind;
  switch (kind) {
    case ConceptKind::Sff:
      s.sff = {-8.0, -2.0, 0.25};
      break;
    case ConceptKind::Rss:
      s.rss = {-4.0, -8.0, 1.0,
               std::vector<Axis>{{-2.0, 6.0, 81, false}, {-2.0, 2.0, 21, false}, {-2.0, 2.0, 21, false}}};
      break;
    case ConceptKind::Contingency:
      s.contingency = {0.5, BehaviorModel::Maintain, -6.0};
      break;
    case ConceptKind::ConstantMotion:
      s.constant_motion = {0.0, 0.0, false};
      break;
    case ConceptKind::Custom:
      s.game = GameConfig{};
      break;
    default:
      break;
  }
  return s;
}

ConceptProblem build(const SafetyConceptSpec& spec, const Scenario& sc) {
  sc.solve.validate();
  sc.car_a.validate();
  sc.car_b.validate();
  ConceptProblem p{spec.kind, {}, true};
  switch (spec.kind) {
    case ConceptKind::WorstCase:
      require_car_grid(sc.grid, 5);
      p.solves.push_back(car_solve(sc, spec, override_bounds(sc, spec.controls),
                                   {Role::Max, Role::Min, Agent::B}));
      return p;
    case ConceptKind::Frs:
      require_car_grid(sc.grid, 5);
      p.solves.push_back(car_solve(sc, spec, override_bounds(sc, spec.controls),
                                   {Role::Min, Role::Min, Agent::B}));
      return p;
    case ConceptKind::Custom: {
      require_car_grid(sc.grid, 5);
      const GameConfig game = require(spec.game, "game");
      p.solves.push_back(car_solve(sc, spec, override_bounds(sc, spec.controls), game));
      return p;
    }
    case ConceptKind::Sff: {
      require_car_grid(sc.grid, 5);
      const double hard = require(spec.sff.b_hard_mps2, "sff.b_hard_mps2");
      const double soft = require(spec.sff.b_soft_mps2, "sff.b_soft_mps2");
      const double frac = require(spec.sff.steer_fraction, "sff.steer_fraction");
      if (!(hard <= soft && soft < 0.0)) {
        throw ConfigError("sff.b_soft_mps2", "need b_hard <= b_soft < 0");
      }
      if (!(frac >= 0.0 && frac <= 1.0)) throw ConfigError("sff.steer_fraction", "must lie in [0, 1]");
      Scenario s2 = sc;
      s2.car_a.velocity.lo = 0.0;
      s2.car_b.velocity.lo = 0.0;
      ControlBounds b{{{hard, soft}, sc.car_a.steer.scaled(frac)},
                      {{hard, soft}, sc.car_b.steer.scaled(frac)}};
      p.solves.push_back(car_solve(s2, spec, b, {Role::Min, Role::Min, Agent::B}));
      return p;
    }
    case ConceptKind::Rss:
      return build_rss(spec, sc);
    case ConceptKind::Contingency: {
      require_car_grid(sc.grid, 5);
      const double v_stop = require(spec.contingency.v_stop_mps, "contingency.v_stop_mps");
      const BehaviorModel model = require(spec.contingency.b_model, "contingency.b_model");
      ControlBounds b = override_bounds(sc, spec.controls);
      GameConfig game{Role::Min, Role::Min, Agent::B};
      if (model == BehaviorModel::Maintain) {
        b.b = ControlBox{};
      } else if (model == BehaviorModel::Brake) {
        const double brake = require(spec.contingency.b_brake_mps2, "contingency.b_brake_mps2");
        if (!(brake < 0.0)) throw ConfigError("contingency.b_brake_mps2", "must be < 0");
        b.b = ControlBox{{brake, brake}, {}};
      } else {
        // B works against A reaching the stop set.
        game.role_b = Role::Max;
      }
      auto dyn = std::make_shared<RelativeCarDynamics>(sc.car_a, sc.car_b, b, game);
      auto reach_fn = [v_stop](std::span<const double> x) { return x[3] - v_stop; };
      ConceptSolve s{"main", dyn, sample_field(sc.grid, reach_fn),
                     build_ell_field(sc.grid, sc.body_a, sc.body_b, spec.shape), sc.solve, reach_fn};
      s.config.mode = SolveMode::ReachAvoid;
      p.solves.push_back(std::move(s));
      p.unsafe_when_negative = false;
      return p;
    }
    case ConceptKind::ConstantMotion: {
      const double da = require(spec.constant_motion.steer_a_rad, "constant_motion.steer_a_rad");
      const double db = require(spec.constant_motion.steer_b_rad, "constant_motion.steer_b_rad");
      ControlBounds b{{{0.0, 0.0}, {da, da}}, {{0.0, 0.0}, {db, db}}};
      if (spec.constant_motion.augment) {
        require_car_grid(sc.grid, 7);
        p.solves.push_back(car_solve(sc, spec, b, {Role::Min, Role::Min, Agent::B},
                                     CarLayout::augmented_steering()));
      } else {
        require_car_grid(sc.grid, 5);
        p.solves.push_back(car_solve(sc, spec, b, {Role::Min, Role::Min, Agent::B}));
      }
      return p;
    }
  }
  throw ConfigError("kind", "unsupported concept");
}

std::vector<ValueFunction> solve(const ConceptProblem& problem, std::vector<SolveInfo>* infos) {
  std::vector<ValueFunction> out;
  if (infos) infos->clear();
  for (const ConceptSolve& s : problem.solves) {
    SolveInfo info;
    if (s.avoid) {
      out.push_back(solve_reach_avoid(s.ell, *s.avoid, *s.dynamics, s.config, &info));
    } else {
      out.push_back(solve_tube(s.ell, *s.dynamics, s.config, &info));
    }
    if (infos) infos->push_back(info);
  }
  return out;
}

std::vector<std::uint8_t> concept_unsafe_set(const ConceptProblem& problem, const ValueFunction& vf,
                                             double t) {
  std::vector<std::uint8_t> mask = unsafe_set(vf, t);
  if (!problem.unsafe_when_negative) {
    for (auto& m : mask) m = m ? 0 : 1;
  }
  return mask;
}

bool rss_unsafe(const ValueFunction& longitudinal, const ValueFunction& lateral,
                std::span<const double> lon_state, std::span<const double> lat_state, double t) {
  const double vl = interpolate(longitudinal.fields[nearest_snapshot(longitudinal, t)], lon_state);
  const double vt = interpolate(lateral.fields[nearest_snapshot(lateral, t)], lat_state);
  return vl < 0.0 && vt < 0.0;
}

double rollout_value(std::span<const double> x0, const GameDynamics& dyn,
                     const std::function<double(std::span<const double>)>& ell, double horizon,
                     double dt) {
  if (!(dt > 0.0)) throw UsageError("rollout dt must be > 0");
  const std::size_t n = dyn.state_dim();
  if (x0.size() != n) throw UsageError("rollout state dimension mismatch");
  auto f = [&](std::span<const double> x, std::span<double> out) {
    const ControlBox ba = dyn.box_a(x), bb = dyn.box_b(x);
    if (!ba.accel.singleton() || !ba.steer.singleton() || !bb.accel.singleton() ||
        !bb.steer.singleton()) {
      throw UsageError("rollout_value requires singleton control sets");
    }
    dyn.flow(x, {ba.accel.lo, ba.steer.lo}, {bb.accel.lo, bb.steer.lo}, out);
  };
  std::vector<double> x(x0.begin(), x0.end()), k1(n), k2(n), k3(n), k4(n), tmp(n);
  double best = ell(x);
  double t = 0.0;
  while (t < horizon - 1e-12) {
    const double h = std::min(dt, horizon - t);
    f(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    f(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    f(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t += h;
    best = std::min(best, ell(x));
  }
  return best;
}

RssVerdict rss_closed_form(double v_a, double v_b, double b_a, double b_b, double gap) {
  if (!(b_a < 0.0) || !(b_b < 0.0)) throw UsageError("RSS decelerations must be < 0");
  if (!(v_a >= 0.0) || !(v_b >= 0.0)) throw UsageError("RSS speeds must be >= 0");
  const double da = -b_a, db = -b_b;
  const double ta = v_a / da, tb = v_b / db;
  auto travel = [](double v, double d, double stop, double t) {
    const double s = std::min(t, stop);
    return v * s - 0.5 * d * s * s;
  };
  auto rel = [&](double t) { return travel(v_a, da, ta, t) - travel(v_b, db, tb, t); };
  // rel' = vA(t) - vB(t) is piecewise linear; extrema sit at 0, a stop time,
  // or where both speeds match before either agent stops.
  std::array<double, 4> candidates{0.0, ta, tb, 0.0};
  std::size_t count = 3;
  if (da != db) {
    const double t_star = (v_a - v_b) / (da - db);
    if (t_star > 0.0 && t_star < std::min(ta, tb)) candidates[count++] = t_star;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) worst = std::max(worst, rel(candidates[i]));
  return {!(gap < worst), worst};
}

}  // namespace hjreach
