#include "hjreach_cli/scenario_file.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include "hjreach/error.hpp"
#include "hjreach_cli/toml.hpp"

namespace hjreach::cli {
namespace {

using toml::Entry;
using toml::Table;

std::string where(std::size_t line, const std::string& key) {
  std::string s;
  if (line > 0) s += "line " + std::to_string(line) + ": ";
  if (!key.empty()) s += key + ": ";
  return s;
}

[[noreturn]] void fail(const Entry& e, const std::string& section, const std::string& msg) {
  throw ScenarioError(e.value.line, section + "." + e.key, msg);
}

// Converts value-type ParseErrors into keyed diagnostics.
template <class F>
auto read(const Entry& e, const std::string& section, F&& f) {
  try {
    return f(e.value);
  } catch (const toml::ParseError& err) {
    std::string msg = err.what();
    msg = msg.substr(msg.find(": ") + 2);
    fail(e, section, msg);
  }
}

double number(const Entry& e, const std::string& section) {
  return read(e, section, [](const toml::Value& v) { return v.as_number(); });
}
bool boolean(const Entry& e, const std::string& section) {
  return read(e, section, [](const toml::Value& v) { return v.as_bool(); });
}
std::string text(const Entry& e, const std::string& section) {
  return read(e, section, [](const toml::Value& v) { return v.as_string(); });
}

Role role_from(const Entry& e, const std::string& section) {
  const std::string s = text(e, section);
  if (s == "max") return Role::Max;
  if (s == "min") return Role::Min;
  fail(e, section, "expected \"max\" or \"min\"");
}

const char* role_name(Role r) { return r == Role::Max ? "max" : "min"; }

Axis read_axis(const Table& t, const std::string& dim) {
  Axis a;
  bool have_lower = false, have_upper = false, have_count = false;
  for (const Entry& e : t.entries) {
    if (e.key == "lower") {
      a.lower = number(e, t.name);
      have_lower = true;
    } else if (e.key == "upper") {
      a.upper = number(e, t.name);
      have_upper = true;
    } else if (e.key == "count") {
      const long long c = read(e, t.name, [](const toml::Value& v) { return v.as_integer(); });
      if (c < 3) fail(e, t.name, "dimension '" + dim + "' needs count >= 3, got " + std::to_string(c));
      a.count = static_cast<std::size_t>(c);
      have_count = true;
    } else if (e.key == "periodic") {
      a.periodic = boolean(e, t.name);
    } else {
      fail(e, t.name, "unknown key");
    }
  }
  if (!have_lower) throw ScenarioError(t.line, t.name + ".lower", "missing");
  if (!have_upper) throw ScenarioError(t.line, t.name + ".upper", "missing");
  if (!have_count) throw ScenarioError(t.line, t.name + ".count", "missing");
  if (!(a.lower < a.upper)) {
    throw ScenarioError(t.line, t.name, "dimension '" + dim + "' needs lower < upper");
  }
  return a;
}

void read_car(const Table& t, CarParams& car, BodyDims& body) {
  for (const Entry& e : t.entries) {
    const double v = number(e, t.name);
    if (e.key == "wheelbase_m") car.wheelbase_m = v;
    else if (e.key == "length_m") body.length_m = v;
    else if (e.key == "width_m") body.width_m = v;
    else if (e.key == "a_min_mps2") car.accel.lo = v;
    else if (e.key == "a_max_mps2") car.accel.hi = v;
    else if (e.key == "delta_min_rad") car.steer.lo = v;
    else if (e.key == "delta_max_rad") car.steer.hi = v;
    else if (e.key == "v_min_mps") car.velocity.lo = v;
    else if (e.key == "v_max_mps") car.velocity.hi = v;
    else fail(e, t.name, "unknown key");
  }
  if (!(body.length_m > 0.0 && body.width_m > 0.0)) {
    throw ScenarioError(t.line, t.name, "body length and width must be > 0");
  }
  try {
    car.validate();
  } catch (const ConfigError& err) {
    throw ScenarioError(t.line, t.name + "." + err.field(), err.what());
  }
}

// Keys of [concept] accepted for each kind, beyond `kind` itself.
std::set<std::string> concept_keys(ConceptKind kind) {
  static const std::set<std::string> overrides{"a_accel_scale", "a_steer_scale", "b_accel_scale",
                                               "b_steer_scale", "scaling",       "gamma",
                                               "shape_margins_m"};
  static const std::map<ConceptKind, std::set<std::string>> extra{
      {ConceptKind::WorstCase, {}},
      {ConceptKind::Frs, {}},
      {ConceptKind::Custom, {"role_a", "role_b", "second"}},
      {ConceptKind::Sff, {"b_hard_mps2", "b_soft_mps2", "steer_fraction", "shape_margins_m"}},
      {ConceptKind::Rss, {"b_a_mps2", "b_b_mps2", "lat_b_mps2"}},
      {ConceptKind::Contingency, {"v_stop_mps", "b_model", "b_brake_mps2"}},
      {ConceptKind::ConstantMotion, {"steer_a_rad", "steer_b_rad", "augment", "shape_margins_m"}},
  };
  std::set<std::string> keys = extra.at(kind);
  const bool uses_overrides = kind == ConceptKind::WorstCase || kind == ConceptKind::Frs ||
                              kind == ConceptKind::Custom || kind == ConceptKind::Contingency;
  if (uses_overrides) keys.insert(overrides.begin(), overrides.end());
  return keys;
}

SafetyConceptSpec read_concept(const Table& t) {
  const Entry* k = t.find("kind");
  if (!k) throw ScenarioError(t.line, "concept.kind", "missing");
  ConceptKind kind;
  try {
    kind = concept_kind_from_string(text(*k, t.name));
  } catch (const ConfigError&) {
    fail(*k, t.name, "unknown safety concept '" + k->value.as_string() + "'");
  }
  SafetyConceptSpec s = SafetyConceptSpec::preset(kind);
  const auto allowed = concept_keys(kind);
  GameConfig game = s.game.value_or(GameConfig{});
  for (const Entry& e : t.entries) {
    if (e.key == "kind") continue;
    if (!allowed.count(e.key)) {
      fail(e, t.name, "unknown key for concept kind '" + std::string(to_string(kind)) + "'");
    }
    if (e.key == "a_accel_scale") s.controls.a_accel_scale = number(e, t.name);
    else if (e.key == "a_steer_scale") s.controls.a_steer_scale = number(e, t.name);
    else if (e.key == "b_accel_scale") s.controls.b_accel_scale = number(e, t.name);
    else if (e.key == "b_steer_scale") s.controls.b_steer_scale = number(e, t.name);
    else if (e.key == "scaling") {
      const std::string m = text(e, t.name);
      if (m == "none") s.controls.scaling = ScalingMode::None;
      else if (m == "state_dependent") s.controls.scaling = ScalingMode::StateDependent;
      else fail(e, t.name, "expected \"none\" or \"state_dependent\"");
    } else if (e.key == "gamma") s.controls.gamma = number(e, t.name);
    else if (e.key == "shape_margins_m") {
      auto m = read(e, t.name, [](const toml::Value& v) { return v.as_number_array(); });
      try {
        s.shape = SeverityShape(std::move(m));
      } catch (const std::exception& err) {
        fail(e, t.name, err.what());
      }
    } else if (e.key == "role_a") game.role_a = role_from(e, t.name);
    else if (e.key == "role_b") game.role_b = role_from(e, t.name);
    else if (e.key == "second") {
      const std::string a = text(e, t.name);
      if (a == "a") game.second = Agent::A;
      else if (a == "b") game.second = Agent::B;
      else fail(e, t.name, "expected \"a\" or \"b\"");
    } else if (e.key == "b_hard_mps2") s.sff.b_hard_mps2 = number(e, t.name);
    else if (e.key == "b_soft_mps2") s.sff.b_soft_mps2 = number(e, t.name);
    else if (e.key == "steer_fraction") s.sff.steer_fraction = number(e, t.name);
    else if (e.key == "b_a_mps2") s.rss.b_a_mps2 = number(e, t.name);
    else if (e.key == "b_b_mps2") s.rss.b_b_mps2 = number(e, t.name);
    else if (e.key == "lat_b_mps2") s.rss.lat_b_mps2 = number(e, t.name);
    else if (e.key == "v_stop_mps") s.contingency.v_stop_mps = number(e, t.name);
    else if (e.key == "b_model") {
      try {
        s.contingency.b_model = behavior_model_from_string(text(e, t.name));
      } catch (const ConfigError&) {
        fail(e, t.name, "expected \"maintain\", \"brake\" or \"adversarial\"");
      }
    } else if (e.key == "b_brake_mps2") s.contingency.b_brake_mps2 = number(e, t.name);
    else if (e.key == "steer_a_rad") s.constant_motion.steer_a_rad = number(e, t.name);
    else if (e.key == "steer_b_rad") s.constant_motion.steer_b_rad = number(e, t.name);
    else if (e.key == "augment") s.constant_motion.augment = boolean(e, t.name);
  }
  if (kind == ConceptKind::Custom) s.game = game;
  return s;
}

std::vector<GridDim> collect_grid(const std::map<std::string, const Table*>& tables,
                                  const std::string& prefix, const std::vector<std::string>& names,
                                  std::size_t fallback_line) {
  std::vector<GridDim> out;
  for (const std::string& n : names) {
    auto it = tables.find(n);
    if (it == tables.end()) {
      throw ScenarioError(fallback_line, prefix + "." + n, "missing grid dimension '" + n + "'");
    }
    out.push_back({n, read_axis(*it->second, n)});
  }
  for (const auto& [n, t] : tables) {
    if (std::find(names.begin(), names.end(), n) == names.end()) {
      throw ScenarioError(t->line, t->name, "unknown grid dimension '" + n + "'");
    }
  }
  return out;
}

void write_axis(std::ostringstream& os, const std::string& section, const Axis& a) {
  os << "[" << section << "]\n";
  os << "lower = " << toml::format_number(a.lower) << "\n";
  os << "upper = " << toml::format_number(a.upper) << "\n";
  os << "count = " << a.count << "\n";
  os << "periodic = " << (a.periodic ? "true" : "false") << "\n\n";
}

void write_car(std::ostringstream& os, const char* section, const CarParams& c, const BodyDims& b) {
  auto num = [&](const char* k, double v) { os << k << " = " << toml::format_number(v) << "\n"; };
  os << "[" << section << "]\n";
  num("wheelbase_m", c.wheelbase_m);
  num("length_m", b.length_m);
  num("width_m", b.width_m);
  num("a_min_mps2", c.accel.lo);
  num("a_max_mps2", c.accel.hi);
  num("delta_min_rad", c.steer.lo);
  num("delta_max_rad", c.steer.hi);
  num("v_min_mps", c.velocity.lo);
  num("v_max_mps", c.velocity.hi);
  os << "\n";
}

}  // namespace

ScenarioError::ScenarioError(std::size_t line, std::string key, const std::string& message)
    : std::runtime_error(where(line, key) + message), line_(line), key_(std::move(key)) {}

std::string_view to_string(Model m) { return m == Model::Braking ? "braking" : "relative_cars"; }

std::string_view to_string(Integrator i) { return i == Integrator::Euler ? "euler" : "tvd_rk2"; }

std::vector<std::string> expected_dims(Model model, const SafetyConceptSpec& spec) {
  if (model == Model::Braking) return {"gap_m", "v_mps"};
  if (spec.kind == ConceptKind::Rss) return {"gap_m", "va_mps", "vb_mps"};
  std::vector<std::string> d{"dx_m", "dy_m", "dtheta_rad", "va_mps", "vb_mps"};
  if (spec.kind == ConceptKind::ConstantMotion && spec.constant_motion.augment) {
    d.push_back("steer_a_rad");
    d.push_back("steer_b_rad");
  }
  return d;
}

ScenarioFile parse_scenario(std::string_view text_in) {
  toml::Document doc;
  try {
    doc = toml::parse(text_in);
  } catch (const toml::ParseError& e) {
    std::string msg = e.what();
    throw ScenarioError(e.line(), "", msg.substr(msg.find(": ") + 2));
  }
  ScenarioFile s;
  std::map<std::string, const Table*> grid_tables, lateral_tables;
  const Table* concept_table = nullptr;
  const Table* braking_table = nullptr;
  const Table* car_tables[2] = {nullptr, nullptr};
  std::size_t scenario_line = 0;

  for (const Table& t : doc.tables) {
    if (t.name.empty()) {
      if (!t.entries.empty()) {
        throw ScenarioError(t.entries.front().value.line, t.entries.front().key,
                            "key outside of any section");
      }
      continue;
    }
    if (t.name.rfind("grid.", 0) == 0) {
      grid_tables[t.name.substr(5)] = &t;
    } else if (t.name.rfind("lateral_grid.", 0) == 0) {
      lateral_tables[t.name.substr(13)] = &t;
    } else if (t.name == "scenario") {
      scenario_line = t.line;
      for (const Entry& e : t.entries) {
        if (e.key == "name") {
          s.name = text(e, t.name);
        } else if (e.key == "model") {
          const std::string m = text(e, t.name);
          if (m == "relative_cars") s.model = Model::RelativeCars;
          else if (m == "braking") s.model = Model::Braking;
          else fail(e, t.name, "expected \"relative_cars\" or \"braking\"");
        } else {
          fail(e, t.name, "unknown key");
        }
      }
    } else if (t.name == "car_a") {
      car_tables[0] = &t;
    } else if (t.name == "car_b") {
      car_tables[1] = &t;
    } else if (t.name == "concept") {
      concept_table = &t;
    } else if (t.name == "braking") {
      braking_table = &t;
    } else if (t.name == "solve") {
      for (const Entry& e : t.entries) {
        if (e.key == "horizon_s") s.solve.horizon_s = number(e, t.name);
        else if (e.key == "cfl") s.solve.cfl = number(e, t.name);
        else if (e.key == "convergence_tol") s.solve.convergence_tol = number(e, t.name);
        else if (e.key == "integrator") {
          const std::string i = text(e, t.name);
          if (i == "euler") s.solve.integrator = Integrator::Euler;
          else if (i == "tvd_rk2") s.solve.integrator = Integrator::TvdRk2;
          else fail(e, t.name, "expected \"euler\" or \"tvd_rk2\"");
        } else {
          fail(e, t.name, "unknown key");
        }
      }
      try {
        s.solve.validate();
      } catch (const ConfigError& err) {
        const Entry* e = t.find(err.field());
        throw ScenarioError(e ? e->value.line : t.line, "solve." + err.field(), err.what());
      }
    } else if (t.name == "output") {
      for (const Entry& e : t.entries) {
        if (e.key == "snapshot_stride") {
          const long long k = read(e, t.name, [](const toml::Value& v) { return v.as_integer(); });
          if (k < 1) fail(e, t.name, "must be >= 1");
          s.solve.snapshot_stride = static_cast<std::size_t>(k);
        } else {
          fail(e, t.name, "unknown key");
        }
      }
    } else {
      throw ScenarioError(t.line, t.name, "unknown section");
    }
  }

  if (s.model == Model::Braking) {
    if (concept_table) throw ScenarioError(concept_table->line, "concept", "not used by the braking model");
    for (const Table* c : car_tables) {
      if (c) throw ScenarioError(c->line, c->name, "not used by the braking model");
    }
    if (braking_table) {
      for (const Entry& e : braking_table->entries) {
        if (e.key != "decel_mps2") fail(e, braking_table->name, "unknown key");
        s.braking_decel_mps2 = number(e, braking_table->name);
        if (!(s.braking_decel_mps2 > 0.0)) fail(e, braking_table->name, "must be > 0");
      }
    }
  } else {
    if (braking_table) {
      throw ScenarioError(braking_table->line, "braking", "only used by the braking model");
    }
    if (car_tables[0]) read_car(*car_tables[0], s.car_a, s.body_a);
    if (car_tables[1]) read_car(*car_tables[1], s.car_b, s.body_b);
    if (concept_table) s.concept_spec = read_concept(*concept_table);
  }

  s.grid = collect_grid(grid_tables, "grid", expected_dims(s.model, s.concept_spec), scenario_line);
  if (s.model == Model::RelativeCars && s.concept_spec.kind == ConceptKind::Rss) {
    if (!lateral_tables.empty()) {
      const auto lat = collect_grid(lateral_tables, "lateral_grid", {"gap_m", "wa_mps", "wb_mps"},
                                    concept_table ? concept_table->line : 0);
      std::vector<Axis> axes;
      for (const GridDim& d : lat) axes.push_back(d.axis);
      s.concept_spec.rss.lateral_grid = axes;
    }
  } else if (!lateral_tables.empty()) {
    const Table* t = lateral_tables.begin()->second;
    throw ScenarioError(t->line, t->name, "only used by the rss concept");
  }
  return s;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(0, "", "cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize(const ScenarioFile& s) {
  std::ostringstream os;
  auto num = [&](const char* k, double v) { os << k << " = " << toml::format_number(v) << "\n"; };
  os << "[scenario]\n";
  if (!s.name.empty()) os << "name = " << toml::quote(s.name) << "\n";
  os << "model = " << toml::quote(to_string(s.model)) << "\n\n";
  for (const GridDim& d : s.grid) write_axis(os, "grid." + d.name, d.axis);
  if (s.model == Model::Braking) {
    os << "[braking]\n";
    num("decel_mps2", s.braking_decel_mps2);
    os << "\n";
  } else {
    write_car(os, "car_a", s.car_a, s.body_a);
    write_car(os, "car_b", s.car_b, s.body_b);
    const SafetyConceptSpec& c = s.concept_spec;
    const auto allowed = concept_keys(c.kind);
    os << "[concept]\n";
    os << "kind = " << toml::quote(to_string(c.kind)) << "\n";
    if (allowed.count("a_accel_scale")) {
      num("a_accel_scale", c.controls.a_accel_scale);
      num("a_steer_scale", c.controls.a_steer_scale);
      num("b_accel_scale", c.controls.b_accel_scale);
      num("b_steer_scale", c.controls.b_steer_scale);
      os << "scaling = "
         << toml::quote(c.controls.scaling == ScalingMode::None ? "none" : "state_dependent") << "\n";
      num("gamma", c.controls.gamma);
    }
    if (c.shape && allowed.count("shape_margins_m")) {
      os << "shape_margins_m = [";
      const auto& m = c.shape->samples();
      for (std::size_t i = 0; i < m.size(); ++i) {
        os << (i ? ", " : "") << toml::format_number(m[i]);
      }
      os << "]\n";
    }
    auto opt = [&](const char* k, const std::optional<double>& v) {
      if (v) num(k, *v);
    };
    switch (c.kind) {
      case ConceptKind::Custom: {
        const GameConfig g = c.game.value_or(GameConfig{});
        os << "role_a = " << toml::quote(role_name(g.role_a)) << "\n";
        os << "role_b = " << toml::quote(role_name(g.role_b)) << "\n";
        os << "second = " << toml::quote(g.second == Agent::A ? "a" : "b") << "\n";
        break;
      }
      case ConceptKind::Sff:
        opt("b_hard_mps2", c.sff.b_hard_mps2);
        opt("b_soft_mps2", c.sff.b_soft_mps2);
        opt("steer_fraction", c.sff.steer_fraction);
        break;
      case ConceptKind::Rss:
        opt("b_a_mps2", c.rss.b_a_mps2);
        opt("b_b_mps2", c.rss.b_b_mps2);
        opt("lat_b_mps2", c.rss.lat_b_mps2);
        break;
      case ConceptKind::Contingency:
        opt("v_stop_mps", c.contingency.v_stop_mps);
        if (c.contingency.b_model) {
          os << "b_model = " << toml::quote(to_string(*c.contingency.b_model)) << "\n";
        }
        opt("b_brake_mps2", c.contingency.b_brake_mps2);
        break;
      case ConceptKind::ConstantMotion:
        opt("steer_a_rad", c.constant_motion.steer_a_rad);
        opt("steer_b_rad", c.constant_motion.steer_b_rad);
        os << "augment = " << (c.constant_motion.augment ? "true" : "false") << "\n";
        break;
      default:
        break;
    }
    os << "\n";
    if (c.kind == ConceptKind::Rss && c.rss.lateral_grid) {
      const char* names[3] = {"gap_m", "wa_mps", "wb_mps"};
      for (std::size_t i = 0; i < 3 && i < c.rss.lateral_grid->size(); ++i) {
        write_axis(os, std::string("lateral_grid.") + names[i], (*c.rss.lateral_grid)[i]);
      }
    }
  }
  os << "[solve]\n";
  num("horizon_s", s.solve.horizon_s);
  num("cfl", s.solve.cfl);
  os << "integrator = " << toml::quote(to_string(s.solve.integrator)) << "\n";
  if (s.solve.convergence_tol) num("convergence_tol", *s.solve.convergence_tol);
  os << "\n[output]\nsnapshot_stride = " << s.solve.snapshot_stride << "\n";
  return os.str();
}

GridSpec grid_of(const ScenarioFile& s) {
  std::vector<Axis> axes;
  for (const GridDim& d : s.grid) axes.push_back(d.axis);
  return GridSpec(std::move(axes));
}

Scenario to_scenario(const ScenarioFile& s) {
  return Scenario{grid_of(s), s.car_a, s.car_b, s.body_a, s.body_b, s.solve};
}

ConceptProblem build_problem(const ScenarioFile& s) {
  if (s.model == Model::RelativeCars) return build(s.concept_spec, to_scenario(s));
  s.solve.validate();
  const GridSpec grid = grid_of(s);
  const Axis& v = grid.axis(1);
  const double a = s.braking_decel_mps2;
  auto dyn = std::make_shared<GapDynamics>(-1.0, 0.0, SpeedChannel{{-a, a}, {v.lower, v.upper}},
                                           SpeedChannel{}, GameConfig{Role::Max, Role::Min, Agent::B},
                                           0.0);
  auto ell = [](std::span<const double> x) { return x[0]; };
  ConceptProblem p{ConceptKind::Custom, {}, true};
  ConceptSolve cs{"main", dyn, sample_field(grid, ell), std::nullopt, s.solve, ell};
  cs.config.mode = SolveMode::Tube;
  p.solves.push_back(std::move(cs));
  return p;
}

}  // namespace hjreach::cli
