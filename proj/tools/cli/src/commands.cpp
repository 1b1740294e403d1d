#include "hjreach_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hjreach/error.hpp"
#include "hjreach/field_io.hpp"
#include "hjreach/parallel.hpp"
#include "hjreach_cli/digest.hpp"
#include "hjreach_cli/slice.hpp"
#include "hjreach_cli/toml.hpp"

namespace hjreach::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + p.string());
  out << text;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot read " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(p.string() + ": " + e.what());
  }
}

std::vector<std::string> dims_for(const ScenarioFile& s, const std::string& label) {
  if (label == "lateral") return {"gap_m", "wa_mps", "wb_mps"};
  return expected_dims(s.model, s.concept_spec);
}

json control_json(const AgentControl& u) { return {{"accel", u.accel}, {"steer", u.steer}}; }

std::ofstream open_csv(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + p.string());
  return out;
}

}  // namespace

std::vector<SolveRecord> solve_scenario(const ScenarioFile& s, const fs::path& out_dir,
                                        std::ostream* log) {
  const ConceptProblem problem = build_problem(s);
  const std::string canonical = serialize(s);
  fs::create_directories(out_dir);
  write_text(out_dir / "scenario.toml", canonical);
  const bool nested = problem.solves.size() > 1;
  std::vector<SolveRecord> records;
  for (const ConceptSolve& cs : problem.solves) {
    const fs::path dir = nested ? out_dir / cs.label : out_dir;
    if (log) *log << "solving " << cs.label << " on " << cs.ell.size() << " nodes" << std::endl;
    const auto t0 = std::chrono::steady_clock::now();
    SolveInfo info;
    const ValueFunction vf = cs.avoid ? solve_reach_avoid(cs.ell, *cs.avoid, *cs.dynamics, cs.config, &info)
                                      : solve_tube(cs.ell, *cs.dynamics, cs.config, &info);
    const double wall = seconds_since(t0);
    write_value_function(dir, vf);
    if (nested) write_text(dir / "scenario.toml", canonical);
    SolveRecord r{cs.label, dir, info, wall, dump_hash(dir)};
    json run;
    run["label"] = cs.label;
    run["model"] = std::string(to_string(s.model));
    run["concept"] = std::string(to_string(problem.kind));
    run["mode"] = cs.config.mode == SolveMode::Tube ? "tube" : "reach_avoid";
    run["unsafe_when"] = problem.unsafe_when_negative ? "negative" : "nonnegative";
    run["scheme"] = "lax_friedrichs_first_order";
    run["integrator"] = std::string(to_string(cs.config.integrator));
    run["cfl"] = cs.config.cfl;
    run["dt_s"] = info.dt;
    run["steps"] = info.steps;
    run["horizon_s"] = cs.config.horizon_s;
    run["final_time_s"] = info.final_time;
    run["converged"] = info.converged;
    run["threads"] = thread_count();
    run["wall_time_s"] = wall;
    run["content_hash"] = r.content_hash;
    write_text(dir / "run.json", run.dump(2) + "\n");
    if (log) {
      *log << "  " << info.steps << " steps of " << info.dt << " s in " << wall << " s"
           << (info.converged ? " (converged)" : "") << ", " << r.content_hash << std::endl;
    }
    records.push_back(std::move(r));
  }
  if (nested) {
    json top;
    top["concept"] = std::string(to_string(problem.kind));
    json parts = json::array();
    for (const SolveRecord& r : records) {
      parts.push_back({{"label", r.label}, {"dir", r.label}, {"content_hash", r.content_hash}});
    }
    top["solves"] = parts;
    write_text(out_dir / "run.json", top.dump(2) + "\n");
  }
  return records;
}

LoadedDump load_dump(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) {
    throw UsageError(dir.string() + " is not a value-function dump (no manifest.json)");
  }
  LoadedDump d;
  d.vf = read_value_function(dir);
  const fs::path scen = dir / "scenario.toml";
  if (!fs::exists(scen)) throw UsageError("no scenario.toml next to " + dir.string());
  d.scenario = load_scenario(scen);
  d.label = "main";
  if (fs::exists(dir / "run.json")) {
    const json run = read_json(dir / "run.json");
    d.label = run.value("label", std::string("main"));
    d.unsafe_when_negative = run.value("unsafe_when", std::string("negative")) == "negative";
  }
  d.dim_names = dims_for(d.scenario, d.label);
  const ConceptProblem p = build_problem(d.scenario);
  for (const ConceptSolve& cs : p.solves) {
    if (cs.label == d.label) d.dynamics = cs.dynamics;
  }
  if (!d.dynamics) throw UsageError("dump label '" + d.label + "' not produced by its scenario");
  if (d.dynamics->state_dim() != d.vf.grid.ndim()) {
    throw UsageError("dump grid does not match its scenario");
  }
  return d;
}

Mask unsafe_mask(const LoadedDump& d, double t) {
  Mask m = unsafe_set(d.vf, t);
  if (!d.unsafe_when_negative) {
    for (auto& x : m) x = x ? 0 : 1;
  }
  return m;
}

void cmd_query(const fs::path& dir, const QueryRequest& q, std::ostream& out) {
  const LoadedDump d = load_dump(dir);
  const SafetyQueryResult r = value_at(d.vf, q.state, q.time);
  const ControlPair u = optimal_pair(d.vf, *d.dynamics, q.state, q.time);
  const bool in_unsafe = d.unsafe_when_negative ? r.value < 0.0 : r.value >= 0.0;
  json j;
  j["state"] = q.state;
  j["time_s"] = q.time;
  j["value"] = r.value;
  j["unsafe"] = r.unsafe;
  j["in_unsafe_set"] = in_unsafe;
  j["out_of_bounds"] = r.out_of_bounds;
  j["gradient"] = r.gradient;
  j["dvdt"] = r.dvdt;
  j["u_a_star"] = control_json(u.a);
  j["u_b_star"] = control_json(u.b);
  if (q.ub) {
    const PreservingSet set = safety_preserving_set(d.vf, *d.dynamics, q.state, q.time, *q.ub);
    json slabs = json::array();
    for (const PreservingSlab& s : set.slabs) {
      json e;
      e["steer"] = s.steer;
      e["empty"] = s.empty;
      if (!s.empty) {
        e["accel_min"] = s.accel.lo;
        e["accel_max"] = s.accel.hi;
      }
      slabs.push_back(e);
    }
    j["preserving_set"] = {{"u_b", control_json(*q.ub)}, {"empty", set.empty()}, {"slabs", slabs}};
  }
  if (q.json) {
    out << j.dump(2) << "\n";
    return;
  }
  auto vec = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + toml::format_number(v[i]);
    return s;
  };
  out << "value: " << toml::format_number(r.value) << "\n";
  out << "unsafe: " << (r.unsafe ? "true" : "false") << "\n";
  out << "in_unsafe_set: " << (in_unsafe ? "true" : "false") << "\n";
  out << "out_of_bounds: " << (r.out_of_bounds ? "true" : "false") << "\n";
  out << "gradient: " << vec(r.gradient) << "\n";
  out << "dvdt: " << toml::format_number(r.dvdt) << "\n";
  out << "u_a_star: " << u.a.accel << " " << u.a.steer << "\n";
  out << "u_b_star: " << u.b.accel << " " << u.b.steer << "\n";
  if (q.ub) {
    const auto& ps = j["preserving_set"];
    out << "preserving_set: " << (ps["empty"].get<bool>() ? "empty" : "nonempty") << "\n";
    for (const auto& s : ps["slabs"]) {
      out << "  steer " << s["steer"].get<double>() << ": ";
      if (s["empty"].get<bool>()) {
        out << "none\n";
      } else {
        out << "[" << s["accel_min"].get<double>() << ", " << s["accel_max"].get<double>() << "]\n";
      }
    }
  }
}

void cmd_slice(const fs::path& dir, double t, const Fixes& fixes, const fs::path& csv) {
  const LoadedDump d = load_dump(dir);
  const SlicePlane plane = make_plane(d.vf.grid, d.dim_names, fixes);
  const Field2D f = slice(d.vf, t, plane);
  auto out = open_csv(csv);
  write_slice_csv(out, f, d.dim_names[plane.dim_x], d.dim_names[plane.dim_y]);
}

void cmd_contour(const fs::path& dir, double t, const Fixes& fixes, double level,
                 const fs::path& csv) {
  const LoadedDump d = load_dump(dir);
  const SlicePlane plane = make_plane(d.vf.grid, d.dim_names, fixes);
  const Field2D f = slice(d.vf, t, plane);
  auto out = open_csv(csv);
  write_contour_csv(out, marching_squares(f, level), d.dim_names[plane.dim_x],
                    d.dim_names[plane.dim_y]);
}

SetComparison cmd_compare(const fs::path& a, const fs::path& b, double t, std::ostream& out) {
  const LoadedDump da = load_dump(a);
  const LoadedDump db = load_dump(b);
  if (!(da.vf.grid == db.vf.grid)) throw UsageError("dumps are on different grids");
  const SetComparison c = compare_sets(da.vf.grid, unsafe_mask(da, t), unsafe_mask(db, t));
  out << to_json(c, t) << "\n";
  return c;
}

ScenarioFile demo_base_scenario(const DemoOptions& o) {
  constexpr double pi = std::numbers::pi;
  ScenarioFile s;
  s.name = "highway";
  s.model = Model::RelativeCars;
  s.grid = {{"dx_m", {-30.0, 30.0, o.counts[0], false}},
            {"dy_m", {-12.0, 12.0, o.counts[1], false}},
            {"dtheta_rad", {-pi, pi, o.counts[2], true}},
            {"va_mps", {0.0, 15.0, o.counts[3], false}},
            {"vb_mps", {0.0, 15.0, o.counts[4], false}}};
  s.concept_spec = SafetyConceptSpec::preset(ConceptKind::WorstCase);
  s.solve.horizon_s = o.horizon_s;
  s.solve.integrator = o.integrator;
  s.solve.snapshot_stride = o.snapshot_stride;
  return s;
}

DemoResult run_demo(const std::string& name, const fs::path& out_dir, const DemoOptions& o,
                    std::ostream* log) {
  struct Case {
    std::string name, description;
    ScenarioFile scenario;
  };
  std::vector<Case> cases;
  std::vector<std::pair<std::string, std::string>> pairs;
  const ScenarioFile base = demo_base_scenario(o);
  if (name == "fig2a") {
    Case equal{"equal", "both agents use the full control limits", base};
    Case b_reduced{"b_reduced", "B's acceleration and steering intervals scaled by 0.5", base};
    b_reduced.scenario.concept_spec.controls.b_accel_scale = 0.5;
    b_reduced.scenario.concept_spec.controls.b_steer_scale = 0.5;
    Case resp{"responsibility", "B scaled by 0.5 and A's top speed lowered to 10 m/s",
              b_reduced.scenario};
    resp.scenario.car_a.velocity.hi = 10.0;
    cases = {equal, b_reduced, resp};
    pairs = {{"equal", "b_reduced"}, {"equal", "responsibility"}};
  } else if (name == "fig2b") {
    Case fixed{"fixed", "velocity-independent control limits", base};
    Case dep{"state_dependent", "steering shrinks and acceleration grows with speed, gamma 0.2", base};
    dep.scenario.concept_spec.controls.scaling = ScalingMode::StateDependent;
    dep.scenario.concept_spec.controls.gamma = 0.2;
    cases = {fixed, dep};
    pairs = {{"fixed", "state_dependent"}};
  } else {
    throw UsageError("unknown demo '" + name + "' (expected fig2a or fig2b)");
  }

  const auto t0 = std::chrono::steady_clock::now();
  DemoResult result;
  result.name = name;
  fs::create_directories(out_dir);
  const double t_final = -o.horizon_s;
  // Exported plane: aligned headings, both cars at the middle speed node.
  const GridSpec grid = grid_of(base);
  const double va = grid.axis(3).coordinate((grid.axis(3).count - 1) / 2);
  const double vb = grid.axis(4).coordinate((grid.axis(4).count - 1) / 2);
  const Fixes fixes{{"dtheta_rad", 0.0}, {"va_mps", va}, {"vb_mps", vb}};

  std::map<std::string, LoadedDump> dumps;
  std::map<std::string, Field2D> planes;
  json jcases = json::array();
  for (const Case& c : cases) {
    if (log) *log << "[" << name << "] case " << c.name << ": " << c.description << std::endl;
    const fs::path dir = out_dir / c.name;
    auto recs = solve_scenario(c.scenario, dir, log);
    result.solves.push_back(recs.front());
    LoadedDump d = load_dump(dir);
    const SlicePlane plane = make_plane(d.vf.grid, d.dim_names, fixes);
    const Field2D f = slice(d.vf, t_final, plane);
    {
      auto out = open_csv(out_dir / ("slice_" + c.name + ".csv"));
      write_slice_csv(out, f, "dx_m", "dy_m");
      auto cout = open_csv(out_dir / ("contour_" + c.name + ".csv"));
      write_contour_csv(cout, marching_squares(f, 0.0), "dx_m", "dy_m");
    }
    jcases.push_back({{"name", c.name},
                      {"description", c.description},
                      {"dir", c.name},
                      {"steps", recs.front().info.steps},
                      {"wall_time_s", recs.front().wall_s},
                      {"content_hash", recs.front().content_hash}});
    planes.emplace(c.name, f);
    dumps.emplace(c.name, std::move(d));
  }

  json jcomp = json::array();
  for (const auto& [a, b] : pairs) {
    const LoadedDump& da = dumps.at(a);
    const LoadedDump& db = dumps.at(b);
    DemoComparison dc{a, b, compare_sets(da.vf.grid, unsafe_mask(da, t_final), unsafe_mask(db, t_final)),
                      {}};
    const Field2D& fa = planes.at(a);
    const Field2D& fb = planes.at(b);
    const GridSpec pg({fa.x, fa.y});
    Mask ma(fa.values.size()), mb(fb.values.size());
    for (std::size_t k = 0; k < ma.size(); ++k) {
      ma[k] = fa.values[k] < 0.0;
      mb[k] = fb.values[k] < 0.0;
    }
    dc.plane = compare_sets(pg, ma, mb);
    write_text(out_dir / ("compare_" + a + "_vs_" + b + ".json"), to_json(dc.full, t_final) + "\n");
    jcomp.push_back({{"a", a},
                     {"b", b},
                     {"file", "compare_" + a + "_vs_" + b + ".json"},
                     {"full", json::parse(to_json(dc.full, t_final))},
                     {"plane", json::parse(to_json(dc.plane, t_final))}});
    if (log) {
      *log << "[" << name << "] " << a << " vs " << b << ": |A|=" << dc.full.count_a
           << " |B|=" << dc.full.count_b << " A\\B=" << dc.full.a_minus_b
           << " B\\A=" << dc.full.b_minus_a << std::endl;
    }
    result.comparisons.push_back(dc);
  }
  result.wall_s = seconds_since(t0);

  json demo;
  demo["demo"] = name;
  demo["horizon_s"] = o.horizon_s;
  demo["time_s"] = t_final;
  demo["grid"] = json::parse(grid_header_json(grid));
  demo["slice_plane"] = {{"free", {"dx_m", "dy_m"}},
                         {"fixed", {{"dtheta_rad", 0.0}, {"va_mps", va}, {"vb_mps", vb}}}};
  demo["threads"] = thread_count();
  demo["cases"] = jcases;
  demo["comparisons"] = jcomp;
  demo["wall_time_s"] = result.wall_s;
  write_text(out_dir / "demo.json", demo.dump(2) + "\n");
  return result;
}

}  // namespace hjreach::cli
