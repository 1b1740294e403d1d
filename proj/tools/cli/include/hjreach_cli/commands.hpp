#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hjreach/runtime.hpp"
#include "hjreach_cli/compare.hpp"
#include "hjreach_cli/scenario_file.hpp"

namespace hjreach::cli {

struct SolveRecord {
  std::string label;
  std::filesystem::path dir;
  SolveInfo info;
  double wall_s = 0.0;
  std::string content_hash;
};

// Solves every value function of the scenario. A single solve is dumped
// directly into out_dir; multi-solve concepts get one subdirectory per solve.
// Each dump directory also receives run.json and the canonical scenario.toml.
std::vector<SolveRecord> solve_scenario(const ScenarioFile& s, const std::filesystem::path& out_dir,
                                        std::ostream* log = nullptr);

// A dump together with the scenario that produced it.
struct LoadedDump {
  ValueFunction vf;
  ScenarioFile scenario;
  std::string label;
  bool unsafe_when_negative = true;
  std::vector<std::string> dim_names;
  DynamicsPtr dynamics;
};

LoadedDump load_dump(const std::filesystem::path& dir);

// Node mask of the concept's unsafe set at the snapshot nearest t.
Mask unsafe_mask(const LoadedDump& d, double t);

struct QueryRequest {
  std::vector<double> state;
  double time = 0.0;
  std::optional<AgentControl> ub;
  bool json = false;
};

void cmd_query(const std::filesystem::path& dir, const QueryRequest& q, std::ostream& out);

using Fixes = std::vector<std::pair<std::string, double>>;

void cmd_slice(const std::filesystem::path& dir, double t, const Fixes& fixes,
               const std::filesystem::path& csv);
void cmd_contour(const std::filesystem::path& dir, double t, const Fixes& fixes, double level,
                 const std::filesystem::path& csv);
SetComparison cmd_compare(const std::filesystem::path& a, const std::filesystem::path& b, double t,
                          std::ostream& out);

struct DemoOptions {
  std::array<std::size_t, 5> counts{61, 49, 25, 11, 11};
  double horizon_s = 3.0;
  Integrator integrator = Integrator::TvdRk2;
  std::size_t snapshot_stride = 150;
};

struct DemoComparison {
  std::string a, b;
  SetComparison full;   // whole grid at t = -T
  SetComparison plane;  // exported slice plane at t = -T
};

struct DemoResult {
  std::string name;
  std::vector<SolveRecord> solves;
  std::vector<DemoComparison> comparisons;
  double wall_s = 0.0;
};

// Relative-car worst-case scenario on the default highway grid.
ScenarioFile demo_base_scenario(const DemoOptions& o);

// fig2a: equal limits vs. reduced authority of B (and A's lower top speed);
// fig2b: fixed vs. state-dependent control limits.
DemoResult run_demo(const std::string& name, const std::filesystem::path& out_dir,
                    const DemoOptions& o, std::ostream* log = nullptr);

}  // namespace hjreach::cli
