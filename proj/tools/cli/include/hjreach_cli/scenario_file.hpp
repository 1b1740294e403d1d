#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hjreach/concepts.hpp"

namespace hjreach::cli {

enum class Model { RelativeCars, Braking };

struct GridDim {
  std::string name;
  Axis axis;
};

// Declarative description of one solve, as read from a scenario file.
struct ScenarioFile {
  std::string name;
  Model model = Model::RelativeCars;
  std::vector<GridDim> grid;  // in the order expected by the model
  CarParams car_a, car_b;
  BodyDims body_a, body_b;
  SafetyConceptSpec concept_spec = SafetyConceptSpec::preset(ConceptKind::WorstCase);
  double braking_decel_mps2 = 5.0;  // braking model: |a| <= decel
  SolveConfig solve;
};

// Schema violation. line is 0 when the problem is not tied to one line
// (e.g. a missing section).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::size_t line, std::string key, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

// Grid dimension names the scenario's model/concept expects, in order.
std::vector<std::string> expected_dims(Model model, const SafetyConceptSpec& spec);

ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::filesystem::path& path);
// Canonical text form; parse_scenario(serialize(s)) reproduces s.
std::string serialize(const ScenarioFile& s);

GridSpec grid_of(const ScenarioFile& s);
Scenario to_scenario(const ScenarioFile& s);
// Solver inputs for the scenario. Throws ConfigError for incomplete concepts.
ConceptProblem build_problem(const ScenarioFile& s);

std::string_view to_string(Model m);
std::string_view to_string(Integrator i);

}  // namespace hjreach::cli
