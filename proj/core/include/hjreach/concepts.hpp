#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hjreach/dynamics.hpp"
#include "hjreach/geometry.hpp"
#include "hjreach/grid.hpp"
#include "hjreach/solver.hpp"
#include "hjreach/value_function.hpp"

namespace hjreach {

enum class ConceptKind { WorstCase, Frs, Sff, Rss, Contingency, ConstantMotion, Custom };

std::string_view to_string(ConceptKind kind);
// Throws ConfigError("kind", ...) for unknown names.
ConceptKind concept_kind_from_string(std::string_view name);

// What agent B is assumed to do in a contingency check.
enum class BehaviorModel { Maintain, Brake, Adversarial };
std::string_view to_string(BehaviorModel model);
BehaviorModel behavior_model_from_string(std::string_view name);

// Multiplicative restrictions of each agent's actuation box plus optional
// velocity-dependent scaling. Applied on top of the cars' physical limits.
struct ControlOverrides {
  double a_accel_scale = 1.0;
  double a_steer_scale = 1.0;
  double b_accel_scale = 1.0;
  double b_steer_scale = 1.0;
  ScalingMode scaling = ScalingMode::None;
  double gamma = 0.2;

  friend bool operator==(const ControlOverrides&, const ControlOverrides&) = default;
};

// Safety procedures: braking profiles with bounded steering.
struct SffParams {
  std::optional<double> b_hard_mps2;
  std::optional<double> b_soft_mps2;
  std::optional<double> steer_fraction;
};

// Decoupled longitudinal/lateral fixed-deceleration checks.
struct RssParams {
  std::optional<double> b_a_mps2;       // rear agent A, < 0
  std::optional<double> b_b_mps2;       // lead agent B, < 0
  std::optional<double> lat_b_mps2;     // lateral deceleration magnitude toward zero lateral speed, > 0
  std::optional<std::vector<Axis>> lateral_grid;  // (lateral gap m, wA m/s, wB m/s)
};

struct ContingencyParams {
  std::optional<double> v_stop_mps;
  std::optional<BehaviorModel> b_model;
  std::optional<double> b_brake_mps2;  // used by BehaviorModel::Brake, < 0
};

struct ConstantMotionParams {
  std::optional<double> steer_a_rad;
  std::optional<double> steer_b_rad;
  // Adds per-node steering dims (7-D grid) instead of one pinned angle.
  bool augment = false;
};

struct SafetyConceptSpec {
  ConceptKind kind = ConceptKind::WorstCase;
  std::optional<GameConfig> game;  // required for custom, ignored otherwise
  ControlOverrides controls;
  std::optional<SeverityShape> shape;
  SffParams sff;
  RssParams rss;
  ContingencyParams contingency;
  ConstantMotionParams constant_motion;

  // Spec with documented defaults for every parameter of `kind`.
  static SafetyConceptSpec preset(ConceptKind kind);
};

// Everything a concept needs besides its own parameters.
struct Scenario {
  GridSpec grid;
  CarParams car_a;
  CarParams car_b;
  BodyDims body_a;
  BodyDims body_b;
  SolveConfig solve;
};

// One solver invocation.
struct ConceptSolve {
  std::string label;
  DynamicsPtr dynamics;
  ScalarField ell;                   // boundary condition / reach target
  std::optional<ScalarField> avoid;  // reach-avoid obstacle, g < 0 inside
  SolveConfig config;
  // Exact boundary function of the state, for PDE-free rollouts.
  std::function<double(std::span<const double>)> ell_fn;
};

struct ConceptProblem {
  ConceptKind kind = ConceptKind::WorstCase;
  std::vector<ConceptSolve> solves;
  // Reach-avoid problems label safe states with V < 0; unsafe is V >= 0.
  bool unsafe_when_negative = true;
};

// Throws ConfigError naming the first missing or invalid parameter.
ConceptProblem build(const SafetyConceptSpec& spec, const Scenario& scenario);

std::vector<ValueFunction> solve(const ConceptProblem& problem,
                                 std::vector<SolveInfo>* infos = nullptr);

// Unsafe indicator at the nearest stored snapshot, honoring the problem's
// sign convention.
std::vector<std::uint8_t> concept_unsafe_set(const ConceptProblem& problem,
                                             const ValueFunction& vf, double t);

// RSS verdict: unsafe iff both the longitudinal and the lateral value are
// negative at time t.
bool rss_unsafe(const ValueFunction& longitudinal, const ValueFunction& lateral,
                std::span<const double> lon_state, std::span<const double> lat_state, double t);

// Lowest value of ell along the trajectory from x0 under singleton control
// sets, integrated with RK4 at step dt for horizon T. Throws UsageError if a
// control set is not a singleton.
double rollout_value(std::span<const double> x0, const GameDynamics& dyn,
                     const std::function<double(std::span<const double>)>& ell, double horizon,
                     double dt);

struct RssVerdict {
  bool safe = true;
  double critical_gap_m = 0.0;
};

// Following geometry, A behind B by `gap`; both brake at constant rates
// (b_a, b_b < 0) until stopped. The critical gap is the largest value of
// (A's travel - B's travel) over the episode; the state is unsafe iff the
// gap is below it.
RssVerdict rss_closed_form(double v_a, double v_b, double b_a, double b_b, double gap);

}  // namespace hjreach
