#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hjreach/dynamics.hpp"
#include "hjreach/value_function.hpp"

namespace hjreach {

struct SafetyQueryResult {
  double value = 0.0;
  bool unsafe = false;
  std::vector<double> gradient;  // central differences at +-h/2
  double dvdt = 0.0;             // from neighbouring snapshots
  bool out_of_bounds = false;
};

// Multilinear in state, linear in time between snapshots. Throws UsageError
// for t outside the stored range or a state of the wrong dimension.
SafetyQueryResult value_at(const ValueFunction& vf, std::span<const double> z, double t);

// Extremizing controls for the interpolated gradient.
ControlPair optimal_pair(const ValueFunction& vf, const GameDynamics& dyn,
                         std::span<const double> z, double t);

// Admissible acceleration interval for A at one sampled steering angle.
struct PreservingSlab {
  double steer = 0.0;
  Interval accel;
  bool empty = true;
};

// Controls of A that keep dV/dt + grad V . f(z, uA, uB) >= 0, represented as
// acceleration intervals over a fixed partition of A's steering interval.
struct PreservingSet {
  std::vector<PreservingSlab> slabs;

  bool empty() const noexcept;
};

inline constexpr std::size_t kSteeringSamples = 64;

PreservingSet safety_preserving_set(const ValueFunction& vf, const GameDynamics& dyn,
                                    std::span<const double> z, double t, const AgentControl& ub,
                                    std::size_t steering_samples = kSteeringSamples);

struct FilterResult {
  AgentControl control;
  bool modified = false;
  bool best_effort = false;  // preserving set was empty; fell back to A's extremizer
};

// Least-restrictive filter: keeps u_desired when it preserves the value,
// otherwise the closest admissible sampled control in squared (accel, steer)
// distance.
FilterResult safety_filter(const ValueFunction& vf, const GameDynamics& dyn,
                           std::span<const double> z, double t, const AgentControl& u_desired,
                           const AgentControl& ub_assumed,
                           std::size_t steering_samples = kSteeringSamples);

// B's extremizer under the configured game, a worst-case choice of uB.
AgentControl worst_case_b(const ValueFunction& vf, const GameDynamics& dyn,
                          std::span<const double> z, double t);

using Policy = std::function<AgentControl(double time, std::span<const double> state)>;

struct SimulationOptions {
  double dt = 0.05;
  double duration = 1.0;
  double t_start = 0.0;       // value-function time at the first sample
  bool advance_time = true;   // query V(., t_start + elapsed), capped at 0
};

struct SimulationResult {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<double> values;
  bool truncated = false;  // a non-periodic coordinate left the grid
};

// RK4 rollout with controls held over each step. Throws UsageError if dt <= 0.
SimulationResult simulate(std::span<const double> z0, const Policy& policy_a,
                          const Policy& policy_b, const GameDynamics& dyn, const ValueFunction& vf,
                          const SimulationOptions& options);

}  // namespace hjreach
