#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hjreach/dynamics.hpp"
#include "hjreach/grid.hpp"
#include "hjreach/value_function.hpp"

namespace hjreach {

enum class Integrator { Euler, TvdRk2 };
enum class SolveMode { Tube, ReachAvoid };
// Spatial discretization; only first-order one-sided differences for now.
enum class SpatialScheme { FirstOrder };

struct SolveConfig {
  double horizon_s = 1.0;
  double cfl = 0.5;
  Integrator integrator = Integrator::TvdRk2;
  SolveMode mode = SolveMode::Tube;
  SpatialScheme scheme = SpatialScheme::FirstOrder;
  // Stop early once max|dV|/dt drops below this (absolute, value units per
  // second). Unset: always integrate to the horizon.
  std::optional<double> convergence_tol;
  // Keep every k-th step (the boundary condition and the last step are always
  // kept).
  std::size_t snapshot_stride = 1;

  void validate() const;  // throws ConfigError
};

struct SolveInfo {
  std::size_t steps = 0;
  double dt = 0.0;
  double final_time = 0.0;  // |t| reached
  bool converged = false;
};

// Default convergence threshold: 1e-3 * (max - min) of the boundary field
// per unit time.
double default_convergence_tol(const ScalarField& ell);

// Largest dt with dt * max_z sum_i sigma_i(z) / h_i <= cfl.
double max_stable_dt(const GridSpec& grid, const GameDynamics& dyn, double cfl);

// One explicit Euler step of the freezing update in backward time:
//   V_new = V + dt * min{0, H_LF(z)},
//   H_LF  = H(z, (p- + p+)/2) + 1/2 sum_i sigma_i(z) (p+_i - p-_i).
// Throws InternalError when dt breaks the CFL bound (with CFL number 1).
ScalarField lf_step(const ScalarField& v, const GameDynamics& dyn, double dt);

// Integrates the tube from V(., 0) = ell back to t = -horizon.
ValueFunction solve_tube(const ScalarField& ell, const GameDynamics& dyn, const SolveConfig& cfg,
                         SolveInfo* info = nullptr);

// Reach-avoid: tube update toward {ell_reach < 0}, then V := max(V, -g_avoid)
// after every stage so nodes in {g_avoid < 0} never report V < 0.
ValueFunction solve_reach_avoid(const ScalarField& ell_reach, const ScalarField& g_avoid,
                                const GameDynamics& dyn, const SolveConfig& cfg,
                                SolveInfo* info = nullptr);

// Index of the stored snapshot nearest to t. Throws UsageError outside the
// stored range.
std::size_t nearest_snapshot(const ValueFunction& vf, double t);

// Node-wise indicator V(z, t) < 0 at the nearest stored snapshot.
std::vector<std::uint8_t> unsafe_set(const ValueFunction& vf, double t);

}  // namespace hjreach
