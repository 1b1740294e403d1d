#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hjreach/grid.hpp"

namespace hjreach {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool singleton() const noexcept { return lo == hi; }
  double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
  Interval scaled(double f) const noexcept { return {lo * f, hi * f}; }
  double max_abs() const noexcept;

  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Role { Max, Min };
enum class Agent { A, B };

// Which way each agent pushes p.f, and who plays second (has knowledge of
// the other's choice). Because each agent's contribution to p.f is separable
// in every model here, play order never changes the extremizers.
struct GameConfig {
  Role role_a = Role::Max;
  Role role_b = Role::Min;
  Agent second = Agent::B;

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

// Kinematic simple car: acceleration and front-wheel steering.
struct CarParams {
  double wheelbase_m = 2.7;
  Interval accel{-6.0, 3.0};     // m/s^2
  Interval steer{-0.1, 0.1};     // rad
  Interval velocity{0.0, 15.0};  // m/s

  void validate() const;  // throws ConfigError
};

struct AgentControl {
  double accel = 0.0;
  double steer = 0.0;

  friend bool operator==(const AgentControl&, const AgentControl&) = default;
};

struct ControlPair {
  AgentControl a;
  AgentControl b;
};

// Admissible (acceleration, steering) box of one agent.
struct ControlBox {
  Interval accel;
  Interval steer;

  bool contains(const AgentControl& u) const noexcept {
    return accel.contains(u.accel) && steer.contains(u.steer);
  }
  AgentControl clamp(const AgentControl& u) const noexcept {
    return {accel.clamp(u.accel), steer.clamp(u.steer)};
  }
};

enum class ScalingMode { None, StateDependent };

// Admissible control sets of both agents before any state-dependent scaling.
struct ControlBounds {
  ControlBox a;
  ControlBox b;
  ScalingMode mode = ScalingMode::None;
  double gamma = 0.2;

  void validate() const;  // throws ConfigError
};

struct ScaledBox {
  ControlBox box;
  double steer_factor = 1.0;  // alpha(v)
  double accel_factor = 1.0;  // beta(v)
  bool clamped = false;       // v was outside [v_min, v_max]
};

// Velocity-dependent authority: steering shrinks with speed, acceleration
// grows with speed, both bottoming out at gamma.
//   alpha(v) = gamma + (1 - s)(1 - gamma),  beta(v) = gamma + s(1 - gamma),
//   s = (v - v_min) / (v_max - v_min).
ScaledBox scaled_bounds(const ControlBox& box, ScalingMode mode, double gamma, double v,
                        const CarParams& params);

// Bang-bang extremizer of c*x over [lo, hi]. A zero coefficient prefers 0 when
// admissible, else the lower endpoint.
double extremize(double coefficient, const Interval& range, Role role) noexcept;

// Narrows an acceleration interval so it cannot push v past its bounds.
Interval saturate_accel(const Interval& accel, double v, const Interval& velocity) noexcept;

// Two-player dynamics consumed by the solver and the runtime API. Every model
// in this library has p.f affine in each agent's acceleration and monotone in
// tan(steer), so optimal controls sit at box endpoints.
class GameDynamics {
 public:
  explicit GameDynamics(GameConfig game) : game_(game) {}
  virtual ~GameDynamics() = default;

  virtual std::size_t state_dim() const = 0;
  const GameConfig& game() const noexcept { return game_; }

  // Concrete (already scaled) control boxes at state x.
  virtual ControlBox box_a(std::span<const double> x) const = 0;
  virtual ControlBox box_b(std::span<const double> x) const = 0;

  // State derivative for fixed controls, with velocity saturation.
  virtual void flow(std::span<const double> x, const AgentControl& ua, const AgentControl& ub,
                    std::span<double> out) const = 0;

  virtual ControlPair optimal_controls(std::span<const double> x,
                                       std::span<const double> p) const = 0;

  // max/min over the boxes of p.f(x, ua, ub), per the game roles.
  virtual double hamiltonian(std::span<const double> x, std::span<const double> p) const;

  // sigma_i >= |f_i(x, ua, ub)| for every admissible control pair.
  virtual void speed_bounds(std::span<const double> x, std::span<double> sigma) const = 0;

  // Grid-bound evaluator used by the solver's inner loop.
  class NodeKernel {
   public:
    virtual ~NodeKernel() = default;
    // Lax-Friedrichs Hamiltonian H(pbar) + 1/2 sum sigma_i (p+_i - p-_i).
    virtual double lax_friedrichs(const MultiIndex& idx, std::span<const double> x,
                                  const double* p_minus, const double* p_plus) const = 0;
    virtual void speed_bounds(const MultiIndex& idx, std::span<const double> x,
                              double* sigma) const = 0;
    // lax_friedrichs() at every node of one line along the last dimension.
    // idx and x carry the leading coordinates; pm, pp are count x ndim.
    virtual void lax_friedrichs_line(MultiIndex idx, std::span<double> x,
                                     const double* last_coords, std::size_t count,
                                     const double* pm, const double* pp, double* out) const;
  };

  // Default kernel forwards to hamiltonian()/speed_bounds(). Models may
  // override it with per-axis lookup tables.
  virtual std::unique_ptr<NodeKernel> bind(const GridSpec& grid) const;

 private:
  GameConfig game_;
};

using DynamicsPtr = std::shared_ptr<const GameDynamics>;

// ---------------------------------------------------------------------------
// Relative two-car model.

// Relative state of B seen from A's body frame.
struct RelativeState {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
  double va = 0.0;
  double vb = 0.0;
};

using Flow5 = std::array<double, 5>;

// With w_i = (v_i / L_i) tan(steer_i):
//   dx' = -vA + vB cos(dtheta) + wA dy
//   dy' =  vB sin(dtheta) - wA dx
//   dtheta' = wB - wA,  vA' = aA,  vB' = aB
// Velocity components are zeroed when the control pushes past the velocity
// bounds. Throws UsageError if |steer| >= pi/2.
Flow5 relative_flow(const RelativeState& z, const AgentControl& ua, const AgentControl& ub,
                    const CarParams& pa, const CarParams& pb);

// Maps the five relative variables (dx, dy, dtheta, vA, vB) onto grid dims.
// A variable with dim < 0 is pinned to `pinned[i]` and its flow is dropped.
// Optional steering dims hold each agent's current steering angle with zero
// derivative (constant-motion augmentation); the steering control is then
// pinned to that state value.
struct CarLayout {
  std::array<int, 5> dim{0, 1, 2, 3, 4};
  std::array<double, 5> pinned{};
  int steer_a_dim = -1;
  int steer_b_dim = -1;

  std::size_t state_dim() const noexcept;
  static CarLayout full() { return {}; }
  static CarLayout augmented_steering() {
    CarLayout l;
    l.steer_a_dim = 5;
    l.steer_b_dim = 6;
    return l;
  }
};

class RelativeCarDynamics final : public GameDynamics {
 public:
  RelativeCarDynamics(CarParams pa, CarParams pb, ControlBounds bounds, GameConfig game,
                      CarLayout layout = CarLayout::full());

  std::size_t state_dim() const override { return layout_.state_dim(); }
  ControlBox box_a(std::span<const double> x) const override;
  ControlBox box_b(std::span<const double> x) const override;
  void flow(std::span<const double> x, const AgentControl& ua, const AgentControl& ub,
            std::span<double> out) const override;
  ControlPair optimal_controls(std::span<const double> x, std::span<const double> p) const override;
  double hamiltonian(std::span<const double> x, std::span<const double> p) const override;
  void speed_bounds(std::span<const double> x, std::span<double> sigma) const override;
  std::unique_ptr<NodeKernel> bind(const GridSpec& grid) const override;

  RelativeState relative_state(std::span<const double> x) const noexcept;
  const CarParams& params_a() const noexcept { return pa_; }
  const CarParams& params_b() const noexcept { return pb_; }
  const ControlBounds& bounds() const noexcept { return bounds_; }
  const CarLayout& layout() const noexcept { return layout_; }

  // Control-affine decomposition at relative state z:
  //   p.f = drift + ca_a*aA + cs_a*tan(dA) + ca_b*aB + cs_b*tan(dB)
  struct Coefficients {
    double drift, ca_a, cs_a, ca_b, cs_b;
  };
  Coefficients coefficients(const RelativeState& z, const Flow5& p) const noexcept;

 private:
  class Kernel;
  Flow5 gather_gradient(std::span<const double> p) const noexcept;
  ControlBox concrete_box(const ControlBox& base, double v, const CarParams& params,
                          std::span<const double> x, int steer_dim) const;

  CarParams pa_, pb_;
  ControlBounds bounds_;
  CarLayout layout_;
};

// Full 5-D model (dx, dy, dtheta, vA, vB) convenience evaluators.
ControlPair optimal_controls(const RelativeState& z, const Flow5& p, const ControlBox& box_a,
                             const ControlBox& box_b, const GameConfig& game, const CarParams& pa,
                             const CarParams& pb);
double hamiltonian(const RelativeState& z, const Flow5& p, const ControlBox& box_a,
                   const ControlBox& box_b, const GameConfig& game, const CarParams& pa,
                   const CarParams& pb);
Flow5 speed_bounds(const RelativeState& z, const ControlBox& box_a, const ControlBox& box_b,
                   const CarParams& pa, const CarParams& pb);

// ---------------------------------------------------------------------------
// One-dimensional gap between two agents moving along a shared axis.
//   gap' = sign_a * vA + sign_b * vB,  vA' = aA,  vB' = aB.
// Longitudinal following (A behind B): sign_a = -1, sign_b = +1.

struct SpeedChannel {
  Interval accel{0.0, 0.0};     // m/s^2, ignored when brake_to_zero > 0
  Interval velocity{0.0, 0.0};  // m/s, saturation bounds
  // > 0: the agent decelerates toward zero speed at this rate (singleton,
  // state-dependent control: a = -brake_to_zero * sign(v)).
  double brake_to_zero = 0.0;
};

class GapDynamics final : public GameDynamics {
 public:
  // State is (gap, vA) when `b_pinned_speed` is set, else (gap, vA, vB).
  GapDynamics(double sign_a, double sign_b, SpeedChannel a, SpeedChannel b, GameConfig game,
              std::optional<double> b_pinned_speed = std::nullopt);

  std::size_t state_dim() const override { return b_pinned_ ? 2 : 3; }
  ControlBox box_a(std::span<const double> x) const override;
  ControlBox box_b(std::span<const double> x) const override;
  void flow(std::span<const double> x, const AgentControl& ua, const AgentControl& ub,
            std::span<double> out) const override;
  ControlPair optimal_controls(std::span<const double> x, std::span<const double> p) const override;
  void speed_bounds(std::span<const double> x, std::span<double> sigma) const override;

 private:
  double speed_b(std::span<const double> x) const noexcept { return b_pinned_ ? *b_pinned_ : x[2]; }
  static Interval channel_box(const SpeedChannel& c, double v) noexcept;

  double sign_a_, sign_b_;
  SpeedChannel a_, b_;
  std::optional<double> b_pinned_;
};

// ---------------------------------------------------------------------------
// Uncontrolled constant drift f(x) = velocity.
class ConstantFlowDynamics final : public GameDynamics {
 public:
  explicit ConstantFlowDynamics(std::vector<double> velocity);

  std::size_t state_dim() const override { return velocity_.size(); }
  ControlBox box_a(std::span<const double>) const override { return {}; }
  ControlBox box_b(std::span<const double>) const override { return {}; }
  void flow(std::span<const double> x, const AgentControl&, const AgentControl&,
            std::span<double> out) const override;
  ControlPair optimal_controls(std::span<const double>, std::span<const double>) const override {
    return {};
  }
  void speed_bounds(std::span<const double> x, std::span<double> sigma) const override;

 private:
  std::vector<double> velocity_;
};

}  // namespace hjreach
