#include "hjreach/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hjreach/error.hpp"

namespace hjreach {

double Interval::max_abs() const noexcept { return std::max(std::abs(lo), std::abs(hi)); }

void CarParams::validate() const {
  if (!(wheelbase_m > 0.0)) throw ConfigError("wheelbase_m", "must be > 0");
  if (!(accel.lo <= accel.hi)) throw ConfigError("accel", "a_min must be <= a_max");
  if (!(steer.lo <= steer.hi)) throw ConfigError("steer", "delta_min must be <= delta_max");
  if (!(steer.max_abs() < std::numbers::pi / 2)) throw ConfigError("steer", "|delta| must be < pi/2");
  if (!(velocity.lo >= 0.0 && velocity.lo < velocity.hi)) {
    throw ConfigError("velocity", "need 0 <= v_min < v_max");
  }
}

void ControlBounds::validate() const {
  for (const ControlBox* box : {&a, &b}) {
    if (!(box->accel.lo <= box->accel.hi) || !(box->steer.lo <= box->steer.hi)) {
      throw ConfigError("control_bounds", "intervals must be nonempty");
    }
  }
  if (mode == ScalingMode::StateDependent && !(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma", "must lie in (0, 1]");
  }
}

ScaledBox scaled_bounds(const ControlBox& box, ScalingMode mode, double gamma, double v,
                        const CarParams& params) {
  ScaledBox out{box};
  if (mode == ScalingMode::None) return out;
  const Interval& vr = params.velocity;
  if (v < vr.lo || v > vr.hi) {
    out.clamped = true;
    v = vr.clamp(v);
  }
  const double s = (v - vr.lo) / (vr.hi - vr.lo);
  out.steer_factor = gamma + (1.0 - s) * (1.0 - gamma);
  out.accel_factor = gamma + s * (1.0 - gamma);
  out.box.steer = box.steer.scaled(out.steer_factor);
  out.box.accel = box.accel.scaled(out.accel_factor);
  return out;
}

double extremize(double coefficient, const Interval& range, Role role) noexcept {
  if (coefficient == 0.0) return range.contains(0.0) ? 0.0 : range.lo;
  const bool pick_hi = (coefficient > 0.0) == (role == Role::Max);
  return pick_hi ? range.hi : range.lo;
}

Interval saturate_accel(const Interval& accel, double v, const Interval& velocity) noexcept {
  Interval out = accel;
  if (v <= velocity.lo) {
    out.lo = std::max(out.lo, 0.0);
    out.hi = std::max(out.hi, 0.0);
  }
  if (v >= velocity.hi) {
    out.lo = std::min(out.lo, 0.0);
    out.hi = std::min(out.hi, 0.0);
  }
  return out;
}

namespace {

double saturated(double a, double v, const Interval& velocity) noexcept {
  if ((v <= velocity.lo && a < 0.0) || (v >= velocity.hi && a > 0.0)) return 0.0;
  return a;
}

// c * x at the role's extremizer over `range`.
double best_term(double c, const Interval& range, Role role) noexcept {
  return c == 0.0 ? 0.0 : c * extremize(c, range, role);
}

Interval tan_interval(const Interval& steer) noexcept { return {std::tan(steer.lo), std::tan(steer.hi)}; }

void check_steer(double delta) {
  if (!(std::abs(delta) < std::numbers::pi / 2)) {
    throw UsageError("steering angle must satisfy |delta| < pi/2");
  }
}

class DefaultKernel final : public GameDynamics::NodeKernel {
 public:
  explicit DefaultKernel(const GameDynamics& dyn) : dyn_(dyn) {}

  double lax_friedrichs(const MultiIndex&, std::span<const double> x, const double* pm,
                        const double* pp) const override {
    const std::size_t n = x.size();
    std::array<double, kMaxDims> pbar{}, sigma{};
    for (std::size_t i = 0; i < n; ++i) pbar[i] = 0.5 * (pm[i] + pp[i]);
    double h = dyn_.hamiltonian(x, std::span<const double>(pbar.data(), n));
    dyn_.speed_bounds(x, std::span<double>(sigma.data(), n));
    for (std::size_t i = 0; i < n; ++i) h += 0.5 * sigma[i] * (pp[i] - pm[i]);
    return h;
  }

  void speed_bounds(const MultiIndex&, std::span<const double> x, double* sigma) const override {
    dyn_.speed_bounds(x, std::span<double>(sigma, x.size()));
  }

 private:
  const GameDynamics& dyn_;
};

}  // namespace

double GameDynamics::hamiltonian(std::span<const double> x, std::span<const double> p) const {
  const ControlPair u = optimal_controls(x, p);
  std::array<double, kMaxDims> f{};
  flow(x, u.a, u.b, std::span<double>(f.data(), x.size()));
  double h = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) h += p[i] * f[i];
  return h;
}

void GameDynamics::NodeKernel::lax_friedrichs_line(MultiIndex idx, std::span<double> x,
                                                   const double* last_coords, std::size_t count,
                                                   const double* pm, const double* pp,
                                                   double* out) const {
  const std::size_t n = x.size(), last = n - 1;
  for (std::size_t j = 0; j < count; ++j) {
    idx[last] = j;
    x[last] = last_coords[j];
    out[j] = lax_friedrichs(idx, x, pm + j * n, pp + j * n);
  }
}

std::unique_ptr<GameDynamics::NodeKernel> GameDynamics::bind(const GridSpec&) const {
  return std::make_unique<DefaultKernel>(*this);
}

// ---------------------------------------------------------------------------

Flow5 relative_flow(const RelativeState& z, const AgentControl& ua, const AgentControl& ub,
                    const CarParams& pa, const CarParams& pb) {
  check_steer(ua.steer);
  check_steer(ub.steer);
  const double wa = z.va / pa.wheelbase_m * std::tan(ua.steer);
  const double wb = z.vb / pb.wheelbase_m * std::tan(ub.steer);
  return {-z.va + z.vb * std::cos(z.dtheta) + wa * z.dy,
          z.vb * std::sin(z.dtheta) - wa * z.dx,
          wb - wa,
          saturated(ua.accel, z.va, pa.velocity),
          saturated(ub.accel, z.vb, pb.velocity)};
}

std::size_t CarLayout::state_dim() const noexcept {
  int top = std::max(steer_a_dim, steer_b_dim);
  for (int d : dim) top = std::max(top, d);
  return static_cast<std::size_t>(top + 1);
}

RelativeCarDynamics::RelativeCarDynamics(CarParams pa, CarParams pb, ControlBounds bounds,
                                         GameConfig game, CarLayout layout)
    : GameDynamics(game), pa_(pa), pb_(pb), bounds_(bounds), layout_(layout) {
  pa_.validate();
  pb_.validate();
  bounds_.validate();
  for (const ControlBox* box : {&bounds_.a, &bounds_.b}) {
    if (!(box->steer.max_abs() < std::numbers::pi / 2)) {
      throw ConfigError("control_bounds", "|delta| must be < pi/2");
    }
  }
}

RelativeState RelativeCarDynamics::relative_state(std::span<const double> x) const noexcept {
  std::array<double, 5> r{};
  for (std::size_t i = 0; i < 5; ++i) {
    r[i] = layout_.dim[i] >= 0 ? x[static_cast<std::size_t>(layout_.dim[i])] : layout_.pinned[i];
  }
  return {r[0], r[1], r[2], r[3], r[4]};
}

Flow5 RelativeCarDynamics::gather_gradient(std::span<const double> p) const noexcept {
  Flow5 out{};
  for (std::size_t i = 0; i < 5; ++i) {
    if (layout_.dim[i] >= 0) out[i] = p[static_cast<std::size_t>(layout_.dim[i])];
  }
  return out;
}

ControlBox RelativeCarDynamics::concrete_box(const ControlBox& base, double v,
                                             const CarParams& params, std::span<const double> x,
                                             int steer_dim) const {
  ControlBox box = scaled_bounds(base, bounds_.mode, bounds_.gamma, v, params).box;
  if (steer_dim >= 0) {
    const double d = x[static_cast<std::size_t>(steer_dim)];
    box.steer = {d, d};
  }
  return box;
}

ControlBox RelativeCarDynamics::box_a(std::span<const double> x) const {
  return concrete_box(bounds_.a, relative_state(x).va, pa_, x, layout_.steer_a_dim);
}

ControlBox RelativeCarDynamics::box_b(std::span<const double> x) const {
  return concrete_box(bounds_.b, relative_state(x).vb, pb_, x, layout_.steer_b_dim);
}

void RelativeCarDynamics::flow(std::span<const double> x, const AgentControl& ua,
                               const AgentControl& ub, std::span<double> out) const {
  const Flow5 f = relative_flow(relative_state(x), ua, ub, pa_, pb_);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < 5; ++i) {
    if (layout_.dim[i] >= 0) out[static_cast<std::size_t>(layout_.dim[i])] = f[i];
  }
}

RelativeCarDynamics::Coefficients RelativeCarDynamics::coefficients(const RelativeState& z,
                                                                    const Flow5& p) const noexcept {
  return {p[0] * (-z.va + z.vb * std::cos(z.dtheta)) + p[1] * z.vb * std::sin(z.dtheta),
          p[3], z.va / pa_.wheelbase_m * (p[0] * z.dy - p[1] * z.dx - p[2]),
          p[4], z.vb / pb_.wheelbase_m * p[2]};
}

ControlPair RelativeCarDynamics::optimal_controls(std::span<const double> x,
                                                  std::span<const double> p) const {
  const RelativeState z = relative_state(x);
  const Coefficients c = coefficients(z, gather_gradient(p));
  const ControlBox ba = box_a(x), bb = box_b(x);
  const GameConfig& g = game();
  return {{extremize(c.ca_a, ba.accel, g.role_a), extremize(c.cs_a, ba.steer, g.role_a)},
          {extremize(c.ca_b, bb.accel, g.role_b), extremize(c.cs_b, bb.steer, g.role_b)}};
}

double RelativeCarDynamics::hamiltonian(std::span<const double> x, std::span<const double> p) const {
  const RelativeState z = relative_state(x);
  const Coefficients c = coefficients(z, gather_gradient(p));
  const ControlBox ba = box_a(x), bb = box_b(x);
  const GameConfig& g = game();
  const Interval acc_a = layout_.dim[3] >= 0 ? saturate_accel(ba.accel, z.va, pa_.velocity) : ba.accel;
  const Interval acc_b = layout_.dim[4] >= 0 ? saturate_accel(bb.accel, z.vb, pb_.velocity) : bb.accel;
  return c.drift + best_term(c.ca_a, acc_a, g.role_a) +
         best_term(c.cs_a, tan_interval(ba.steer), g.role_a) + best_term(c.ca_b, acc_b, g.role_b) +
         best_term(c.cs_b, tan_interval(bb.steer), g.role_b);
}

void RelativeCarDynamics::speed_bounds(std::span<const double> x, std::span<double> sigma) const {
  const RelativeState z = relative_state(x);
  const ControlBox ba = box_a(x), bb = box_b(x);
  ControlBox sa = ba, sb = bb;
  sa.accel = saturate_accel(ba.accel, z.va, pa_.velocity);
  sb.accel = saturate_accel(bb.accel, z.vb, pb_.velocity);
  const Flow5 s = hjreach::speed_bounds(z, sa, sb, pa_, pb_);
  std::fill(sigma.begin(), sigma.end(), 0.0);
  for (std::size_t i = 0; i < 5; ++i) {
    if (layout_.dim[i] >= 0) sigma[static_cast<std::size_t>(layout_.dim[i])] = s[i];
  }
}

// Lookup-table kernel for the plain 5-D layout: cos/sin per dtheta node and
// concrete control boxes per velocity node.
class RelativeCarDynamics::Kernel final : public GameDynamics::NodeKernel {
 public:
  Kernel(const RelativeCarDynamics& dyn, const GridSpec& grid) : dyn_(dyn) {
    const Axis& at = grid.axis(2);
    for (std::size_t i = 0; i < at.count; ++i) {
      cos_.push_back(std::cos(at.coordinate(i)));
      sin_.push_back(std::sin(at.coordinate(i)));
    }
    build_rows(grid.axis(3), dyn.bounds_.a, dyn.pa_, agent_a_);
    build_rows(grid.axis(4), dyn.bounds_.b, dyn.pb_, agent_b_);
  }

  double lax_friedrichs(const MultiIndex& idx, std::span<const double> x, const double* pm,
                        const double* pp) const override {
    return node(agent_a_[idx[3]], agent_b_[idx[4]], cos_[idx[2]], sin_[idx[2]], x[0], x[1], x[3],
                x[4], pm, pp);
  }

  void lax_friedrichs_line(MultiIndex idx, std::span<double> x, const double* last_coords,
                           std::size_t count, const double* pm, const double* pp,
                           double* out) const override {
    const AgentRow& ra = agent_a_[idx[3]];
    const double c = cos_[idx[2]], s = sin_[idx[2]];
    for (std::size_t j = 0; j < count; ++j) {
      out[j] = node(ra, agent_b_[j], c, s, x[0], x[1], x[3], last_coords[j], pm + 5 * j, pp + 5 * j);
    }
  }

  void speed_bounds(const MultiIndex& idx, std::span<const double> x, double* sigma) const override {
    const AgentRow& ra = agent_a_[idx[3]];
    const AgentRow& rb = agent_b_[idx[4]];
    const double fx0 = -x[3] + x[4] * cos_[idx[2]];
    const double fy0 = x[4] * sin_[idx[2]];
    sigma[0] = std::abs(fx0) + ra.w_max * std::abs(x[1]);
    sigma[1] = std::abs(fy0) + ra.w_max * std::abs(x[0]);
    sigma[2] = ra.w_max + rb.w_max;
    sigma[3] = ra.accel_abs;
    sigma[4] = rb.accel_abs;
  }

 private:
  struct AgentRow {
    Interval accel;  // saturated
    Interval tan;
    double w_per_tan;
    double w_max;
    double accel_abs;
  };

  double node(const AgentRow& ra, const AgentRow& rb, double c, double s, double dx, double dy,
              double va, double vb, const double* pm, const double* pp) const {
    Flow5 p;
    for (std::size_t i = 0; i < 5; ++i) p[i] = 0.5 * (pm[i] + pp[i]);
    const GameConfig& g = dyn_.game();
    const double fx0 = -va + vb * c;
    const double fy0 = vb * s;
    const double cs_a = ra.w_per_tan * (p[0] * dy - p[1] * dx - p[2]);
    const double cs_b = rb.w_per_tan * p[2];
    double h = p[0] * fx0 + p[1] * fy0 + best_term(p[3], ra.accel, g.role_a) +
               best_term(cs_a, ra.tan, g.role_a) + best_term(p[4], rb.accel, g.role_b) +
               best_term(cs_b, rb.tan, g.role_b);
    const double wa = ra.w_max, wb = rb.w_max;
    const double sigma[5] = {std::abs(fx0) + wa * std::abs(dy), std::abs(fy0) + wa * std::abs(dx),
                             wa + wb, ra.accel_abs, rb.accel_abs};
    for (std::size_t i = 0; i < 5; ++i) h += 0.5 * sigma[i] * (pp[i] - pm[i]);
    return h;
  }

 private:
  void build_rows(const Axis& axis, const ControlBox& base, const CarParams& params,
                  std::vector<AgentRow>& rows) const {
    rows.clear();
    for (std::size_t i = 0; i < axis.count; ++i) {
      const double v = axis.coordinate(i);
      const ControlBox box =
          scaled_bounds(base, dyn_.bounds_.mode, dyn_.bounds_.gamma, v, params).box;
      AgentRow r;
      r.accel = saturate_accel(box.accel, v, params.velocity);
      r.tan = tan_interval(box.steer);
      r.w_per_tan = v / params.wheelbase_m;
      r.w_max = std::abs(r.w_per_tan) * r.tan.max_abs();
      r.accel_abs = r.accel.max_abs();
      rows.push_back(r);
    }
  }

  const RelativeCarDynamics& dyn_;
  std::vector<double> cos_, sin_;
  std::vector<AgentRow> agent_a_, agent_b_;
};

std::unique_ptr<GameDynamics::NodeKernel> RelativeCarDynamics::bind(const GridSpec& grid) const {
  const bool identity = layout_.dim == std::array<int, 5>{0, 1, 2, 3, 4} &&
                        layout_.steer_a_dim < 0 && layout_.steer_b_dim < 0 && grid.ndim() == 5;
  if (!identity) return GameDynamics::bind(grid);
  return std::make_unique<Kernel>(*this, grid);
}

ControlPair optimal_controls(const RelativeState& z, const Flow5& p, const ControlBox& box_a,
                             const ControlBox& box_b, const GameConfig& game, const CarParams& pa,
                             const CarParams& pb) {
  ControlBounds bounds{box_a, box_b};
  const RelativeCarDynamics dyn(pa, pb, bounds, game);
  const std::array<double, 5> x{z.dx, z.dy, z.dtheta, z.va, z.vb};
  return dyn.optimal_controls(x, p);
}

double hamiltonian(const RelativeState& z, const Flow5& p, const ControlBox& box_a,
                   const ControlBox& box_b, const GameConfig& game, const CarParams& pa,
                   const CarParams& pb) {
  ControlBounds bounds{box_a, box_b};
  const RelativeCarDynamics dyn(pa, pb, bounds, game);
  const std::array<double, 5> x{z.dx, z.dy, z.dtheta, z.va, z.vb};
  return dyn.hamiltonian(x, p);
}

Flow5 speed_bounds(const RelativeState& z, const ControlBox& box_a, const ControlBox& box_b,
                   const CarParams& pa, const CarParams& pb) {
  const double wa = std::abs(z.va) / pa.wheelbase_m * tan_interval(box_a.steer).max_abs();
  const double wb = std::abs(z.vb) / pb.wheelbase_m * tan_interval(box_b.steer).max_abs();
  return {std::abs(-z.va + z.vb * std::cos(z.dtheta)) + wa * std::abs(z.dy),
          std::abs(z.vb * std::sin(z.dtheta)) + wa * std::abs(z.dx), wa + wb, box_a.accel.max_abs(),
          box_b.accel.max_abs()};
}

// ---------------------------------------------------------------------------

GapDynamics::GapDynamics(double sign_a, double sign_b, SpeedChannel a, SpeedChannel b,
                         GameConfig game, std::optional<double> b_pinned_speed)
    : GameDynamics(game), sign_a_(sign_a), sign_b_(sign_b), a_(a), b_(b), b_pinned_(b_pinned_speed) {
  for (const SpeedChannel* c : {&a_, &b_}) {
    if (!(c->accel.lo <= c->accel.hi)) throw ConfigError("accel", "interval must be nonempty");
    if (!(c->velocity.lo <= c->velocity.hi)) throw ConfigError("velocity", "interval must be nonempty");
    if (c->brake_to_zero < 0.0) throw ConfigError("brake_to_zero", "must be >= 0");
  }
}

Interval GapDynamics::channel_box(const SpeedChannel& c, double v) noexcept {
  if (c.brake_to_zero > 0.0) {
    const double a = v > 0.0 ? -c.brake_to_zero : (v < 0.0 ? c.brake_to_zero : 0.0);
    return {a, a};
  }
  return c.accel;
}

ControlBox GapDynamics::box_a(std::span<const double> x) const { return {channel_box(a_, x[1]), {}}; }

ControlBox GapDynamics::box_b(std::span<const double> x) const {
  if (b_pinned_) return {};
  return {channel_box(b_, x[2]), {}};
}

void GapDynamics::flow(std::span<const double> x, const AgentControl& ua, const AgentControl& ub,
                       std::span<double> out) const {
  out[0] = sign_a_ * x[1] + sign_b_ * speed_b(x);
  out[1] = saturated(ua.accel, x[1], a_.velocity);
  if (!b_pinned_) out[2] = saturated(ub.accel, x[2], b_.velocity);
}

ControlPair GapDynamics::optimal_controls(std::span<const double> x, std::span<const double> p) const {
  ControlPair u;
  u.a.accel = extremize(p[1], box_a(x).accel, game().role_a);
  if (!b_pinned_) u.b.accel = extremize(p[2], box_b(x).accel, game().role_b);
  return u;
}

void GapDynamics::speed_bounds(std::span<const double> x, std::span<double> sigma) const {
  sigma[0] = std::abs(sign_a_ * x[1] + sign_b_ * speed_b(x));
  sigma[1] = saturate_accel(box_a(x).accel, x[1], a_.velocity).max_abs();
  if (!b_pinned_) sigma[2] = saturate_accel(box_b(x).accel, x[2], b_.velocity).max_abs();
}

// ---------------------------------------------------------------------------

ConstantFlowDynamics::ConstantFlowDynamics(std::vector<double> velocity)
    : GameDynamics(GameConfig{}), velocity_(std::move(velocity)) {
  if (velocity_.empty() || velocity_.size() > kMaxDims) {
    throw UsageError("constant flow needs 1..7 components");
  }
}

void ConstantFlowDynamics::flow(std::span<const double>, const AgentControl&, const AgentControl&,
                                std::span<double> out) const {
  std::copy(velocity_.begin(), velocity_.end(), out.begin());
}

void ConstantFlowDynamics::speed_bounds(std::span<const double>, std::span<double> sigma) const {
  for (std::size_t i = 0; i < velocity_.size(); ++i) sigma[i] = std::abs(velocity_[i]);
}

}  // namespace hjreach
