#include "omniam/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omniam {

Wrench gravityTerm(const Matrix3& r, const VehicleParams& params) {
  const Vector3 f = r.transpose() * Vector3(0.0, 0.0, params.mass * kGravity);
  return Wrench{f, params.com_offset.cross(f), Frame::Body};
}

Wrench coriolisTerm(const Twist& v, const VehicleParams& params) {
  const Vector3 jw = params.inertia.asDiagonal() * v.angular;
  return Wrench{params.mass * v.angular.cross(v.linear), v.angular.cross(jw), Frame::Body};
}

Vector6 forwardDynamics(const Matrix3& r, const Twist& v, const Wrench& actuation, const Wrench& external,
                        const VehicleParams& params) {
  const Vector6 rhs = actuation.vector() + external.vector() - coriolisTerm(v, params).vector() -
                      gravityTerm(r, params).vector();
  Vector6 acc;
  acc.head<3>() = rhs.head<3>() / params.mass;
  acc.tail<3>() = rhs.tail<3>().cwiseQuotient(params.inertia);
  return acc;
}

double DisturbancePulse::envelope(double t) const {
  const double s = t - start;
  if (s < 0.0) return 0.0;
  if (s < ramp) return s / ramp;
  if (s < ramp + hold) return 1.0;
  if (s < 2.0 * ramp + hold) return 1.0 - (s - ramp - hold) / ramp;
  return 0.0;
}

Wrench DisturbanceProfile::wrench(double t, const Matrix3& r) const {
  Wrench total;
  total.frame = Frame::Body;
  for (const auto& p : pulses) {
    const double e = p.envelope(t);
    if (e == 0.0) continue;
    Vector3 f = e * p.magnitude * p.direction;
    Vector3 tq = e * p.torque;
    if (p.frame == Frame::World) {
      f = r.transpose() * f;
      tq = r.transpose() * tq;
    }
    total = total + wrenchAtOrigin(Wrench{f, tq, Frame::Body}, p.point);
  }
  return total;
}

void DisturbanceProfile::validate() const {
  for (const auto& p : pulses) {
    if (p.ramp < 0.0 || p.hold < 0.0) throw std::invalid_argument("disturbance ramp and hold must be non-negative");
    if (p.magnitude != 0.0 && std::abs(p.direction.norm() - 1.0) > 1e-9)
      throw std::invalid_argument("disturbance direction must be unit length");
    if (p.frame == Frame::Tool) throw std::invalid_argument("disturbance frame must be body or world");
  }
}

namespace {

struct Derivative {
  Vector3 p_dot;
  Vector3 omega;  // body angular velocity, drives the rotation
  Vector6 v_dot;
};

// dexp^-1 truncated after the third term; enough for fourth order at the
// step sizes used here.
Vector3 dexpInv(const Vector3& theta, const Vector3& w) {
  const Vector3 tw = theta.cross(w);
  return w - 0.5 * tw + theta.cross(tw) / 12.0;
}

template <typename WrenchFn>
SimState rkmk4(const SimState& s0, double h, const VehicleParams& params, const Wrench& actuation,
               WrenchFn&& external) {
  const Matrix3& r0 = s0.pose.orientation;
  auto eval = [&](const Vector3& p, const Matrix3& r, const Vector6& v, double t) {
    SimState s;
    s.pose = Pose{p, r};
    s.twist = Twist::fromVector(v);
    s.time = t;
    Derivative d;
    d.p_dot = r * v.head<3>();
    d.omega = v.tail<3>();
    d.v_dot = forwardDynamics(r, s.twist, actuation, external(s), params);
    return d;
  };

  const Vector3 p0 = s0.pose.position;
  const Vector6 v0 = s0.twist.vector();
  const double t0 = s0.time;

  const Derivative k1 = eval(p0, r0, v0, t0);
  const Vector3 th1 = k1.omega;  // dexp^-1(0, w) = w

  const Vector3 a2 = 0.5 * h * th1;
  const Derivative k2 = eval(p0 + 0.5 * h * k1.p_dot, r0 * expSO3(a2), v0 + 0.5 * h * k1.v_dot, t0 + 0.5 * h);
  const Vector3 th2 = dexpInv(a2, k2.omega);

  const Vector3 a3 = 0.5 * h * th2;
  const Derivative k3 = eval(p0 + 0.5 * h * k2.p_dot, r0 * expSO3(a3), v0 + 0.5 * h * k2.v_dot, t0 + 0.5 * h);
  const Vector3 th3 = dexpInv(a3, k3.omega);

  const Vector3 a4 = h * th3;
  const Derivative k4 = eval(p0 + h * k3.p_dot, r0 * expSO3(a4), v0 + h * k3.v_dot, t0 + h);
  const Vector3 th4 = dexpInv(a4, k4.omega);

  SimState out;
  out.time = t0 + h;
  out.pose.position = p0 + h / 6.0 * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot);
  Matrix3 r = r0 * expSO3(h / 6.0 * (th1 + 2.0 * th2 + 2.0 * th3 + th4));
  if (orthonormalityError(r) > 1e-9) r = orthonormalize(r);
  out.pose.orientation = r;
  out.twist = Twist::fromVector(v0 + h / 6.0 * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot));
  return out;
}

void checkFinite(const SimState& s) {
  if (!s.pose.position.allFinite() || !s.pose.orientation.allFinite() || !s.twist.linear.allFinite() ||
      !s.twist.angular.allFinite() || !std::isfinite(s.time))
    throw NonFiniteState("simulation state became non-finite");
}

// Number of equal substeps that keeps the stiffest contact mode of the tool
// tip (stick-regime friction and the normal spring) inside the RK4 stability
// region.
int contactSubsteps(const SimState& s, double dt, const VehicleParams& params, const Scene& scene) {
  if (scene.primitives.empty()) return 1;
  const Vector3 tool = params.toolOffset();
  const Matrix3& r = s.pose.orientation;
  const Vector3 tip = s.pose.position + r * tool;
  const Vector3 tip_vel = r * (s.twist.linear + s.twist.angular.cross(tool));
  const ContactParams& c = scene.contact;
  double fn_bound = 0.0;
  bool near = false;
  for (const auto& prim : scene.primitives) {
    const Penetration pen = penetration(prim, tip);
    const double rate = -tip_vel.dot(pen.normal);
    const double reach = pen.depth + std::max(0.0, rate) * dt;
    if (reach <= 0.0) continue;
    near = true;
    fn_bound = std::max(fn_bound, c.stiffness * reach + c.damping * std::abs(rate));
  }
  if (!near) return 1;
  const double inv_m = 1.0 / params.mass + tool.squaredNorm() / params.inertia.minCoeff();
  // Real eigenvalues (friction, normal damping) and the contact oscillation.
  const double lambda_real = (c.friction * 2.0 * fn_bound / c.velocity_epsilon + c.damping) * inv_m;
  const double lambda_osc = std::sqrt(c.stiffness * inv_m);
  const double lambda = std::max(lambda_real, lambda_osc);
  constexpr double kStableProduct = 1.5;
  const int n = static_cast<int>(std::ceil(lambda * dt / kStableProduct));
  return std::clamp(n, 1, 200);
}

}  // namespace

Simulator::Simulator(VehicleParams params, AllocatorGeometry geometry, Scene scene, DisturbanceProfile disturbance,
                     ActuatorLag lag)
    : params_(std::move(params)),
      geometry_(geometry),
      scene_(std::move(scene)),
      disturbance_(std::move(disturbance)),
      lag_(lag) {
  params_.validate();
  scene_.validate();
  disturbance_.validate();
  if (lag_.enabled && !(lag_.rotor_time_constant > 0.0 && lag_.tilt_time_constant > 0.0))
    throw std::invalid_argument("actuator time constants must be positive");
}

ExternalWrench Simulator::external(const SimState& state) const {
  ExternalWrench e;
  e.contact = contactWrench(state.pose, state.twist, params_.toolOffset(), scene_);
  e.disturbance = disturbance_.wrench(state.time, state.pose.orientation);
  return e;
}

int Simulator::substepsFor(const SimState& state, double dt) const {
  return contactSubsteps(state, dt, params_, scene_);
}

SimState Simulator::step(const SimState& state, const ActuatorCommand& command, double dt) {
  if (!(dt > 0.0 && dt <= 0.01)) throw std::invalid_argument("time step must lie in (0, 0.01] s");
  if (!lag_.enabled || !initialized_) {
    actual_ = command;
    initialized_ = true;
  } else {
    // Exact discretization of the first-order lag over one step; tilts
    // move along the shorter arc.
    const double ar = 1.0 - std::exp(-dt / lag_.rotor_time_constant);
    const double at = 1.0 - std::exp(-dt / lag_.tilt_time_constant);
    actual_.rotor_speeds += ar * (command.rotor_speeds - actual_.rotor_speeds);
    for (int i = 0; i < 6; ++i) {
      const double diff = std::remainder(command.tilt(i) - actual_.tilt(i), 2.0 * std::numbers::pi);
      actual_.tilt(i) += at * diff;
    }
  }
  const Wrench act = forwardWrench(actual_, geometry_);
  const int n = substepsFor(state, dt);
  last_substeps_ = n;
  const double h = dt / n;
  auto ext = [this](const SimState& s) { return external(s).total(); };
  SimState s = state;
  for (int i = 0; i < n; ++i) {
    s = rkmk4(s, h, params_, act, ext);
    checkFinite(s);
  }
  s.time = state.time + dt;
  return s;
}

SimState step(const SimState& state, const ActuatorCommand& command, const Scene& scene,
              const DisturbanceProfile& disturbance, const VehicleParams& params, const AllocatorGeometry& geometry,
              double dt) {
  Simulator sim(params, geometry, scene, disturbance);
  return sim.step(state, command, dt);
}

double mechanicalEnergy(const SimState& state, const VehicleParams& params) {
  const Vector3& v = state.twist.linear;
  const Vector3& w = state.twist.angular;
  const double kinetic = 0.5 * params.mass * v.squaredNorm() + 0.5 * w.dot(params.inertia.asDiagonal() * w);
  const Vector3 com = state.pose.position + state.pose.orientation * params.com_offset;
  return kinetic + params.mass * kGravity * com.z();
}

}  // namespace omniam
