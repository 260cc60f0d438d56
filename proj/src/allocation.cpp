#include "omniam/allocation.hpp"

#include <Eigen/QR>

#include <cmath>
#include <numbers>

namespace omniam {

namespace {

constexpr unsigned kAllGroups = 0b111111;
// Maximum rotor speed used to calibrate c_f: at this speed one rotor gives
// half of the group limit.
constexpr double kMaxRotorSpeed = 1000.0;
constexpr double kDragToThrust = 0.016;  // c_d / c_f [m]

}  // namespace

AllocatorGeometry AllocatorGeometry::fromParams(const VehicleParams& p) {
  AllocatorGeometry g;
  g.arm_length = p.group_distance;
  g.max_group_thrust = p.max_group_thrust;
  g.rotors_per_group = p.rotors_per_group;
  g.thrust_coefficient = p.max_group_thrust / p.rotors_per_group / (kMaxRotorSpeed * kMaxRotorSpeed);
  g.drag_coefficient = kDragToThrust * g.thrust_coefficient;
  return g;
}

double AllocatorGeometry::azimuth(int group) const { return group * std::numbers::pi / 3.0; }

Vector3 AllocatorGeometry::armAxis(int group) const {
  const double th = azimuth(group);
  return Vector3(std::cos(th), std::sin(th), 0.0);
}

Vector3 AllocatorGeometry::thrustDirection(int group, double tilt) const {
  return std::cos(tilt) * Vector3::UnitZ() + std::sin(tilt) * tiltTangent(group);
}

double AllocatorGeometry::maxRotorSpeed() const {
  return std::sqrt(max_group_thrust / rotors_per_group / thrust_coefficient);
}

AllocationMatrix allocationMatrix(const AllocatorGeometry& geom) {
  AllocationMatrix a;
  const double kappa = geom.drag_coefficient / geom.thrust_coefficient;
  for (int i = 0; i < 6; ++i) {
    const Vector3 r = geom.groupPosition(i);
    const Vector3 dirs[2] = {Vector3::UnitZ(), geom.tiltTangent(i)};
    for (int k = 0; k < 2; ++k) {
      a.block<3, 1>(0, 2 * i + k) = dirs[k];
      a.block<3, 1>(3, 2 * i + k) = r.cross(dirs[k]) + geom.spin[i] * kappa * dirs[k];
    }
  }
  return a;
}

Wrench forwardWrench(const ActuatorCommand& cmd, const AllocatorGeometry& geom) {
  Wrench w;
  w.frame = Frame::Body;
  for (int i = 0; i < 6; ++i) {
    const Vector3 n = geom.thrustDirection(i, cmd.tilt(i));
    const Vector3 r = geom.groupPosition(i);
    for (int k = 0; k < geom.rotors_per_group; ++k) {
      const double u = cmd.rotor_speeds(geom.rotors_per_group * i + k);
      const Vector3 f = geom.thrust_coefficient * u * u * n;
      w.force += f;
      w.torque += r.cross(f) + geom.spin[i] * geom.drag_coefficient * u * u * n;
    }
  }
  return w;
}

Vector6 groupThrusts(const ActuatorCommand& cmd, const AllocatorGeometry& geom) {
  Vector6 t = Vector6::Zero();
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < geom.rotors_per_group; ++k) {
      const double u = cmd.rotor_speeds(geom.rotors_per_group * i + k);
      t(i) += geom.thrust_coefficient * u * u;
    }
  return t;
}

Allocator::Allocator(AllocatorGeometry geom) : geom_(geom), a_(allocationMatrix(geom_)) {}

const Allocator::Solver& Allocator::solverFor(unsigned mask) {
  auto it = solvers_.find(mask);
  if (it != solvers_.end()) return it->second;
  AllocationMatrix masked = a_;
  for (int i = 0; i < 6; ++i)
    if (!(mask & (1u << i))) masked.middleCols<2>(2 * i).setZero();
  Eigen::CompleteOrthogonalDecomposition<AllocationMatrix> cod(masked);
  Solver s;
  s.full_rank = cod.rank() == 6;
  s.pinv = cod.pseudoInverse();
  return solvers_.emplace(mask, s).first->second;
}

AllocationResult Allocator::allocate(const Wrench& reference) {
  const double limit = geom_.max_group_thrust;
  const Vector3& force = reference.force;
  const Vector3& torque = reference.torque;

  unsigned mask = kAllGroups;
  DecisionVector x = DecisionVector::Zero();
  double scale = 1.0;
  while (true) {
    const Solver& s = solverFor(mask);
    if (!s.full_rank) {
      // Too few groups left to span the wrench space; switch the remaining
      // weak groups off rather than steer them.
      break;
    }
    const DecisionVector from_force = s.pinv.leftCols<3>() * force;
    const DecisionVector from_torque = s.pinv.rightCols<3>() * torque;
    scale = 1.0;
    for (int i = 0; i < 6; ++i) {
      const Eigen::Vector2d a = from_force.segment<2>(2 * i);
      const Eigen::Vector2d b = from_torque.segment<2>(2 * i);
      if (b.norm() > limit) throw InfeasibleWrench("torque demand exceeds rotor group thrust limit");
      const double aa = a.squaredNorm();
      if ((a + b).norm() <= limit || aa == 0.0) continue;
      const double ab = a.dot(b);
      const double disc = ab * ab - aa * (b.squaredNorm() - limit * limit);
      const double root = (-ab + std::sqrt(std::max(0.0, disc))) / aa;
      scale = std::min(scale, root);
    }
    if (scale < 1.0) scale = std::max(0.0, scale * (1.0 - 1e-12));
    x = scale * from_force + from_torque;

    unsigned weak = 0;
    for (int i = 0; i < 6; ++i)
      if ((mask & (1u << i)) && x.segment<2>(2 * i).norm() < geom_.hold_threshold) weak |= 1u << i;
    if (weak == 0) break;
    const unsigned next = mask & ~weak;
    if (next == 0 || !solverFor(next).full_rank) {
      mask = next;
      for (int i = 0; i < 6; ++i)
        if (!(mask & (1u << i))) x.segment<2>(2 * i).setZero();
      break;
    }
    mask = next;
  }

  AllocationResult out;
  out.force_scale = scale;
  out.saturated = scale < 1.0;
  for (int i = 0; i < 6; ++i) {
    const double f_ax = x(2 * i);
    const double f_lat = x(2 * i + 1);
    double thrust = std::hypot(f_ax, f_lat);
    if (thrust < geom_.hold_threshold) {
      x.segment<2>(2 * i).setZero();
      thrust = 0.0;
    } else {
      tilt_(i) = std::atan2(f_lat, f_ax);
    }
    out.group_thrust(i) = thrust;
    const double speed = std::sqrt(thrust / geom_.rotors_per_group / geom_.thrust_coefficient);
    for (int k = 0; k < geom_.rotors_per_group; ++k) out.command.rotor_speeds(geom_.rotors_per_group * i + k) = speed;
  }
  out.command.tilt = tilt_;
  out.decision = x;
  out.achieved = Wrench::fromVector(a_ * x, Frame::Body);
  return out;
}

}  // namespace omniam
