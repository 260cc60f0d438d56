#include "omniam/vehicle.hpp"

namespace omniam {

Matrix6 VehicleParams::inertiaMatrix() const {
  Matrix6 m = Matrix6::Zero();
  m.topLeftCorner<3, 3>() = mass * Matrix3::Identity();
  m.bottomRightCorner<3, 3>() = inertia.asDiagonal();
  return m;
}

Vector3 VehicleParams::armDirection() const {
  // -z_b rotated towards +x_b by the arm pitch; the arm stays in the x_b-z_b plane.
  return Vector3(std::sin(arm_pitch), 0.0, -std::cos(arm_pitch));
}

Matrix3 VehicleParams::toolRotation() const {
  const Vector3 z_t = armDirection();
  const Vector3 y_t = Vector3::UnitY();
  Matrix3 r;
  r.col(0) = y_t.cross(z_t);
  r.col(1) = y_t;
  r.col(2) = z_t;
  return r;
}

VehicleParams VehicleParams::nominal() const {
  VehicleParams p = *this;
  p.com_offset.setZero();
  return p;
}

void VehicleParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("vehicle mass must be positive");
  if (!(inertia.array() > 0.0).all()) throw std::invalid_argument("principal inertia entries must be positive");
  if (!(group_distance > 0.0)) throw std::invalid_argument("rotor group distance must be positive");
  if (!(max_group_thrust > 0.0)) throw std::invalid_argument("max group thrust must be positive");
  if (group_count != 6 || rotors_per_group != 2)
    throw std::invalid_argument("only the six double-rotor group layout is supported");
  if (!(tool_length > 0.0)) throw std::invalid_argument("tool length must be positive");
  if (!com_offset.allFinite()) throw std::invalid_argument("center-of-mass offset must be finite");
}

}  // namespace omniam
