#pragma once

#include "omniam/geometry.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace omniam {

/// Half-space bounded by a plane; `normal` points out of the solid.
struct Plane {
  Vector3 point = Vector3::Zero();
  Vector3 normal = Vector3::UnitZ();
  /// Marks a rigid force-sensor wall whose contact force is sampled separately.
  bool force_sensor = false;
};

/// Infinite circular cylinder. A concave cylinder is a vault seen from the
/// inside (solid beyond the radius); a convex one is a pillar.
struct Cylinder {
  Vector3 axis_point = Vector3::Zero();
  Vector3 axis_direction = Vector3::UnitY();
  double radius = 1.0;
  bool concave = true;
};

using Primitive = std::variant<Plane, Cylinder>;

struct ContactParams {
  double stiffness = 2000.0;      // [N/m]
  double damping = 50.0;          // [N s/m]
  double friction = 0.3;          // Coulomb coefficient
  double velocity_epsilon = 1e-3; // friction regularization [m/s]
};

struct Scene {
  std::vector<Primitive> primitives;
  ContactParams contact;

  /// Throws std::invalid_argument on non-unit normals or negative coefficients.
  void validate() const;
};

struct Penetration {
  double depth = -1.0;            // > 0 means the point is inside the solid
  Vector3 normal = Vector3::UnitZ();  // outward surface normal at the closest point
};

Penetration penetration(const Primitive& p, const Vector3& point);

/// Nearest ray parameter t > 0 at which the ray hits a surface facing it.
std::optional<double> intersectRay(const Primitive& p, const Vector3& origin, const Vector3& direction);

/// Tool-tip contact against every primitive of a scene.
struct ContactResult {
  Wrench body;                          // wrench on the vehicle at the body origin
  Vector3 world_force = Vector3::Zero();
  Vector3 sensor_force = Vector3::Zero(); // part of world_force coming from force-sensor primitives
  double normal_force = 0.0;            // sum of normal force magnitudes
  double max_penetration = -1.0;        // signed; the deepest primitive
  bool in_contact = false;
};

/// Penalty contact at the tool tip: normal force max(0, k d + c d_dot) along
/// the outward normal plus regularized Coulomb friction, mapped to the body
/// origin.
ContactResult contactWrench(const Pose& pose, const Twist& twist, const Vector3& tool_offset, const Scene& scene);

}  // namespace omniam
