#pragma once

#include "omniam/geometry.hpp"

#include <numbers>

namespace omniam {

inline constexpr double kGravity = 9.81;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Rigid-body and geometric parameters of the tilt-rotor platform.
///
/// Defaults follow the platform's published main parameters (mass, rotor
/// group distance, per-group thrust limit, six double-rotor groups). Body
/// inertia, tool length and camera placement are not published and are
/// plausible values for a vehicle of this size.
struct VehicleParams {
  double mass = 4.75;                           // [kg]
  Vector3 inertia = Vector3(0.09, 0.09, 0.16);  // principal moments [kg m^2]
  double arm_pitch = std::numbers::pi / 2;      // declination from -z_b [rad]
  double tool_length = 0.375;                   // body origin to tool tip [m]
  double camera_offset = 0.1;                   // body origin to camera, along the arm [m]
  double group_distance = 0.3;                  // rotor group to body origin [m]
  double max_group_thrust = 20.0;               // [N]
  int group_count = 6;
  int rotors_per_group = 2;
  /// Center-of-mass offset from the body origin. The controller and the
  /// estimator always run on a copy with this zeroed.
  Vector3 com_offset = Vector3::Zero();

  /// blockdiag(m I, J)
  Matrix6 inertiaMatrix() const;

  /// Unit vector from the body origin through the tool tip (the tool z axis).
  Vector3 armDirection() const;

  /// R_bt: tool axes as columns in body coordinates.
  Matrix3 toolRotation() const;

  /// Tool tip in body coordinates.
  Vector3 toolOffset() const { return tool_length * armDirection(); }
  Vector3 cameraPosition() const { return camera_offset * armDirection(); }

  /// Copy with the unmodeled center-of-mass offset removed.
  VehicleParams nominal() const;

  /// Throws std::invalid_argument on non-physical values.
  void validate() const;
};

}  // namespace omniam
