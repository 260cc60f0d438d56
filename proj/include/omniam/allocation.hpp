#pragma once

#include "omniam/geometry.hpp"
#include "omniam/vehicle.hpp"

#include <array>
#include <map>
#include <stdexcept>

namespace omniam {

using RotorVector = Eigen::Matrix<double, 12, 1>;
using AllocationMatrix = Eigen::Matrix<double, 6, 12>;
using DecisionVector = Eigen::Matrix<double, 12, 1>;

/// 12 rotor speeds [rad/s] and 6 tilt angles [rad]. Rotors 2i and 2i+1 form group i.
struct ActuatorCommand {
  RotorVector rotor_speeds = RotorVector::Zero();
  Vector6 tilt = Vector6::Zero();
};

/// Hexarotor with tiltable double-rotor groups on arms at azimuth i * 60 deg.
///
/// Tilting group i by alpha rotates its thrust about the arm axis e_i, so the
/// thrust direction is cos(alpha) z_b + sin(alpha) (e_i x z_b). Both rotors of
/// a group are co-located and spin the same way; neighbouring groups alternate.
struct AllocatorGeometry {
  double arm_length = 0.3;
  double thrust_coefficient = 1e-5;    // c_f [N s^2/rad^2]
  double drag_coefficient = 1.6e-7;    // c_d [N m s^2/rad^2]
  double max_group_thrust = 20.0;      // [N]
  double hold_threshold = 0.05;        // below this group thrust the tilt is held [N]
  std::array<int, 6> spin{+1, -1, +1, -1, +1, -1};
  int rotors_per_group = 2;

  static AllocatorGeometry fromParams(const VehicleParams& p);

  double azimuth(int group) const;
  Vector3 armAxis(int group) const;
  Vector3 groupPosition(int group) const { return arm_length * armAxis(group); }
  /// Thrust direction of the group for zero tilt is z_b; this is its tilt-tangent.
  Vector3 tiltTangent(int group) const { return armAxis(group).cross(Vector3::UnitZ()); }
  Vector3 thrustDirection(int group, double tilt) const;
  double maxRotorSpeed() const;
};

/// Linear map from x = (f_i^ax, f_i^lat), interleaved per group, to the body
/// wrench, including lever arms and drag torques (scaled by c_d / c_f).
AllocationMatrix allocationMatrix(const AllocatorGeometry& geom);

/// Exact forward map from rotor speeds and tilt angles to the body wrench.
Wrench forwardWrench(const ActuatorCommand& cmd, const AllocatorGeometry& geom);

/// Thrust of each group (sum over its rotors) implied by a command.
Vector6 groupThrusts(const ActuatorCommand& cmd, const AllocatorGeometry& geom);

class InfeasibleWrench : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AllocationResult {
  ActuatorCommand command;
  Vector6 group_thrust = Vector6::Zero();
  DecisionVector decision = DecisionVector::Zero();
  Wrench achieved;            // A x after saturation and tilt holding
  double force_scale = 1.0;   // factor applied to the force part
  bool saturated = false;
};

/// Minimum-norm allocation with tilt memory.
///
/// The reference wrench is solved through the pseudo-inverse of the
/// allocation matrix. If a group would exceed its thrust limit the force part
/// of the wrench is scaled by one common factor (torque kept), which raises
/// `saturated`. Groups whose thrust would fall below the hold threshold are
/// switched off and keep their previous tilt; the remaining groups are
/// re-solved so the requested wrench is still produced exactly.
class Allocator {
 public:
  explicit Allocator(AllocatorGeometry geom = {});

  /// Throws InfeasibleWrench when the torque demand alone exceeds a group limit.
  AllocationResult allocate(const Wrench& reference);

  const AllocatorGeometry& geometry() const { return geom_; }
  const AllocationMatrix& matrix() const { return a_; }
  const Vector6& heldTilt() const { return tilt_; }
  void setTilt(const Vector6& tilt) { tilt_ = tilt; }

 private:
  struct Solver {
    Eigen::Matrix<double, 12, 6> pinv;
    bool full_rank = false;
  };
  const Solver& solverFor(unsigned mask);

  AllocatorGeometry geom_;
  AllocationMatrix a_;
  Vector6 tilt_ = Vector6::Zero();
  std::map<unsigned, Solver> solvers_;
};

}  // namespace omniam
