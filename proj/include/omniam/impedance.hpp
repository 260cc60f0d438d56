#pragma once

#include "omniam/geometry.hpp"
#include "omniam/vehicle.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace omniam {

class NonPositiveGain : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Desired closed-loop impedance M_v v_dot + D_v v~ + K_v x~ = tau_e.
///
/// M_v is given as per-axis multipliers m* of the vehicle inertia. Damping
/// and stiffness are physical values. All three are diagonal in `frame`:
/// the tool frame (selectivity along the tool axes) or the body frame.
struct ImpedanceGains {
  Vector6 inertia_multiplier = Vector6::Ones();
  Vector6 damping = Vector6::Ones();    // [N s/m | N m s/rad]
  Vector6 stiffness = Vector6::Ones();  // [N/m | N m/rad]
  Frame frame = Frame::Tool;

  /// Throws NonPositiveGain unless every entry is positive.
  void validate() const;
};

struct NormalizedGains {
  Matrix6 inertia;    // M~_v = M^-1 M_v = diag(m*)
  Matrix6 damping;    // D~_v = M~_v^-1 D_v
  Matrix6 stiffness;  // K~_v = M~_v^-1 K_v
};

NormalizedGains normalizedGains(const VehicleParams& params, const ImpedanceGains& gains);

/// Default shape of the normalized gains: stiffness K~ per axis and damping
/// for a damping ratio of 0.9 on the nominal inertia.
struct GainDesign {
  Vector3 translational_stiffness = Vector3::Constant(72.0);  // K~ [N/m]
  Vector3 rotational_stiffness = Vector3::Constant(10.0);     // K~ [N m/rad]
  double damping_ratio = 0.9;
};

/// Physical gains that realize the design for given multipliers.
ImpedanceGains designGains(const VehicleParams& params, const Vector6& multipliers, Frame frame,
                           const GainDesign& design = {});

/// Named experiment configuration: arm pitch plus impedance gains.
struct GainPreset {
  std::string name;
  double arm_pitch = 0.0;  // [rad]
  Vector6 multipliers = Vector6::Ones();
  Frame frame = Frame::Tool;

  ImpedanceGains gains(const VehicleParams& params, const GainDesign& design = {}) const;
};

const std::vector<GainPreset>& gainPresets();
/// Throws std::out_of_range for unknown names.
const GainPreset& gainPreset(const std::string& name);

/// Reference for the controller. Velocities and accelerations are expressed
/// in the world frame (linear, then angular).
struct Setpoint {
  Pose pose;
  Vector6 velocity = Vector6::Zero();
  Vector6 acceleration = Vector6::Zero();
};

/// x~ = (R^T (p - p_d), log(R_d^T R)), in the body frame.
Vector6 poseError(const Pose& pose, const Pose& desired);
/// v~ = v - (R^T v_d, R^T w_d), in the body frame.
Vector6 twistError(const Pose& pose, const Twist& twist, const Setpoint& sp);

/// Controller inputs expressed in the body frame, kept for logging and tests.
struct ControlTerms {
  Vector6 pose_error = Vector6::Zero();
  Vector6 twist_error = Vector6::Zero();
  Wrench feedthrough;
  Wrench wrench;
};

/// Actuation wrench that imposes the desired impedance:
///   (R M~^-1 R^T - I) tau_e^ - R D~ R^T v~ - R K~ R^T x~ + C v + g + M R^T a_d
/// with R = blockdiag(R_bt, R_bt) for tool-frame gains and R = I otherwise.
/// `params` should be the nominal model. Throws AngleNearPi for attitude
/// errors near pi.
ControlTerms controlTerms(const Pose& pose, const Twist& twist, const Setpoint& sp, const Wrench& estimate,
                          const ImpedanceGains& gains, const Matrix3& r_bt, const VehicleParams& params);

inline Wrench controlWrench(const Pose& pose, const Twist& twist, const Setpoint& sp, const Wrench& estimate,
                            const ImpedanceGains& gains, const Matrix3& r_bt, const VehicleParams& params) {
  return controlTerms(pose, twist, sp, estimate, gains, r_bt, params).wrench;
}

/// Gain-frame rotation used by the controller.
Matrix6 gainRotation(const ImpedanceGains& gains, const Matrix3& r_bt);

/// One control step of a logged run: body-frame errors, body acceleration
/// relative to the feedforward, and the true external wrench.
struct ClosedLoopSample {
  Vector6 pose_error = Vector6::Zero();
  Vector6 twist_error = Vector6::Zero();
  Vector6 acceleration_error = Vector6::Zero();
  Wrench external;
};

/// M_v v_dot + D_v v~ + K_v x~ - tau_e with the gains rotated into the body
/// frame. Vanishes for an exact model, an ideal estimate and no saturation.
Vector6 closedLoopResidual(const ClosedLoopSample& s, const ImpedanceGains& gains, const Matrix3& r_bt,
                           const VehicleParams& params);

}  // namespace omniam
