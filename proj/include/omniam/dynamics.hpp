#pragma once

#include "omniam/allocation.hpp"
#include "omniam/geometry.hpp"
#include "omniam/scene.hpp"
#include "omniam/vehicle.hpp"

#include <stdexcept>
#include <vector>

namespace omniam {

/// Rigid-body state. Pose is world <- body; the twist is in the body frame.
struct SimState {
  Pose pose;
  Twist twist;
  double time = 0.0;
};

class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// g of M v_dot + C v + g = tau_a + tau_e: the body wrench actuation must
/// supply to hold the vehicle against gravity (world z up). A center-of-mass
/// offset adds the corresponding torque.
Wrench gravityTerm(const Matrix3& r, const VehicleParams& params);

/// C v in the body-frame Newton-Euler form: (m w x v, w x J w).
Wrench coriolisTerm(const Twist& v, const VehicleParams& params);

/// v_dot = M^-1 (tau_a + tau_e - C v - g), all wrenches in the body frame.
Vector6 forwardDynamics(const Matrix3& r, const Twist& v, const Wrench& actuation, const Wrench& external,
                        const VehicleParams& params);

/// One trapezoidal pull: linear ramp up, hold, linear ramp down.
struct DisturbancePulse {
  double start = 0.0;
  double ramp = 0.0;
  double hold = 0.0;
  double magnitude = 0.0;             // [N]
  Vector3 direction = Vector3::UnitX();
  Frame frame = Frame::World;         // frame of direction and torque
  Vector3 point = Vector3::Zero();    // application point in the body frame
  Vector3 torque = Vector3::Zero();   // pure torque scaled by the same envelope [N m]

  double envelope(double t) const;
};

struct DisturbanceProfile {
  std::vector<DisturbancePulse> pulses;

  /// Total disturbance as a body wrench at the origin.
  Wrench wrench(double t, const Matrix3& r) const;
  void validate() const;
};

/// Optional first-order actuator response; ideal actuators when disabled.
struct ActuatorLag {
  bool enabled = false;
  double rotor_time_constant = 0.03;  // [s]
  double tilt_time_constant = 0.06;   // [s]
};

/// Breakdown of the non-actuation wrench at a state, for logging.
struct ExternalWrench {
  ContactResult contact;
  Wrench disturbance;
  Wrench total() const { return contact.body + disturbance; }
};

/// Fixed-step simulator of the rigid-body model.
///
/// Each call to step() advances by dt with a fourth-order Runge-Kutta scheme
/// (Munthe-Kaas form on the rotation). While the tool is in contact the step
/// is split into equal substeps so the friction regularization and contact
/// stiffness stay inside the integrator's stability region.
class Simulator {
 public:
  Simulator(VehicleParams params, AllocatorGeometry geometry, Scene scene, DisturbanceProfile disturbance,
            ActuatorLag lag = {});

  /// Throws NonFiniteState if the new state has non-finite entries and
  /// std::invalid_argument unless 0 < dt <= 0.01 s.
  SimState step(const SimState& state, const ActuatorCommand& command, double dt);

  ExternalWrench external(const SimState& state) const;

  /// Actuation wrench the rotors currently produce (after lag).
  Wrench actuation() const { return forwardWrench(actual_, geometry_); }
  const ActuatorCommand& actuatorState() const { return actual_; }
  void resetActuators(const ActuatorCommand& cmd) {
    actual_ = cmd;
    initialized_ = true;
  }

  const VehicleParams& params() const { return params_; }
  const AllocatorGeometry& geometry() const { return geometry_; }
  const Scene& scene() const { return scene_; }
  const DisturbanceProfile& disturbance() const { return disturbance_; }
  /// Substeps used by the last call to step().
  int lastSubsteps() const { return last_substeps_; }

 private:
  int substepsFor(const SimState& state, double dt) const;

  VehicleParams params_;
  AllocatorGeometry geometry_;
  Scene scene_;
  DisturbanceProfile disturbance_;
  ActuatorLag lag_;
  ActuatorCommand actual_;
  bool initialized_ = false;
  int last_substeps_ = 1;
};

/// Single integration step with ideal actuators.
SimState step(const SimState& state, const ActuatorCommand& command, const Scene& scene,
              const DisturbanceProfile& disturbance, const VehicleParams& params, const AllocatorGeometry& geometry,
              double dt);

/// Kinetic plus gravitational potential energy (test support).
double mechanicalEnergy(const SimState& state, const VehicleParams& params);

}  // namespace omniam
