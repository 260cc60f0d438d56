#pragma once

#include "omniam/geometry.hpp"
#include "omniam/vehicle.hpp"

#include <optional>

namespace omniam {

/// Generalized-momentum observer of the external body wrench.
///
/// Integrates tau_a - C v - g + tau_e^ with explicit Euler and returns
/// tau_e^ = K_I (M v - integral). For an exact model the estimate is a
/// first-order low-pass of the true wrench with time constants 1 / K_I,ii.
/// Only velocities enter; there is no acceleration input.
class MomentumObserver {
 public:
  /// Throws NonPositiveGain unless every gain entry is positive.
  explicit MomentumObserver(const VehicleParams& params, const Vector6& gain = Vector6::Ones());

  /// Re-initializes so the estimate is zero for the current momentum.
  void reset(const Twist& v);

  /// `actuation` is the wrench the actuators were asked to produce over the
  /// elapsed interval (after allocation and saturation).
  const Wrench& update(const Twist& v, const Wrench& actuation, const Matrix3& r, double dt);

  const Wrench& estimate() const { return estimate_; }
  const Vector6& integral() const { return integral_; }
  const Vector6& gain() const { return gain_; }

 private:
  VehicleParams params_;
  Matrix6 inertia_;
  Vector6 gain_;
  Vector6 integral_ = Vector6::Zero();
  Wrench estimate_;
  Twist prev_twist_;
  std::optional<Matrix3> prev_rotation_;
  bool initialized_ = false;
};

}  // namespace omniam
