#pragma once

#include "omniam/geometry.hpp"
#include "omniam/impedance.hpp"

namespace omniam {

/// Fifth-order polynomial matching position, velocity and acceleration at
/// both ends of [0, T].
template <int N>
class Quintic {
 public:
  using Vec = Eigen::Matrix<double, N, 1>;

  Quintic() { c_.setZero(); }
  Quintic(const Vec& p0, const Vec& v0, const Vec& a0, const Vec& p1, const Vec& v1, const Vec& a1, double t)
      : duration_(t) {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    c_.col(0) = p0;
    c_.col(1) = v0;
    c_.col(2) = 0.5 * a0;
    const Vec dp = p1 - p0 - v0 * t - 0.5 * a0 * t2;
    const Vec dv = v1 - v0 - a0 * t;
    const Vec da = a1 - a0;
    c_.col(3) = (20.0 * dp - 8.0 * dv * t + da * t2) / (2.0 * t3);
    c_.col(4) = (-30.0 * dp + 14.0 * dv * t - 2.0 * da * t2) / (2.0 * t4);
    c_.col(5) = (12.0 * dp - 6.0 * dv * t + da * t2) / (2.0 * t5);
  }

  double duration() const { return duration_; }

  /// Derivative `order` (0..2) at s in [0, T].
  Vec eval(double s, int order = 0) const {
    Vec out = Vec::Zero();
    double pw = 1.0;
    for (int k = order; k < 6; ++k) {
      double f = 1.0;
      for (int j = 0; j < order; ++j) f *= k - j;
      out += f * pw * c_.col(k);
      pw *= s;
    }
    return out;
  }

 private:
  Eigen::Matrix<double, N, 6> c_;
  double duration_ = 0.0;
};

/// Right Jacobian of SO(3): body rate of R0 exp(theta) is Jr(theta) theta_dot.
Matrix3 rightJacobian(const Vector3& theta);

/// max(distance / v_max, angle / w_max, t_min)
double segmentDuration(double distance, double angle, double max_speed = 0.2, double max_rate = 0.3,
                       double min_duration = 1.0);

/// Smooth transition from a set point (with its velocity and acceleration)
/// to a target pose. Position follows a quintic in world coordinates. The
/// rotation is R0 exp(theta(t)) with a quintic theta, which for a start at
/// rest is the constant-axis geodesic. After the end the pose moves on with
/// the end velocity.
class TrajectorySegment {
 public:
  TrajectorySegment() = default;
  TrajectorySegment(const Setpoint& from, const Pose& to, double start_time, double duration,
                    const Vector3& end_velocity = Vector3::Zero());

  /// Constant set point.
  static TrajectorySegment hold(const Pose& pose, double start_time);

  Setpoint sample(double t) const;
  double startTime() const { return t0_; }
  double endTime() const { return t0_ + position_.duration(); }
  const Pose& target() const { return target_; }
  const Vector3& endVelocity() const { return end_velocity_; }

 private:
  Quintic<3> position_;
  Quintic<3> rotation_;
  Matrix3 r0_ = Matrix3::Identity();
  Pose target_;
  Vector3 end_velocity_ = Vector3::Zero();
  double t0_ = 0.0;
};

}  // namespace omniam
