#include "omniam/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace omniam {

Matrix3 rightJacobian(const Vector3& theta) {
  const double a2 = theta.squaredNorm();
  const Matrix3 k = hat(theta);
  double b, c;
  if (a2 < 1e-8) {
    b = 0.5 - a2 / 24.0;
    c = 1.0 / 6.0 - a2 / 120.0;
  } else {
    const double a = std::sqrt(a2);
    b = (1.0 - std::cos(a)) / a2;
    c = (a - std::sin(a)) / (a2 * a);
  }
  return Matrix3::Identity() - b * k + c * k * k;
}

double segmentDuration(double distance, double angle, double max_speed, double max_rate, double min_duration) {
  return std::max({distance / max_speed, angle / max_rate, min_duration});
}

TrajectorySegment::TrajectorySegment(const Setpoint& from, const Pose& to, double start_time, double duration,
                                     const Vector3& end_velocity)
    : r0_(from.pose.orientation), target_(to), end_velocity_(end_velocity), t0_(start_time) {
  if (!(duration > 0.0)) throw std::invalid_argument("segment duration must be positive");
  position_ = Quintic<3>(from.pose.position, from.velocity.head<3>(), from.acceleration.head<3>(), to.position,
                         end_velocity, Vector3::Zero(), duration);
  const Vector3 theta1 = logSO3(r0_.transpose() * to.orientation);
  // At theta = 0 the body rate equals theta_dot.
  const Vector3 w0 = r0_.transpose() * from.velocity.tail<3>();
  const Vector3 dw0 = r0_.transpose() * from.acceleration.tail<3>();
  rotation_ = Quintic<3>(Vector3::Zero(), w0, dw0, theta1, Vector3::Zero(), Vector3::Zero(), duration);
}

TrajectorySegment TrajectorySegment::hold(const Pose& pose, double start_time) {
  Setpoint sp;
  sp.pose = pose;
  return TrajectorySegment(sp, pose, start_time, 1.0);
}

Setpoint TrajectorySegment::sample(double t) const {
  const double T = position_.duration();
  const double s = std::clamp(t - t0_, 0.0, T);
  Setpoint sp;
  sp.pose.position = position_.eval(s);
  sp.velocity.head<3>() = position_.eval(s, 1);
  sp.acceleration.head<3>() = position_.eval(s, 2);
  if (t - t0_ > T) {
    sp.pose.position += (t - t0_ - T) * end_velocity_;
    sp.velocity.head<3>() = end_velocity_;
    sp.acceleration.head<3>().setZero();
  }
  const Vector3 theta = rotation_.eval(s);
  const Matrix3 r = r0_ * expSO3(theta);
  const Matrix3 jr = rightJacobian(theta);
  sp.pose.orientation = r;
  sp.velocity.tail<3>() = r * jr * rotation_.eval(s, 1);
  sp.acceleration.tail<3>() = r * jr * rotation_.eval(s, 2);
  return sp;
}

}  // namespace omniam
