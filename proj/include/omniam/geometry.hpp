#pragma once

// Frame-tagged 6-DOF quantities and the small slice of SO(3) the controller
// and simulator need. Everything here is header-only and templated on the
// scalar type so the functions compose with Eigen expressions.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace omniam {

template <typename Scalar> using Vector3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vector6T = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar> using Matrix3T = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Matrix6T = Eigen::Matrix<Scalar, 6, 6>;

using Vector3 = Vector3T<double>;
using Vector6 = Vector6T<double>;
using Matrix3 = Matrix3T<double>;
using Matrix6 = Matrix6T<double>;

enum class Frame { Body, World, Tool };

inline const char* toString(Frame f) {
  switch (f) {
    case Frame::Body: return "body";
    case Frame::World: return "world";
    case Frame::Tool: return "tool";
  }
  return "?";
}

/// Raised by logSO3 when the rotation vector is ambiguous (angle near pi).
class AngleNearPi : public std::domain_error {
 public:
  AngleNearPi() : std::domain_error("rotation angle too close to pi for a unique rotation vector") {}
};

template <typename Scalar>
struct PoseT {
  Vector3T<Scalar> position = Vector3T<Scalar>::Zero();
  /// world <- body
  Matrix3T<Scalar> orientation = Matrix3T<Scalar>::Identity();
};

template <typename Scalar>
struct TwistT {
  Vector3T<Scalar> linear = Vector3T<Scalar>::Zero();
  Vector3T<Scalar> angular = Vector3T<Scalar>::Zero();
  Frame frame = Frame::Body;

  Vector6T<Scalar> vector() const {
    Vector6T<Scalar> v;
    v << linear, angular;
    return v;
  }
  static TwistT fromVector(const Vector6T<Scalar>& v, Frame f = Frame::Body) {
    return TwistT{v.template head<3>(), v.template tail<3>(), f};
  }
};

template <typename Scalar>
struct WrenchT {
  Vector3T<Scalar> force = Vector3T<Scalar>::Zero();
  Vector3T<Scalar> torque = Vector3T<Scalar>::Zero();
  Frame frame = Frame::Body;

  Vector6T<Scalar> vector() const {
    Vector6T<Scalar> v;
    v << force, torque;
    return v;
  }
  static WrenchT fromVector(const Vector6T<Scalar>& v, Frame f = Frame::Body) {
    return WrenchT{v.template head<3>(), v.template tail<3>(), f};
  }
  bool allFinite() const { return force.allFinite() && torque.allFinite(); }

  WrenchT operator+(const WrenchT& o) const { return WrenchT{force + o.force, torque + o.torque, frame}; }
  WrenchT operator-(const WrenchT& o) const { return WrenchT{force - o.force, torque - o.torque, frame}; }
  WrenchT operator*(Scalar s) const { return WrenchT{force * s, torque * s, frame}; }
};

using Pose = PoseT<double>;
using Twist = TwistT<double>;
using Wrench = WrenchT<double>;

template <typename Derived>
Matrix3T<typename Derived::Scalar> hat(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  Matrix3T<S> m;
  m << S(0), -v(2), v(1),
       v(2), S(0), -v(0),
       -v(1), v(0), S(0);
  return m;
}

template <typename Derived>
Vector3T<typename Derived::Scalar> vee(const Eigen::MatrixBase<Derived>& m) {
  return Vector3T<typename Derived::Scalar>(m(2, 1), m(0, 2), m(1, 0));
}

/// Rodrigues map. Small angles use the Taylor expansion of the coefficients.
template <typename Derived>
Matrix3T<typename Derived::Scalar> expSO3(const Eigen::MatrixBase<Derived>& rotvec) {
  using S = typename Derived::Scalar;
  const S theta2 = rotvec.squaredNorm();
  const Matrix3T<S> k = hat(rotvec);
  S a, b;
  if (theta2 < S(1e-8)) {
    a = S(1) - theta2 / S(6) + theta2 * theta2 / S(120);
    b = S(0.5) - theta2 / S(24) + theta2 * theta2 / S(720);
  } else {
    const S theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (S(1) - std::cos(theta)) / theta2;
  }
  return Matrix3T<S>::Identity() + a * k + b * k * k;
}

/// Inverse of expSO3 for angles below pi. Throws AngleNearPi when
/// trace(R) <= -1 + 1e-6.
template <typename Derived>
Vector3T<typename Derived::Scalar> logSO3(const Eigen::MatrixBase<Derived>& r) {
  using S = typename Derived::Scalar;
  const S tr = r.trace();
  if (tr <= S(-1) + S(1e-6)) throw AngleNearPi();
  const Vector3T<S> w = S(0.5) * vee(r - r.transpose());  // sin(theta) * axis
  const S sin_theta = w.norm();
  const S cos_theta = std::clamp((tr - S(1)) / S(2), S(-1), S(1));
  const S theta = std::atan2(sin_theta, cos_theta);
  if (theta < S(1e-5)) {
    return (S(1) + theta * theta / S(6)) * w;
  }
  if (theta < S(2.5)) {
    return (theta / sin_theta) * w;
  }
  // Near pi the antisymmetric part loses precision; recover the axis from
  // the symmetric part (1 - cos) a a^T instead.
  const Matrix3T<S> sym = S(0.5) * (r + r.transpose()) - cos_theta * Matrix3T<S>::Identity();
  Eigen::Index col = 0;
  sym.diagonal().maxCoeff(&col);
  Vector3T<S> axis = sym.col(col).normalized();
  if (axis.dot(w) < S(0)) axis = -axis;
  return theta * axis;
}

/// Geodesic angle between two rotations, valid over the full [0, pi] range.
template <typename DA, typename DB>
typename DA::Scalar rotationAngle(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using S = typename DA::Scalar;
  const Matrix3T<S> rel = a.transpose() * b;
  const S sin_theta = (S(0.5) * vee(rel - rel.transpose())).norm();
  const S cos_theta = std::clamp((rel.trace() - S(1)) / S(2), S(-1), S(1));
  return std::atan2(sin_theta, cos_theta);
}

/// Gram-Schmidt on the columns; restores R^T R = I after long integrations.
template <typename Derived>
Matrix3T<typename Derived::Scalar> orthonormalize(const Eigen::MatrixBase<Derived>& r) {
  using S = typename Derived::Scalar;
  Matrix3T<S> out;
  Vector3T<S> x = r.col(0).normalized();
  Vector3T<S> y = r.col(1) - x.dot(r.col(1)) * x;
  y.normalize();
  out.col(0) = x;
  out.col(1) = y;
  out.col(2) = x.cross(y);
  return out;
}

template <typename Derived>
typename Derived::Scalar orthonormalityError(const Eigen::MatrixBase<Derived>& r) {
  using S = typename Derived::Scalar;
  return (r.transpose() * r - Matrix3T<S>::Identity()).cwiseAbs().maxCoeff();
}

template <typename Scalar>
Matrix3T<Scalar> rotationX(Scalar a) { return Eigen::AngleAxis<Scalar>(a, Vector3T<Scalar>::UnitX()).toRotationMatrix(); }
template <typename Scalar>
Matrix3T<Scalar> rotationY(Scalar a) { return Eigen::AngleAxis<Scalar>(a, Vector3T<Scalar>::UnitY()).toRotationMatrix(); }
template <typename Scalar>
Matrix3T<Scalar> rotationZ(Scalar a) { return Eigen::AngleAxis<Scalar>(a, Vector3T<Scalar>::UnitZ()).toRotationMatrix(); }

/// Z-Y-X (yaw, pitch, roll) composition: R = Rz(yaw) Ry(pitch) Rx(roll).
template <typename Scalar>
Matrix3T<Scalar> fromRollPitchYaw(Scalar roll, Scalar pitch, Scalar yaw) {
  return rotationZ(yaw) * rotationY(pitch) * rotationX(roll);
}

template <typename Derived>
Vector3T<typename Derived::Scalar> toRollPitchYaw(const Eigen::MatrixBase<Derived>& r) {
  using S = typename Derived::Scalar;
  const S pitch = std::asin(std::clamp(-r(2, 0), S(-1), S(1)));
  const S roll = std::atan2(r(2, 1), r(2, 2));
  const S yaw = std::atan2(r(1, 0), r(0, 0));
  return Vector3T<S>(roll, pitch, yaw);
}

/// blockdiag(R, R) for a frame rotation R.
template <typename Derived>
Matrix6T<typename Derived::Scalar> blockDiagonal(const Eigen::MatrixBase<Derived>& r) {
  using S = typename Derived::Scalar;
  Matrix6T<S> out = Matrix6T<S>::Zero();
  out.template topLeftCorner<3, 3>() = r;
  out.template bottomRightCorner<3, 3>() = r;
  return out;
}

/// Expresses a gain given along tool axes in the body frame.
///
/// `r_bt` holds the tool axes as columns in body coordinates, so a tool-frame
/// vector maps to the body as R x_t. The body-frame gain is R G R^T with
/// R = blockdiag(r_bt, r_bt); this is the same similarity the controller
/// applies to the apparent-inertia, damping and stiffness matrices.
template <typename DG, typename DR>
Matrix6T<typename DG::Scalar> conjugateGain(const Eigen::MatrixBase<DG>& gain_tool,
                                             const Eigen::MatrixBase<DR>& r_bt) {
  const auto r = blockDiagonal(r_bt);
  return r * gain_tool * r.transpose();
}

/// Moves a wrench applied at body-frame point `r` to the body origin.
template <typename Scalar, typename DR>
WrenchT<Scalar> wrenchAtOrigin(const WrenchT<Scalar>& w, const Eigen::MatrixBase<DR>& r) {
  return WrenchT<Scalar>{w.force, w.torque + r.cross(w.force), w.frame};
}

}  // namespace omniam
