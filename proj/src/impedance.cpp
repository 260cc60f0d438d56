#include "omniam/impedance.hpp"

#include "omniam/dynamics.hpp"

#include <cmath>

namespace omniam {

void ImpedanceGains::validate() const {
  if (!(inertia_multiplier.array() > 0.0).all()) throw NonPositiveGain("apparent inertia multipliers must be positive");
  if (!(damping.array() > 0.0).all()) throw NonPositiveGain("damping gains must be positive");
  if (!(stiffness.array() > 0.0).all()) throw NonPositiveGain("stiffness gains must be positive");
  if (frame == Frame::World) throw std::invalid_argument("impedance gains must be given in the tool or body frame");
}

NormalizedGains normalizedGains(const VehicleParams& /*params*/, const ImpedanceGains& gains) {
  gains.validate();
  NormalizedGains n;
  n.inertia = gains.inertia_multiplier.asDiagonal();
  n.damping = gains.damping.cwiseQuotient(gains.inertia_multiplier).asDiagonal();
  n.stiffness = gains.stiffness.cwiseQuotient(gains.inertia_multiplier).asDiagonal();
  return n;
}

ImpedanceGains designGains(const VehicleParams& params, const Vector6& multipliers, Frame frame,
                           const GainDesign& design) {
  ImpedanceGains g;
  g.inertia_multiplier = multipliers;
  g.frame = frame;
  const double rot_inertia = params.inertia.mean();
  for (int i = 0; i < 6; ++i) {
    const double k = i < 3 ? design.translational_stiffness(i) : design.rotational_stiffness(i - 3);
    const double m = i < 3 ? params.mass : rot_inertia;
    g.stiffness(i) = multipliers(i) * k;
    g.damping(i) = multipliers(i) * 2.0 * design.damping_ratio * std::sqrt(k * m);
  }
  g.validate();
  return g;
}

ImpedanceGains GainPreset::gains(const VehicleParams& params, const GainDesign& design) const {
  return designGains(params, multipliers, frame, design);
}

namespace {

GainPreset makePreset(const char* name, double pitch_deg, std::initializer_list<double> m, Frame frame) {
  GainPreset p;
  p.name = name;
  p.arm_pitch = deg2rad(pitch_deg);
  int i = 0;
  for (double v : m) p.multipliers(i++) = v;
  p.frame = frame;
  return p;
}

}  // namespace

const std::vector<GainPreset>& gainPresets() {
  static const std::vector<GainPreset> presets = {
      makePreset("rope-pull-1", 90, {0.25, 0.25, 1, 1, 1, 1}, Frame::Body),
      makePreset("rope-pull-2", 90, {0.1, 0.1, 1, 1, 1, 1}, Frame::Body),
      makePreset("rope-pull-3", 90, {5, 5, 1, 1, 1, 1}, Frame::Body),
      makePreset("rope-pull-4", 90, {5, 5, 5, 5, 5, 0.25}, Frame::Body),
      makePreset("rope-pull-5", 90, {5, 5, 5, 5, 5, 5}, Frame::Body),
      makePreset("push-and-slide", 90, {5, 5, 0.25, 5, 5, 5}, Frame::Tool),
      makePreset("tof-servoing", 30, {5, 5, 0.5, 5, 5, 5}, Frame::Tool),
      makePreset("ndt-contact", 90, {5, 5, 0.25, 5, 5, 5}, Frame::Tool),
      makePreset("force-eval-1", 90, {5, 5, 0.25, 5, 5, 5}, Frame::Tool),
      makePreset("force-eval-2", 90, {5, 5, 2.0, 5, 5, 5}, Frame::Tool),
  };
  return presets;
}

const GainPreset& gainPreset(const std::string& name) {
  for (const auto& p : gainPresets())
    if (p.name == name) return p;
  throw std::out_of_range("unknown gain preset: " + name);
}

Vector6 poseError(const Pose& pose, const Pose& desired) {
  const Matrix3& r = pose.orientation;
  Vector6 e;
  e.head<3>() = r.transpose() * (pose.position - desired.position);
  e.tail<3>() = logSO3(desired.orientation.transpose() * r);
  return e;
}

Vector6 twistError(const Pose& pose, const Twist& twist, const Setpoint& sp) {
  const Matrix3 rt = pose.orientation.transpose();
  Vector6 e;
  e.head<3>() = twist.linear - rt * sp.velocity.head<3>();
  e.tail<3>() = twist.angular - rt * sp.velocity.tail<3>();
  return e;
}

Matrix6 gainRotation(const ImpedanceGains& gains, const Matrix3& r_bt) {
  return gains.frame == Frame::Tool ? blockDiagonal(r_bt) : Matrix6::Identity();
}

ControlTerms controlTerms(const Pose& pose, const Twist& twist, const Setpoint& sp, const Wrench& estimate,
                          const ImpedanceGains& gains, const Matrix3& r_bt, const VehicleParams& params) {
  const NormalizedGains n = normalizedGains(params, gains);
  const Matrix6 rot = gainRotation(gains, r_bt);
  const Matrix6 m = params.inertiaMatrix();

  ControlTerms t;
  t.pose_error = poseError(pose, sp.pose);
  t.twist_error = twistError(pose, twist, sp);

  const Matrix6 m_inv = n.inertia.diagonal().cwiseInverse().asDiagonal();
  const Vector6 feed = (rot * m_inv * rot.transpose() - Matrix6::Identity()) * estimate.vector();
  t.feedthrough = Wrench::fromVector(feed);

  const Matrix3 rt = pose.orientation.transpose();
  Vector6 acc_body;
  acc_body << rt * sp.acceleration.head<3>(), rt * sp.acceleration.tail<3>();

  const Vector6 tau = feed - rot * n.damping * rot.transpose() * t.twist_error -
                      rot * n.stiffness * rot.transpose() * t.pose_error + coriolisTerm(twist, params).vector() +
                      gravityTerm(pose.orientation, params).vector() + m * acc_body;
  t.wrench = Wrench::fromVector(tau);
  return t;
}

Vector6 closedLoopResidual(const ClosedLoopSample& s, const ImpedanceGains& gains, const Matrix3& r_bt,
                           const VehicleParams& params) {
  gains.validate();
  const Matrix6 rot = gainRotation(gains, r_bt);
  const Matrix6 mv = rot * Matrix6(gains.inertia_multiplier.asDiagonal()) * rot.transpose() * params.inertiaMatrix();
  const Matrix6 dv = rot * Matrix6(gains.damping.asDiagonal()) * rot.transpose();
  const Matrix6 kv = rot * Matrix6(gains.stiffness.asDiagonal()) * rot.transpose();
  return mv * s.acceleration_error + dv * s.twist_error + kv * s.pose_error - s.external.vector();
}

}  // namespace omniam
