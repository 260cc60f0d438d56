#include "omniam/planner.hpp"

#include <cmath>
#include <stdexcept>

namespace omniam {

const char* toString(PlannerMode m) {
  switch (m) {
    case PlannerMode::Approach: return "approach";
    case PlannerMode::Press: return "press";
    case PlannerMode::Slide: return "slide";
    case PlannerMode::Retreat: return "retreat";
    case PlannerMode::Hold: return "hold";
  }
  return "?";
}

PlannerMode plannerModeFromString(const std::string& s) {
  for (auto m : {PlannerMode::Approach, PlannerMode::Press, PlannerMode::Slide, PlannerMode::Retreat,
                 PlannerMode::Hold})
    if (s == toString(m)) return m;
  throw std::invalid_argument("unknown planner mode: " + s);
}

void PlannerConfig::validate() const {
  if (!(rate > 0.0)) throw std::invalid_argument("planner rate must be positive");
  if (offset < 0.0) throw std::invalid_argument("penetration offset must be non-negative");
  if (standoff < 0.0) throw std::invalid_argument("standoff must be non-negative");
  if (slide_speed < 0.0) throw std::invalid_argument("slide speed must be non-negative");
  if (!(max_speed > 0.0 && max_rate > 0.0 && min_duration > 0.0))
    throw std::invalid_argument("segment limits must be positive");
  if (!(slide_direction.norm() > 0.0)) throw std::invalid_argument("slide direction must be non-zero");
}

WorldSurface toWorld(const SurfaceEstimate& est, const Pose& pose, const VehicleParams& params) {
  const Matrix3 r_wt = pose.orientation * params.toolRotation();
  WorldSurface s;
  s.point = toolTip(pose, params) + r_wt * est.contact;
  s.normal = (r_wt * est.normal).normalized();
  return s;
}

Vector3 toolTip(const Pose& pose, const VehicleParams& params) {
  return pose.position + pose.orientation * params.toolOffset();
}

Matrix3 alignedOrientation(const Matrix3& current, const Vector3& normal, const VehicleParams& params) {
  const Vector3 z_t = -normal.normalized();
  const Vector3 y_cur = current.col(1);
  Vector3 y;
  if (std::abs(z_t.z()) > std::cos(deg2rad(1.0))) {
    y = y_cur - y_cur.dot(z_t) * z_t;
    if (y.norm() < 1e-9) y = z_t.unitOrthogonal();
    y.normalize();
  } else {
    y = Vector3::UnitZ().cross(z_t).normalized();
    if (y.dot(y_cur) < 0.0) y = -y;
  }
  Matrix3 tool;
  tool.col(0) = y.cross(z_t);
  tool.col(1) = y;
  tool.col(2) = z_t;
  return tool * params.toolRotation().transpose();
}

Pose targetPose(const Pose& current, const WorldSurface& surface, double depth, const VehicleParams& params) {
  Pose p;
  p.orientation = alignedOrientation(current.orientation, surface.normal, params);
  const Vector3 tip = surface.point - depth * surface.normal;
  p.position = tip - p.orientation * params.toolOffset();
  return p;
}

SlideStep slideSetpoint(const Vector3& tip, const WorldSurface& surface, const Vector3& direction, double step,
                        double depth) {
  const Vector3& n = surface.normal;
  SlideStep out;
  Vector3 t = direction - direction.dot(n) * n;
  out.tangent = t.norm() > 1e-12 ? Vector3(t.normalized()) : Vector3::Zero();
  const Vector3 moved = tip + step * out.tangent;
  const Vector3 on_plane = moved - (moved - surface.point).dot(n) * n;
  out.tip = on_plane - depth * n;
  return out;
}

SurfacePlanner::SurfacePlanner(PlannerConfig cfg, VehicleParams params, const Pose& initial, double t0)
    : cfg_(std::move(cfg)), params_(std::move(params)), segment_(TrajectorySegment::hold(initial, t0)),
      last_valid_(t0) {
  cfg_.validate();
}

void SurfacePlanner::replan(double t, const Pose& target, double duration, const Vector3& end_velocity) {
  segment_ = TrajectorySegment(sample(t), target, t, duration, end_velocity);
}

void SurfacePlanner::tick(double t, const Pose& measured, const SurfaceEstimate& est, PlannerMode mode) {
  if (est.valid) {
    surface_ = toWorld(est, measured, params_);
    last_valid_ = t;
  }
  const bool stale = !est.valid && t - last_valid_ > cfg_.hold_after;
  if (mode == PlannerMode::Hold || !surface_ || stale) {
    if (active_ != PlannerMode::Hold) {
      // Bring the stream to rest with a smooth stop from its current motion.
      const Setpoint now = sample(t);
      Pose rest = now.pose;
      rest.position += 0.5 * cfg_.min_duration * now.velocity.head<3>();
      segment_ = TrajectorySegment(now, rest, t, cfg_.min_duration);
      active_ = PlannerMode::Hold;
    }
    return;
  }

  const Setpoint now = sample(t);
  const WorldSurface& surf = *surface_;
  const Vector3& n = surf.normal;
  const Matrix3 orient = alignedOrientation(now.pose.orientation, n, params_);
  auto project = [&](const Vector3& p) { return Vector3(p - (p - surf.point).dot(n) * n); };

  Vector3 tip;
  Vector3 end_velocity = Vector3::Zero();
  double duration = 0.0;
  switch (mode) {
    case PlannerMode::Approach:
      tip = surf.point + cfg_.standoff * n;
      break;
    case PlannerMode::Press:
      tip = project(target_tip_.value_or(surf.point)) - cfg_.offset * n;
      break;
    case PlannerMode::Slide: {
      const Vector3 dir = measured.orientation * params_.toolRotation() * cfg_.slide_direction.normalized();
      const SlideStep s =
          slideSetpoint(target_tip_.value_or(surf.point), surf, dir, cfg_.slide_speed / cfg_.rate, cfg_.offset);
      tip = s.tip;
      end_velocity = cfg_.slide_speed * s.tangent;
      duration = 1.0 / cfg_.rate;
      break;
    }
    case PlannerMode::Retreat:
      tip = project(target_tip_.value_or(toolTip(now.pose, params_))) + cfg_.standoff * n;
      break;
    case PlannerMode::Hold:
      return;
  }

  Pose target;
  target.orientation = orient;
  target.position = tip - orient * params_.toolOffset();
  const PlannerMode previous = active_;
  active_ = mode;
  target_tip_ = tip;

  const Pose& old = segment_.target();
  if (mode != PlannerMode::Slide && previous == mode && (old.position - target.position).norm() < 1e-6 &&
      rotationAngle(old.orientation, target.orientation) < 1e-6)
    return;
  if (duration == 0.0)
    duration = segmentDuration((target.position - now.pose.position).norm(),
                               rotationAngle(now.pose.orientation, target.orientation), cfg_.max_speed,
                               cfg_.max_rate, cfg_.min_duration);
  replan(t, target, duration, end_velocity);
}

}  // namespace omniam
