#pragma once

#include "omniam/impedance.hpp"
#include "omniam/perception.hpp"
#include "omniam/trajectory.hpp"
#include "omniam/vehicle.hpp"

#include <optional>
#include <string>

namespace omniam {

enum class PlannerMode { Approach, Press, Slide, Retreat, Hold };

const char* toString(PlannerMode m);
/// Throws std::invalid_argument for unknown names.
PlannerMode plannerModeFromString(const std::string& s);

struct PlannerConfig {
  double offset = 0.10;     // set point depth behind the surface [m]
  double standoff = 0.30;   // approach distance in front of the surface [m]
  Vector3 slide_direction = -Vector3::UnitX();  // tool frame
  double slide_speed = 0.17;  // [m/s]
  double rate = 5.0;          // [Hz]
  double max_speed = 0.2;     // [m/s]
  double max_rate = 0.3;      // [rad/s]
  double min_duration = 1.0;  // [s]
  double hold_after = 1.0;    // invalid-estimate time before holding [s]

  void validate() const;
};

/// Estimated surface patch in world coordinates.
struct WorldSurface {
  Vector3 point = Vector3::Zero();
  Vector3 normal = Vector3::UnitZ();  // facing the vehicle
};

/// Maps a tool-frame estimate to the world using the (measured) body pose.
/// The tool frame has its origin at the tool tip.
WorldSurface toWorld(const SurfaceEstimate& est, const Pose& pose, const VehicleParams& params);

/// Body orientation with the tool z axis along -normal and the body y axis
/// horizontal. Of the two horizontal choices the one closer to the current
/// body y axis wins. For near-vertical normals (within 1 deg) every yaw is
/// admissible and the current body y axis, projected, is kept.
Matrix3 alignedOrientation(const Matrix3& current, const Vector3& normal, const VehicleParams& params);

/// Body pose that puts the tool tip `depth` behind the surface point along
/// the normal (negative depth means in front) with the aligned orientation.
Pose targetPose(const Pose& current, const WorldSurface& surface, double depth, const VehicleParams& params);

/// Tool tip of a body pose.
Vector3 toolTip(const Pose& pose, const VehicleParams& params);

/// Advances a tool-tip target by `step` along `direction` projected onto the
/// surface plane and re-applies the depth against the plane. Returns the new
/// tip and the unit tangent used.
struct SlideStep {
  Vector3 tip;
  Vector3 tangent;
};
SlideStep slideSetpoint(const Vector3& tip, const WorldSurface& surface, const Vector3& direction, double step,
                        double depth);

/// Re-planning set-point generator driven by surface estimates.
///
/// Every tick the target is rebuilt from the newest estimate and the active
/// segment restarts from the set point currently streamed, so the stream
/// stays continuous while the target follows the surface. An estimate that
/// stays invalid for longer than `hold_after` brings the set point to rest.
class SurfacePlanner {
 public:
  SurfacePlanner(PlannerConfig cfg, VehicleParams params, const Pose& initial, double t0 = 0.0);

  void tick(double t, const Pose& measured, const SurfaceEstimate& est, PlannerMode mode);
  Setpoint sample(double t) const { return segment_.sample(t); }

  PlannerMode activeMode() const { return active_; }
  bool holding() const { return active_ == PlannerMode::Hold; }
  const std::optional<WorldSurface>& surface() const { return surface_; }
  const TrajectorySegment& segment() const { return segment_; }
  std::optional<Vector3> targetTip() const { return target_tip_; }

 private:
  void replan(double t, const Pose& target, double duration, const Vector3& end_velocity);

  PlannerConfig cfg_;
  VehicleParams params_;
  TrajectorySegment segment_;
  std::optional<WorldSurface> surface_;
  std::optional<Vector3> target_tip_;
  PlannerMode active_ = PlannerMode::Hold;
  double last_valid_ = 0.0;
};

}  // namespace omniam
