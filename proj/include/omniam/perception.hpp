#pragma once

#include "omniam/geometry.hpp"
#include "omniam/scene.hpp"

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

namespace omniam {

/// Pinhole depth camera. The optical axis is the camera z axis; image x and
/// y follow camera x and y.
struct CameraModel {
  int width = 160;
  int height = 120;
  double horizontal_fov = std::numbers::pi / 3.0;  // [rad]
  double max_range = 4.0;    // [m]
  double depth_noise = 0.0;  // standard deviation along the ray [m]

  double focalLength() const;
  /// Unit ray through pixel (u, v); pixel (W/2, H/2) lies on the optical axis.
  Vector3 ray(int u, int v) const;
  void validate() const;
};

struct PointCloud {
  std::vector<Vector3> points;
  double timestamp = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Ray-casts `scene` from the camera pose (world <- camera). Points are in
/// the camera frame. Noise, if configured, is drawn from a generator seeded
/// with `seed`, so equal inputs give equal clouds.
PointCloud renderDepth(const Pose& camera, const Scene& scene, const CameraModel& model, std::uint64_t seed = 0,
                       double timestamp = 0.0);

/// Points whose distance to the z axis is at most `radius`, in input order.
PointCloud selectAxisPoints(const PointCloud& cloud, double radius);

/// Translates every point by `offset`.
PointCloud shifted(const PointCloud& cloud, const Vector3& offset);

struct SurfaceEstimate {
  Vector3 normal = -Vector3::UnitZ();    // unit, facing the camera
  double distance = 0.0;                 // [m] origin to contact point
  Vector3 contact = Vector3::Zero();     // mean of the selected points
  Vector3 eigenvalues = Vector3::Zero(); // covariance spectrum, ascending
  bool valid = false;
  std::size_t count = 0;
};

/// Total-least-squares plane through the points. The normal is the
/// eigenvector of the smallest covariance eigenvalue, flipped to satisfy
/// n . z <= 0. Invalid when there are fewer than `min_points` points, when
/// the spectrum is not plane-like (lambda_min / lambda_mid >= 0.5) or when
/// the two smallest eigenvalues are too close to order.
SurfaceEstimate estimateSurface(const PointCloud& subset, std::size_t min_points = 30);

/// Sum of squared orthogonal distances of the points to the plane through
/// `point` with unit `normal`.
double planeResidual(const PointCloud& cloud, const Vector3& point, const Vector3& normal);

/// Little-endian binary layout: uint32 count, then count x 3 float32.
void writePointCloudBinary(std::ostream& out, const PointCloud& cloud);
PointCloud readPointCloudBinary(std::istream& in);
/// Header "x_m,y_m,z_m", one point per row.
void writePointCloudCsv(std::ostream& out, const PointCloud& cloud);
PointCloud readPointCloudCsv(std::istream& in);

}  // namespace omniam
