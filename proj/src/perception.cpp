#include "omniam/perception.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace omniam {

double CameraModel::focalLength() const { return 0.5 * width / std::tan(0.5 * horizontal_fov); }

Vector3 CameraModel::ray(int u, int v) const {
  const double f = focalLength();
  return Vector3((u - 0.5 * width) / f, (v - 0.5 * height) / f, 1.0).normalized();
}

void CameraModel::validate() const {
  if (width < 16 || height < 16) throw std::invalid_argument("camera resolution must be at least 16x16");
  if (!(horizontal_fov > 0.0 && horizontal_fov < std::numbers::pi))
    throw std::invalid_argument("camera field of view must lie in (0, pi)");
  if (!(max_range > 0.0)) throw std::invalid_argument("camera range must be positive");
  if (depth_noise < 0.0) throw std::invalid_argument("depth noise must be non-negative");
}

PointCloud renderDepth(const Pose& camera, const Scene& scene, const CameraModel& model, std::uint64_t seed,
                       double timestamp) {
  model.validate();
  PointCloud cloud;
  cloud.timestamp = timestamp;
  if (scene.primitives.empty()) return cloud;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Matrix3& r = camera.orientation;
  cloud.points.reserve(static_cast<std::size_t>(model.width) * model.height);
  for (int v = 0; v < model.height; ++v) {
    for (int u = 0; u < model.width; ++u) {
      const Vector3 dir_cam = model.ray(u, v);
      const Vector3 dir = r * dir_cam;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& prim : scene.primitives)
        if (auto t = intersectRay(prim, camera.position, dir); t && *t < best) best = *t;
      if (!(best <= model.max_range)) continue;
      double t = best;
      if (model.depth_noise > 0.0) t += model.depth_noise * noise(rng);
      // Noise may push a point past the range limit; clamp to keep the
      // cloud invariant.
      t = std::clamp(t, 0.0, model.max_range);
      cloud.points.push_back(t * dir_cam);
    }
  }
  return cloud;
}

PointCloud selectAxisPoints(const PointCloud& cloud, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("selection radius must be positive");
  PointCloud out;
  out.timestamp = cloud.timestamp;
  for (const auto& p : cloud.points)
    if (std::hypot(p.x(), p.y()) <= radius) out.points.push_back(p);
  return out;
}

PointCloud shifted(const PointCloud& cloud, const Vector3& offset) {
  PointCloud out = cloud;
  for (auto& p : out.points) p += offset;
  return out;
}

SurfaceEstimate estimateSurface(const PointCloud& subset, std::size_t min_points) {
  SurfaceEstimate est;
  est.count = subset.size();
  if (subset.empty()) return est;
  Vector3 mean = Vector3::Zero();
  for (const auto& p : subset.points) mean += p;
  mean /= static_cast<double>(subset.size());
  Matrix3 cov = Matrix3::Zero();
  for (const auto& p : subset.points) {
    const Vector3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(subset.size());

  Eigen::SelfAdjointEigenSolver<Matrix3> eig(cov);
  est.eigenvalues = eig.eigenvalues();
  Vector3 n = eig.eigenvectors().col(0).normalized();
  if (n.z() > 0.0) n = -n;
  est.normal = n;
  est.contact = mean;
  est.distance = mean.norm();

  const double l0 = est.eigenvalues(0);
  const double l1 = est.eigenvalues(1);
  est.valid = est.count >= min_points && est.count >= 3 && l1 - l0 >= 1e-12 && l0 < 0.5 * l1;
  return est;
}

double planeResidual(const PointCloud& cloud, const Vector3& point, const Vector3& normal) {
  double sum = 0.0;
  for (const auto& p : cloud.points) {
    const double d = (p - point).dot(normal);
    sum += d * d;
  }
  return sum;
}

namespace {

void putU32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t getU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated point cloud");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

}  // namespace

void writePointCloudBinary(std::ostream& out, const PointCloud& cloud) {
  if (cloud.size() > 0xffffffffu) throw std::length_error("point cloud too large for the binary layout");
  putU32(out, static_cast<std::uint32_t>(cloud.size()));
  for (const auto& p : cloud.points)
    for (int k = 0; k < 3; ++k) putU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p(k))));
}

PointCloud readPointCloudBinary(std::istream& in) {
  PointCloud cloud;
  const std::uint32_t n = getU32(in);
  cloud.points.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Vector3 p;
    for (int k = 0; k < 3; ++k) p(k) = std::bit_cast<float>(getU32(in));
    cloud.points.push_back(p);
  }
  return cloud;
}

void writePointCloudCsv(std::ostream& out, const PointCloud& cloud) {
  out << "x_m,y_m,z_m\n";
  char buf[96];
  for (const auto& p : cloud.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
}

PointCloud readPointCloudCsv(std::istream& in) {
  PointCloud cloud;
  std::string line;
  if (!std::getline(in, line)) return cloud;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Vector3 p;
    char comma = 0;
    if (!(row >> p.x() >> comma >> p.y() >> comma >> p.z())) throw std::runtime_error("malformed point cloud row");
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace omniam
