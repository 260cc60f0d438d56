#include <doctest.h>

#include "omniam/perception.hpp"
#include "support.hpp"

#include <cstring>
#include <numbers>
#include <sstream>

using namespace omniam;

namespace {

Scene planeScene(const Vector3& point, const Vector3& normal) {
  Scene s;
  Plane p;
  p.point = point;
  p.normal = normal.normalized();
  s.primitives.push_back(p);
  return s;
}

// Nearest positive root of |(o + t d - c)_perp| = R for a ray starting
// inside the cylinder.
double cylinderDepth(const Vector3& o, const Vector3& d, const Vector3& c, const Vector3& axis, double radius) {
  const Vector3 w = o - c;
  const Vector3 wp = w - w.dot(axis) * axis;
  const Vector3 dp = d - d.dot(axis) * axis;
  const double a = dp.squaredNorm();
  const double b = 2.0 * wp.dot(dp);
  const double cc = wp.squaredNorm() - radius * radius;
  return (-b + std::sqrt(b * b - 4.0 * a * cc)) / (2.0 * a);
}

PointCloud gridOnPlane(const Vector3& center, const Vector3& normal, int n, double spacing) {
  const Vector3 u = normal.unitOrthogonal();
  const Vector3 v = normal.cross(u);
  PointCloud c;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) c.points.push_back(center + i * spacing * u + j * spacing * v);
  return c;
}

double angleBetween(const Vector3& a, const Vector3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

}  // namespace

TEST_CASE("camera defaults and principal point") {
  const CameraModel cam;
  CHECK(cam.width == 160);
  CHECK(cam.height == 120);
  CHECK(cam.horizontal_fov == doctest::Approx(std::numbers::pi / 3));
  CHECK(cam.max_range == 4.0);
  CHECK((cam.ray(80, 60) - Vector3::UnitZ()).norm() == 0.0);
  CHECK(cam.ray(0, 60).x() == doctest::Approx(-std::sin(std::numbers::pi / 6)));
  CameraModel bad;
  bad.width = 8;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = CameraModel{};
  bad.horizontal_fov = std::numbers::pi;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("wall straight ahead puts the central point on the axis") {
  const PointCloud cloud = renderDepth(Pose{}, planeScene(Vector3(0, 0, 2), -Vector3::UnitZ()), CameraModel{});
  CHECK(cloud.size() == 160u * 120u);
  const auto it = std::min_element(cloud.points.begin(), cloud.points.end(),
                                   [](const Vector3& a, const Vector3& b) { return a.head<2>().norm() < b.head<2>().norm(); });
  CHECK((*it - Vector3(0, 0, 2)).norm() < 1e-15);
  for (const auto& p : cloud.points) CHECK(p.z() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("empty scene renders nothing") {
  CHECK(renderDepth(Pose{}, Scene{}, CameraModel{}).empty());
  // A wall behind the camera is invisible as well.
  CHECK(renderDepth(Pose{}, planeScene(Vector3(0, 0, -1), Vector3::UnitZ()), CameraModel{}).empty());
}

TEST_CASE("points beyond the range are dropped") {
  const PointCloud cloud = renderDepth(Pose{}, planeScene(Vector3(0, 0, 5), -Vector3::UnitZ()), CameraModel{});
  CHECK(cloud.empty());
}

TEST_CASE("vault depths match the ray-cylinder quadratic") {
  Scene s;
  Cylinder vault;
  vault.axis_point = Vector3(0.0, 0.0, 1.0);
  vault.axis_direction = Vector3::UnitY();
  vault.radius = 2.0;
  s.primitives.push_back(vault);
  Pose cam;
  cam.position = Vector3(0.4, 0.1, 1.3);
  cam.orientation = rotationY(-1.2);
  const PointCloud cloud = renderDepth(cam, s, CameraModel{});
  CHECK(cloud.size() == 160u * 120u);
  double worst = 0.0;
  for (const auto& p : cloud.points) {
    const Vector3 d = cam.orientation * p.normalized();
    const double t = cylinderDepth(cam.position, d, vault.axis_point, vault.axis_direction, vault.radius);
    worst = std::max(worst, std::abs(p.norm() - t));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("axis selection") {
  PointCloud c;
  c.points = {Vector3(0, 0, 1), Vector3(0, 0, 2), Vector3(0, 0, 3)};
  CHECK(selectAxisPoints(c, 0.15).size() == 3u);
  c.points.push_back(Vector3(0.2, 0.0, 2.0));
  c.points.push_back(Vector3(0.1, 0.1, 2.0));
  const PointCloud s = selectAxisPoints(c, 0.15);
  CHECK(s.size() == 4u);
  CHECK(s.points.back() == Vector3(0.1, 0.1, 2.0));
  CHECK_THROWS_AS(selectAxisPoints(c, 0.0), std::invalid_argument);
}

TEST_CASE("selected pixel count matches the disc") {
  const CameraModel cam;
  const PointCloud cloud = renderDepth(Pose{}, planeScene(Vector3(0, 0, 2), -Vector3::UnitZ()), cam);
  const std::size_t got = selectAxisPoints(cloud, 0.15).size();
  // Pixels sit on a lattice of pitch 2 / f at 2 m; count lattice points
  // inside a disc of radius rho pixels.
  const double rho = 0.15 * cam.focalLength() / 2.0;
  long lattice = 0;
  const int n = static_cast<int>(rho) + 1;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j)
      if (i * i + j * j <= rho * rho) ++lattice;
  CHECK(static_cast<long>(got) == lattice);
  CHECK(std::abs(static_cast<double>(got) - std::numbers::pi * rho * rho) <= 2.0 * std::numbers::pi * rho);
}

TEST_CASE("exact plane facing the camera") {
  PointCloud c;
  c.points = {Vector3(0, 0, 2), Vector3(0.1, 0, 2), Vector3(0, 0.1, 2), Vector3(-0.1, -0.1, 2)};
  const SurfaceEstimate e = estimateSurface(c, 3);
  CHECK(e.valid);
  CHECK((e.normal - Vector3(0, 0, -1)).norm() < 1e-12);
  CHECK(e.distance == doctest::Approx(2.0));
  CHECK(e.count == 4u);
}

TEST_CASE("too few points are invalid") {
  PointCloud c;
  c.points = {Vector3(0, 0, 2), Vector3(0.1, 0, 2)};
  CHECK_FALSE(estimateSurface(c, 2).valid);
  CHECK_FALSE(estimateSurface(PointCloud{}, 0).valid);
  const PointCloud grid = gridOnPlane(Vector3(0, 0, 1), Vector3(0, 0, -1), 2, 0.01);
  CHECK_FALSE(estimateSurface(grid, 30).valid);
  CHECK(estimateSurface(grid, 25).valid);
}

TEST_CASE("collinear and isotropic clouds are invalid") {
  PointCloud line;
  for (int i = 0; i < 50; ++i) line.points.push_back(Vector3(0.01 * i, 0.0, 1.0));
  CHECK_FALSE(estimateSurface(line).valid);

  PointCloud blob;
  std::mt19937_64 rng(51);
  std::normal_distribution<double> n;
  for (int i = 0; i < 2000; ++i) blob.points.push_back(Vector3(n(rng), n(rng), 3.0 + n(rng)));
  CHECK_FALSE(estimateSurface(blob).valid);
}

TEST_CASE("rendered tilted walls give exact normals") {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 20; ++i) {
    const Vector3 n = (-Vector3::UnitZ() + 0.5 * testing::randomUnit(rng)).normalized();
    const Scene s = planeScene(Vector3(0.0, 0.0, 1.5), n);
    const SurfaceEstimate e = estimateSurface(selectAxisPoints(renderDepth(Pose{}, s, CameraModel{}), 0.15));
    REQUIRE(e.valid);
    CHECK(angleBetween(e.normal, n) < 1e-6);
    // The mean lies on the plane.
    CHECK(std::abs((e.contact - Vector3(0, 0, 1.5)).dot(n)) < 1e-12);
  }
}

TEST_CASE("vault patch normal is within half a degree of the surface normal") {
  Scene s;
  Cylinder vault;
  vault.axis_point = Vector3(0.0, 0.0, 1.0);
  vault.axis_direction = Vector3::UnitY();
  vault.radius = 2.0;
  s.primitives.push_back(vault);
  for (double elevation : {0.0, 0.3, 0.7, 1.1}) {
    CAPTURE(elevation);
    Pose cam;
    cam.position = Vector3(0.3, 0.0, 1.2);
    // Optical axis in the x-z plane, tilted from vertical.
    cam.orientation = rotationY(elevation);
    const SurfaceEstimate e = estimateSurface(selectAxisPoints(renderDepth(cam, s, CameraModel{}), 0.15));
    REQUIRE(e.valid);
    const Vector3 c_world = cam.position + cam.orientation * e.contact;
    Vector3 radial = c_world - vault.axis_point;
    radial.y() = 0.0;
    const Vector3 analytic = cam.orientation.transpose() * (-radial.normalized());
    CHECK(rad2deg(angleBetween(e.normal, analytic)) < 0.5);
  }
}

TEST_CASE("estimation commutes with rotations") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> n;
  PointCloud base = gridOnPlane(Vector3(0.1, -0.05, 1.0), Vector3(0.2, 0.1, -1.0).normalized(), 6, 0.02);
  for (auto& p : base.points) p += 0.002 * Vector3(n(rng), n(rng), n(rng));
  const SurfaceEstimate e0 = estimateSurface(base);
  REQUIRE(e0.valid);
  for (int i = 0; i < 50; ++i) {
    const Matrix3 q = testing::randomRotation(rng);
    PointCloud rotated = base;
    for (auto& p : rotated.points) p = q * p;
    const SurfaceEstimate e = estimateSurface(rotated);
    REQUIRE(e.valid);
    CHECK((e.contact - q * e0.contact).norm() < 1e-9);
    const Vector3 expected = q * e0.normal;
    CHECK(std::min((e.normal - expected).norm(), (e.normal + expected).norm()) < 1e-9);
    CHECK(e.distance == doctest::Approx(e0.distance).epsilon(1e-12));
  }
}

TEST_CASE("noiseless planar residual vanishes") {
  std::mt19937_64 rng(54);
  for (int i = 0; i < 20; ++i) {
    const Vector3 n = testing::randomUnit(rng);
    const PointCloud c = gridOnPlane(Vector3(0.0, 0.0, 2.0), n, 7, 0.02);
    const SurfaceEstimate e = estimateSurface(c);
    REQUIRE(e.valid);
    CHECK(planeResidual(c, e.contact, e.normal) < 1e-18);
  }
}

TEST_CASE("the fit beats random normals on noisy input") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> n;
  PointCloud c = gridOnPlane(Vector3(0.0, 0.0, 2.0), Vector3(0.1, 0.0, -1.0).normalized(), 7, 0.02);
  for (auto& p : c.points) p += 0.005 * Vector3(n(rng), n(rng), n(rng));
  const SurfaceEstimate e = estimateSurface(c);
  REQUIRE(e.valid);
  const double best = planeResidual(c, e.contact, e.normal);
  for (int i = 0; i < 100; ++i) CHECK(best <= planeResidual(c, e.contact, testing::randomUnit(rng)));
}

TEST_CASE("the normal always faces the camera") {
  std::mt19937_64 rng(56);
  for (int i = 0; i < 200; ++i) {
    const PointCloud c = gridOnPlane(Vector3(0.0, 0.0, 1.0), testing::randomUnit(rng), 4, 0.03);
    const SurfaceEstimate e = estimateSurface(c, 3);
    CHECK(e.normal.z() <= 0.0);
    CHECK(e.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("noisy rendering is seeded") {
  CameraModel cam;
  cam.depth_noise = 0.005;
  const Scene s = planeScene(Vector3(0, 0, 2), -Vector3::UnitZ());
  const PointCloud a = renderDepth(Pose{}, s, cam, 7);
  const PointCloud b = renderDepth(Pose{}, s, cam, 7);
  const PointCloud c = renderDepth(Pose{}, s, cam, 8);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.points.data(), b.points.data(), a.size() * sizeof(Vector3)) == 0);
  CHECK(std::memcmp(a.points.data(), c.points.data(), a.size() * sizeof(Vector3)) != 0);
  for (const auto& p : a.points) CHECK(p.norm() <= cam.max_range);
}

TEST_CASE("binary point cloud layout") {
  PointCloud c;
  c.points = {Vector3(1.0, 2.0, 3.0), Vector3(-0.5, 0.25, 4.0)};
  std::stringstream ss;
  writePointCloudBinary(ss, c);
  const std::string bytes = ss.str();
  REQUIRE(bytes.size() == 4u + 2u * 3u * 4u);
  CHECK(static_cast<unsigned char>(bytes[0]) == 2);
  CHECK(bytes[1] == 0);
  CHECK(bytes[2] == 0);
  CHECK(bytes[3] == 0);
  // 1.0f is 0x3f800000 and is stored little-endian.
  CHECK(static_cast<unsigned char>(bytes[4]) == 0x00);
  CHECK(static_cast<unsigned char>(bytes[7]) == 0x3f);
  const PointCloud back = readPointCloudBinary(ss);
  REQUIRE(back.size() == 2u);
  CHECK(back.points[1] == Vector3(-0.5, 0.25, 4.0));

  std::stringstream truncated(bytes.substr(0, 10));
  CHECK_THROWS(readPointCloudBinary(truncated));
}

TEST_CASE("csv point cloud round trip") {
  PointCloud c;
  c.points = {Vector3(0.1, 0.2, 0.3), Vector3(1.0 / 3.0, -2.0 / 7.0, 1e-9)};
  std::stringstream ss;
  writePointCloudCsv(ss, c);
  CHECK(ss.str().rfind("x_m,y_m,z_m\n", 0) == 0);
  const PointCloud back = readPointCloudCsv(ss);
  REQUIRE(back.size() == 2u);
  CHECK(back.points[0] == c.points[0]);
  CHECK(back.points[1] == c.points[1]);
}
