#include <doctest.h>

#include "omniam/allocation.hpp"
#include "omniam/dynamics.hpp"
#include "support.hpp"

#include <cstring>
#include <limits>
#include <numbers>

using namespace omniam;

namespace {

ActuatorCommand hoverCommand(const VehicleParams& p) {
  Allocator a(AllocatorGeometry::fromParams(p));
  return a.allocate(gravityTerm(Matrix3::Identity(), p)).command;
}

Scene wallScene(double x) {
  Scene s;
  Plane wall;
  wall.point = Vector3(x, 0.0, 0.0);
  wall.normal = -Vector3::UnitX();
  s.primitives.push_back(wall);
  return s;
}

}  // namespace

TEST_CASE("vehicle defaults") {
  const VehicleParams p;
  CHECK(p.mass == 4.75);
  CHECK(p.group_distance == 0.3);
  CHECK(p.max_group_thrust == 20.0);
  CHECK(p.group_count == 6);
  CHECK_NOTHROW(p.validate());
  VehicleParams bad = p;
  bad.mass = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.inertia.z() = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("arm geometry at the two mounting angles") {
  VehicleParams p;
  p.arm_pitch = deg2rad(90.0);
  CHECK((p.armDirection() - Vector3::UnitX()).norm() < 1e-15);
  CHECK((p.toolRotation() * Vector3::UnitZ() - Vector3::UnitX()).norm() < 1e-15);
  CHECK((p.toolOffset() - Vector3(0.375, 0.0, 0.0)).norm() < 1e-15);

  p.arm_pitch = deg2rad(30.0);
  const Vector3 d(0.5, 0.0, -std::sqrt(3.0) / 2.0);
  CHECK((p.armDirection() - d).norm() < 1e-15);
  const Matrix3 r = p.toolRotation();
  CHECK(orthonormalityError(r) < 1e-15);
  CHECK(r.determinant() == doctest::Approx(1.0));
  CHECK((r.col(2) - d).norm() < 1e-15);
  CHECK((r.col(1) - Vector3::UnitY()).norm() < 1e-15);
}

TEST_CASE("gravity term") {
  VehicleParams p;
  const Wrench g = gravityTerm(Matrix3::Identity(), p);
  CHECK(g.force.z() == doctest::Approx(46.5975));
  CHECK(g.force.head<2>().isZero(0.0));
  CHECK(g.torque.isZero(0.0));

  const Wrench flipped = gravityTerm(rotationX(std::numbers::pi), p);
  CHECK(flipped.force.z() == doctest::Approx(-46.5975));

  p.mass = 0.0;
  CHECK(gravityTerm(rotationY(0.4), p).vector().isZero(0.0));
}

TEST_CASE("center of mass offset produces a gravity torque") {
  VehicleParams p;
  p.com_offset = Vector3(0.01, 0.0, 0.0);
  const Wrench g = gravityTerm(Matrix3::Identity(), p);
  CHECK((g.torque - Vector3(0.0, -0.01 * 4.75 * 9.81, 0.0)).norm() < 1e-12);
}

TEST_CASE("coriolis term") {
  const VehicleParams p;
  CHECK(coriolisTerm(Twist{Vector3(1.0, 2.0, 3.0), Vector3::Zero()}, p).vector().isZero(0.0));

  const Wrench c = coriolisTerm(Twist{Vector3(1.0, 0.0, 0.0), Vector3(0.0, 0.0, 1.0)}, p);
  CHECK((c.force - Vector3(0.0, 4.75, 0.0)).norm() < 1e-15);

  const Wrench spin = coriolisTerm(Twist{Vector3::Zero(), Vector3(0.0, 0.0, 2.0)}, p);
  CHECK(spin.torque.isZero(0.0));

  const Vector3 w(0.3, -0.5, 0.8);
  const Vector3 jw = p.inertia.asDiagonal() * w;
  const Vector3 expected(w.y() * jw.z() - w.z() * jw.y(), w.z() * jw.x() - w.x() * jw.z(),
                         w.x() * jw.y() - w.y() * jw.x());
  CHECK((coriolisTerm(Twist{Vector3::Zero(), w}, p).torque - expected).norm() < 1e-15);
}

TEST_CASE("forward dynamics") {
  const VehicleParams p;
  const Matrix3 r = Matrix3::Identity();
  const Wrench g = gravityTerm(r, p);
  CHECK(forwardDynamics(r, Twist{}, g, Wrench{}, p).isZero(0.0));

  Wrench push = g;
  push.force.x() += 4.75;
  const Vector6 a = forwardDynamics(r, Twist{}, push, Wrench{}, p);
  CHECK(a(0) == doctest::Approx(1.0));
  CHECK(a.tail<5>().isZero(0.0));

  Wrench yaw;
  yaw.torque.z() = p.inertia.z() * 0.5;
  const Vector6 b = forwardDynamics(r, Twist{}, g, yaw, p);
  CHECK(b(5) == doctest::Approx(0.5));
  CHECK(b.head<5>().isZero(0.0));
}

TEST_CASE("hover is an equilibrium of the integrator") {
  const VehicleParams p;
  Simulator sim(p, AllocatorGeometry::fromParams(p), Scene{}, DisturbanceProfile{});
  const ActuatorCommand cmd = hoverCommand(p);
  SimState s;
  s.pose.position = Vector3(0.0, 0.0, 1.0);
  for (int i = 0; i < 1000; ++i) s = sim.step(s, cmd, 1e-3);
  CHECK((s.pose.position - Vector3(0.0, 0.0, 1.0)).norm() < 1e-6);
  CHECK(s.time == doctest::Approx(1.0));
}

TEST_CASE("free fall for 0.1 s") {
  const VehicleParams p;
  Simulator sim(p, AllocatorGeometry::fromParams(p), Scene{}, DisturbanceProfile{});
  SimState s;
  for (int i = 0; i < 100; ++i) s = sim.step(s, ActuatorCommand{}, 1e-3);
  CHECK(s.twist.linear.z() == doctest::Approx(-0.981).epsilon(1e-12));
  CHECK(s.pose.position.z() == doctest::Approx(-0.5 * 9.81 * 0.01).epsilon(1e-12));
}

TEST_CASE("constant spin returns to the start after one revolution") {
  const VehicleParams p;
  Simulator sim(p, AllocatorGeometry::fromParams(p), Scene{}, DisturbanceProfile{});
  SimState s;
  s.pose.orientation = rotationX(0.2);
  s.twist.angular = Vector3(0.0, 0.0, 1.0);
  const int n = 6000;
  const double dt = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) s = sim.step(s, ActuatorCommand{}, dt);
  CHECK(rotationAngle(s.pose.orientation, rotationX(0.2)) < 1e-6);
}

TEST_CASE("mechanical energy is conserved without actuation") {
  const VehicleParams p;
  Simulator sim(p, AllocatorGeometry::fromParams(p), Scene{}, DisturbanceProfile{});
  SimState s;
  s.pose.position = Vector3(0.0, 0.0, 100.0);
  s.twist.linear = Vector3(1.0, -0.5, 2.0);
  s.twist.angular = Vector3(1.0, 0.5, 2.0);
  const double e0 = mechanicalEnergy(s, p);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    s = sim.step(s, ActuatorCommand{}, 1e-3);
    worst = std::max(worst, std::abs(mechanicalEnergy(s, p) - e0));
  }
  CHECK(worst / std::abs(e0) < 1e-3);
  CHECK(orthonormalityError(s.pose.orientation) < 1e-9);
}

TEST_CASE("momentum balance holds along a trajectory") {
  VehicleParams p;
  const AllocatorGeometry geom = AllocatorGeometry::fromParams(p);
  DisturbanceProfile dist;
  DisturbancePulse pull;
  pull.start = 0.0;
  pull.ramp = 0.5;
  pull.hold = 1.0;
  pull.magnitude = 6.0;
  pull.direction = Vector3(0.0, 0.6, 0.8);
  pull.frame = Frame::World;
  pull.point = Vector3(0.375, 0.0, 0.0);
  dist.pulses.push_back(pull);
  Simulator sim(p, geom, Scene{}, dist);
  ActuatorCommand cmd = hoverCommand(p);
  cmd.tilt(0) = 0.3;
  cmd.tilt(3) = -0.2;
  const Wrench act = forwardWrench(cmd, geom);

  const double dt = 1e-4;
  SimState prev;
  prev.twist.angular = Vector3(0.2, -0.1, 0.3);
  prev.twist.linear = Vector3(0.1, 0.0, 0.0);
  SimState cur = sim.step(prev, cmd, dt);
  const Matrix6 m = p.inertiaMatrix();
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const SimState next = sim.step(cur, cmd, dt);
    const Vector6 dp = m * (next.twist.vector() - prev.twist.vector()) / (2.0 * dt);
    const Wrench ext = sim.external(cur).total();
    const Vector6 rhs = act.vector() + ext.vector() - coriolisTerm(cur.twist, p).vector() -
                        gravityTerm(cur.pose.orientation, p).vector();
    worst = std::max(worst, (dp - rhs).cwiseAbs().maxCoeff());
    prev = cur;
    cur = next;
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("contact wrench examples") {
  const VehicleParams p;
  const Scene scene = wallScene(1.0);
  const Vector3 tool = p.toolOffset();

  Pose away;
  away.position = Vector3(1.0 - 0.375 - 0.05, 0.0, 1.0);
  const ContactResult none = contactWrench(away, Twist{}, tool, scene);
  CHECK_FALSE(none.in_contact);
  CHECK(none.body.vector().isZero(0.0));

  Pose pressed;
  pressed.position = Vector3(1.0 - 0.375 + 0.01, 0.0, 1.0);
  const ContactResult c = contactWrench(pressed, Twist{}, tool, scene);
  CHECK(c.in_contact);
  CHECK(c.normal_force == doctest::Approx(20.0));
  CHECK((c.world_force - Vector3(-20.0, 0.0, 0.0)).norm() < 1e-9);
  CHECK(c.max_penetration == doctest::Approx(0.01));
  // Force through the tool axis: no torque about the body origin.
  CHECK(c.body.torque.norm() < 1e-12);

  Pose sliding;
  sliding.position = Vector3(1.0 - 0.375 + 0.003, 0.0, 1.0);
  const Twist v{Vector3(0.0, 0.5, 0.0), Vector3::Zero()};
  const ContactResult s = contactWrench(sliding, v, tool, scene);
  CHECK(s.normal_force == doctest::Approx(6.0));
  CHECK(s.world_force.y() == doctest::Approx(-1.8));
  CHECK(s.world_force.z() == doctest::Approx(0.0));
  // The friction force acts at the tip and twists the body about z.
  CHECK(s.body.torque.z() == doctest::Approx(0.375 * -1.8));
}

TEST_CASE("contact force is never attractive") {
  const VehicleParams p;
  Scene scene = wallScene(1.0);
  Cylinder vault;
  vault.axis_point = Vector3(0.0, 0.0, 1.0);
  vault.radius = 2.0;
  scene.primitives.push_back(vault);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    Pose pose;
    pose.position = Vector3(0.62 + 0.02 * u(rng), 0.5 * u(rng), 1.0 + 1.7 * u(rng));
    pose.orientation = expSO3(Vector3(0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng)));
    const Twist v{Vector3(2.0 * u(rng), 2.0 * u(rng), 2.0 * u(rng)), Vector3(u(rng), u(rng), u(rng))};
    const ContactResult c = contactWrench(pose, v, p.toolOffset(), scene);
    CHECK(c.normal_force >= 0.0);
    if (!c.in_contact) CHECK(c.body.vector().isZero(0.0));
  }
}

TEST_CASE("concave vault pushes inward") {
  Cylinder vault;
  vault.axis_point = Vector3(0.0, 0.0, 0.0);
  vault.axis_direction = Vector3::UnitY();
  vault.radius = 2.0;
  const Penetration inside = penetration(vault, Vector3(0.0, 0.3, 1.9));
  CHECK(inside.depth == doctest::Approx(-0.1));
  const Penetration beyond = penetration(vault, Vector3(0.0, 0.3, 2.05));
  CHECK(beyond.depth == doctest::Approx(0.05));
  CHECK((beyond.normal - Vector3(0.0, 0.0, -1.0)).norm() < 1e-12);
}

TEST_CASE("scene validation") {
  Scene s;
  Plane bad;
  bad.normal = Vector3(1.0, 1.0, 0.0);
  s.primitives.push_back(bad);
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  Scene neg;
  neg.contact.friction = -0.1;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("trapezoidal disturbance envelope") {
  DisturbancePulse p;
  p.start = 2.0;
  p.ramp = 1.0;
  p.hold = 2.0;
  CHECK(p.envelope(1.9) == 0.0);
  CHECK(p.envelope(2.5) == doctest::Approx(0.5));
  CHECK(p.envelope(4.0) == 1.0);
  CHECK(p.envelope(5.75) == doctest::Approx(0.25));
  CHECK(p.envelope(6.1) == 0.0);
}

TEST_CASE("disturbance at the tool tip in the body frame") {
  DisturbanceProfile d;
  DisturbancePulse p;
  p.start = 0.0;
  p.hold = 10.0;
  p.magnitude = 8.0;
  p.direction = Vector3::UnitY();
  p.frame = Frame::Body;
  p.point = Vector3(0.375, 0.0, 0.0);
  d.pulses.push_back(p);
  const Wrench w = d.wrench(1.0, rotationZ(0.7));
  CHECK((w.force - Vector3(0.0, 8.0, 0.0)).norm() < 1e-15);
  CHECK((w.torque - Vector3(0.0, 0.0, 3.0)).norm() < 1e-15);

  d.pulses[0].frame = Frame::World;
  const Wrench ww = d.wrench(1.0, rotationZ(std::numbers::pi / 2));
  CHECK((ww.force - Vector3(8.0, 0.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("stepping is bit-reproducible") {
  const VehicleParams p;
  const AllocatorGeometry geom = AllocatorGeometry::fromParams(p);
  ActuatorCommand cmd = hoverCommand(p);
  cmd.tilt(2) = 0.1;
  auto run = [&] {
    Simulator sim(p, geom, wallScene(0.5), DisturbanceProfile{});
    SimState s;
    s.twist.linear = Vector3(0.3, 0.1, 0.0);
    for (int i = 0; i < 2000; ++i) s = sim.step(s, cmd, 1e-3);
    return s;
  };
  const SimState a = run();
  const SimState b = run();
  CHECK(std::memcmp(a.pose.position.data(), b.pose.position.data(), sizeof(double) * 3) == 0);
  CHECK(std::memcmp(a.pose.orientation.data(), b.pose.orientation.data(), sizeof(double) * 9) == 0);
  CHECK(std::memcmp(a.twist.linear.data(), b.twist.linear.data(), sizeof(double) * 3) == 0);
  CHECK(std::memcmp(a.twist.angular.data(), b.twist.angular.data(), sizeof(double) * 3) == 0);
}

TEST_CASE("non-finite states abort the step") {
  const VehicleParams p;
  Simulator sim(p, AllocatorGeometry::fromParams(p), Scene{}, DisturbanceProfile{});
  SimState s;
  s.twist.linear.x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(sim.step(s, ActuatorCommand{}, 1e-3), NonFiniteState);
}

TEST_CASE("time step bounds") {
  const VehicleParams p;
  Simulator sim(p, AllocatorGeometry::fromParams(p), Scene{}, DisturbanceProfile{});
  CHECK_THROWS_AS(sim.step(SimState{}, ActuatorCommand{}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sim.step(SimState{}, ActuatorCommand{}, 0.02), std::invalid_argument);
  CHECK_NOTHROW(sim.step(SimState{}, ActuatorCommand{}, 0.01));
}

TEST_CASE("actuator lag approaches the command exponentially") {
  const VehicleParams p;
  const AllocatorGeometry geom = AllocatorGeometry::fromParams(p);
  ActuatorLag lag;
  lag.enabled = true;
  Simulator sim(p, geom, Scene{}, DisturbanceProfile{}, lag);
  sim.resetActuators(ActuatorCommand{});
  ActuatorCommand target;
  target.rotor_speeds.setConstant(500.0);
  target.tilt.setConstant(0.5);
  SimState s;
  for (int i = 0; i < 30; ++i) s = sim.step(s, target, 1e-3);
  const double expected_speed = 500.0 * (1.0 - std::exp(-0.03 / lag.rotor_time_constant));
  const double expected_tilt = 0.5 * (1.0 - std::exp(-0.03 / lag.tilt_time_constant));
  CHECK(sim.actuatorState().rotor_speeds(0) == doctest::Approx(expected_speed).epsilon(1e-12));
  CHECK(sim.actuatorState().tilt(0) == doctest::Approx(expected_tilt).epsilon(1e-12));
}

TEST_CASE("stiff contact is integrated stably") {
  const VehicleParams p;
  const AllocatorGeometry geom = AllocatorGeometry::fromParams(p);
  Simulator sim(p, geom, wallScene(1.0), DisturbanceProfile{});
  ActuatorCommand cmd = hoverCommand(p);
  SimState s;
  s.pose.position = Vector3(1.0 - 0.375 - 0.01, 0.0, 1.0);
  s.twist.linear = Vector3(0.5, 0.2, 0.0);
  double peak = 0.0;
  for (int i = 0; i < 2000; ++i) {
    s = sim.step(s, cmd, 1e-3);
    peak = std::max(peak, s.twist.vector().norm());
  }
  CHECK(peak < 1.0);
}
