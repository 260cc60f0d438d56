#pragma once

#include "omniam/impedance.hpp"
#include "omniam/runner.hpp"
#include "omniam/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace testing {

using namespace omniam;

inline std::filesystem::path scenarioDir() { return OMNIAM_SCENARIO_DIR; }
inline std::filesystem::path scenarioFile(const std::string& name) { return scenarioDir() / (name + ".json"); }

inline Vector3 randomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vector3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Matrix3 randomRotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.0, 3.0);
  return expSO3(a(rng) * randomUnit(rng));
}

/// Hover at 1.5 m with the given impedance multipliers and no scene.
inline ScenarioConfig hoverConfig(double duration, const Vector6& multipliers, Frame frame,
                                  double arm_pitch_deg = 90.0) {
  ScenarioConfig c;
  c.name = "test";
  c.duration = duration;
  c.vehicle.arm_pitch = deg2rad(arm_pitch_deg);
  c.gains = designGains(c.vehicle, multipliers, frame);
  c.initial.position = Vector3(0.0, 0.0, 1.5);
  return c;
}

/// Constant force switched on at `start` and kept until the end of the run.
inline DisturbancePulse stepForce(double start, double magnitude, const Vector3& direction, Frame frame) {
  DisturbancePulse p;
  p.start = start;
  p.ramp = 0.0;
  p.hold = 1e6;
  p.magnitude = magnitude;
  p.direction = direction;
  p.frame = frame;
  return p;
}

/// Under-damped unit-step response of m x'' + d x' + k x = f from rest.
inline double secondOrderStep(double t, double m, double d, double k, double f) {
  if (t <= 0.0) return 0.0;
  const double wn = std::sqrt(k / m);
  const double zeta = d / (2.0 * std::sqrt(k * m));
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const double decay = std::exp(-zeta * wn * t);
  return f / k * (1.0 - decay * (std::cos(wd * t) + zeta * wn / wd * std::sin(wd * t)));
}

inline double maxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace testing
