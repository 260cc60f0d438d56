#pragma once

#include "omniam/analysis.hpp"
#include "omniam/dynamics.hpp"
#include "omniam/impedance.hpp"
#include "omniam/perception.hpp"
#include "omniam/planner.hpp"
#include "omniam/scene.hpp"
#include "omniam/vehicle.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace omniam {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kScenarioSchemaVersion = 1;

struct Rates {
  int physics = 1000;  // [Hz]
  int control = 250;
  int planner = 5;
  int sensor = 800;
};

enum class EstimatorMode { Observer, Ideal };

struct EstimatorConfig {
  Vector6 gain = Vector6::Ones();
  /// Ideal feeds the true external wrench to the controller (test support).
  EstimatorMode mode = EstimatorMode::Observer;
};

struct Waypoint {
  double start = 0.0;     // [s]
  double duration = 1.0;  // [s]
  Pose pose;
};

struct ModeChange {
  double start = 0.0;  // [s]
  PlannerMode mode = PlannerMode::Hold;
};

struct ReferenceConfig {
  enum class Kind { Hold, Waypoints, Surface };
  Kind kind = Kind::Hold;
  std::vector<Waypoint> waypoints;
  PlannerConfig planner;
  std::vector<ModeChange> script;
};

struct PerceptionConfig {
  bool enabled = false;
  CameraModel camera;
  double selection_radius = 0.15;  // [m]
  std::size_t min_points = 30;
};

struct ForceSensorConfig {
  double noise = 0.0;        // white noise standard deviation [N]
  double resolution = 0.1;   // quantization step [N]
  int filter_order = 5;
  double cutoff = 5.0;       // [Hz]
};

struct AnalysisConfig {
  std::vector<std::pair<double, double>> force_windows;  // [s]
  double window_average = 1.0;                           // trailing averaging span [s]
  Vector3 contact_axis = Vector3::UnitX();               // world axis of the sensor comparison
};

struct Assertion {
  std::string metric;
  std::string op;  // "<", "<=", ">", ">=", "within"
  double value = 0.0;
  double tolerance = 0.0;  // for "within"
};

struct ScenarioConfig {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  std::string description;
  double duration = 10.0;  // [s]
  std::uint64_t seed = 1;
  Rates rates;
  VehicleParams vehicle;
  std::string preset;       // empty when gains are explicit
  ImpedanceGains gains;
  EstimatorConfig estimator;
  Scene scene;
  DisturbanceProfile disturbance;
  Pose initial;
  ReferenceConfig reference;
  PerceptionConfig perception;
  NoiseModelParams noise;
  ActuatorLag actuators;
  ForceSensorConfig force_sensor;
  AnalysisConfig analysis;
  std::vector<Assertion> assertions;

  /// Throws ConfigError when fields are inconsistent.
  void validate() const;
};

/// Sets a dotted path ("gains.preset", "disturbances.0.force_N") in a JSON
/// document. The value is parsed as JSON when possible, otherwise kept as a
/// string.
void applyOverride(nlohmann::json& doc, const std::string& assignment);

/// Builds a config from a parsed document. Throws ConfigError on unknown
/// keys, wrong types, missing presets or an unsupported schema version.
ScenarioConfig parseScenario(const nlohmann::json& doc);

ScenarioConfig loadScenario(const std::filesystem::path& file, const std::vector<std::string>& overrides = {});

/// Scenario files (*.json) in a directory, sorted by name.
struct CatalogEntry {
  std::string name;
  std::string description;
  std::filesystem::path path;
};
std::vector<CatalogEntry> scenarioCatalog(const std::filesystem::path& dir);

}  // namespace omniam
