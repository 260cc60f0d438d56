#include "omniam/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace omniam {

using nlohmann::json;

namespace {

// Reads one JSON object and remembers which keys were consumed so unknown
// keys can be reported.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) fail(key + " must be a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key + " must be an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key + " must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) fail(key + " must be a string");
    return v.get<std::string>();
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vector(const std::string& key, const Eigen::Matrix<double, N, 1>& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    Eigen::Matrix<double, N, 1> out;
    if (v.is_number()) {
      out.setConstant(v.get<double>());
      return out;
    }
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) fail(key + " must hold " + std::to_string(N) + " numbers");
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number()) fail(key + " must hold numbers");
      out(i) = v[i].get<double>();
    }
    return out;
  }

  Reader child(const std::string& key) { return Reader(raw(key), path_ + "." + key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail("unknown key '" + it.key() + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(path_ + ": " + msg);
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Frame parseFrame(Reader& r, const std::string& key, Frame fallback) {
  if (!r.has(key)) return fallback;
  const std::string s = r.string(key, "");
  if (s == "body") return Frame::Body;
  if (s == "world") return Frame::World;
  if (s == "tool") return Frame::Tool;
  r.fail(key + " must be body, world or tool");
}

Matrix3 rpyDeg(const Vector3& rpy) { return fromRollPitchYaw(deg2rad(rpy(0)), deg2rad(rpy(1)), deg2rad(rpy(2))); }

// Pose from "position_m" or "tool_tip_m" plus "rpy_deg".
Pose parsePose(Reader& r, const VehicleParams& vehicle, const Pose& fallback) {
  Pose p = fallback;
  if (r.has("rpy_deg")) p.orientation = rpyDeg(r.vector<3>("rpy_deg", Vector3::Zero()));
  if (r.has("position_m") && r.has("tool_tip_m")) r.fail("give either position_m or tool_tip_m");
  if (r.has("position_m")) p.position = r.vector<3>("position_m", Vector3::Zero());
  if (r.has("tool_tip_m")) p.position = r.vector<3>("tool_tip_m", Vector3::Zero()) - p.orientation * vehicle.toolOffset();
  return p;
}

void parseVehicle(Reader r, VehicleParams& v, bool& pitch_given) {
  v.mass = r.number("mass_kg", v.mass);
  v.inertia = r.vector<3>("inertia_kgm2", v.inertia);
  pitch_given = r.has("arm_pitch_deg");
  if (pitch_given) v.arm_pitch = deg2rad(r.number("arm_pitch_deg", 90.0));
  v.tool_length = r.number("tool_length_m", v.tool_length);
  v.camera_offset = r.number("camera_offset_m", v.camera_offset);
  v.group_distance = r.number("group_distance_m", v.group_distance);
  v.max_group_thrust = r.number("max_group_thrust_N", v.max_group_thrust);
  v.com_offset = r.vector<3>("com_offset_m", v.com_offset);
  r.finish();
}

void parseGains(Reader r, ScenarioConfig& cfg, bool pitch_given) {
  Vector6 multipliers = Vector6::Ones();
  Frame frame = Frame::Tool;
  cfg.preset = r.string("preset", "");
  if (!cfg.preset.empty()) {
    const GainPreset* p = nullptr;
    try {
      p = &gainPreset(cfg.preset);
    } catch (const std::out_of_range&) {
      r.fail("unknown preset '" + cfg.preset + "'");
    }
    multipliers = p->multipliers;
    frame = p->frame;
    if (!pitch_given) cfg.vehicle.arm_pitch = p->arm_pitch;
  }
  multipliers = r.vector<6>("inertia_multiplier", multipliers);
  frame = parseFrame(r, "frame", frame);
  if (frame == Frame::World) r.fail("gain frame must be tool or body");
  GainDesign design;
  design.translational_stiffness = r.vector<3>("translational_stiffness", design.translational_stiffness);
  design.rotational_stiffness = r.vector<3>("rotational_stiffness", design.rotational_stiffness);
  design.damping_ratio = r.number("damping_ratio", design.damping_ratio);
  try {
    cfg.gains = designGains(cfg.vehicle, multipliers, frame, design);
    cfg.gains.damping = r.vector<6>("damping", cfg.gains.damping);
    cfg.gains.stiffness = r.vector<6>("stiffness", cfg.gains.stiffness);
    cfg.gains.validate();
  } catch (const NonPositiveGain& e) {
    r.fail(e.what());
  }
  r.finish();
}

void parseScene(Reader r, Scene& scene) {
  if (r.has("contact")) {
    Reader c = r.child("contact");
    scene.contact.stiffness = c.number("stiffness_Npm", scene.contact.stiffness);
    scene.contact.damping = c.number("damping_Nspm", scene.contact.damping);
    scene.contact.friction = c.number("friction", scene.contact.friction);
    scene.contact.velocity_epsilon = c.number("velocity_epsilon_mps", scene.contact.velocity_epsilon);
    c.finish();
  }
  if (r.has("planes")) {
    const json& arr = r.raw("planes");
    if (!arr.is_array()) r.fail("planes must be a list");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader p(arr[i], r.path() + ".planes." + std::to_string(i));
      Plane pl;
      pl.point = p.vector<3>("point_m", pl.point);
      pl.normal = p.vector<3>("normal", pl.normal).normalized();
      pl.force_sensor = p.boolean("force_sensor", false);
      p.finish();
      scene.primitives.emplace_back(pl);
    }
  }
  if (r.has("cylinders")) {
    const json& arr = r.raw("cylinders");
    if (!arr.is_array()) r.fail("cylinders must be a list");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader p(arr[i], r.path() + ".cylinders." + std::to_string(i));
      Cylinder cy;
      cy.axis_point = p.vector<3>("axis_point_m", cy.axis_point);
      cy.axis_direction = p.vector<3>("axis_direction", cy.axis_direction).normalized();
      cy.radius = p.number("radius_m", cy.radius);
      cy.concave = p.boolean("concave", cy.concave);
      p.finish();
      scene.primitives.emplace_back(cy);
    }
  }
  r.finish();
}

void parseDisturbances(const json& arr, const std::string& path, const VehicleParams& vehicle,
                       DisturbanceProfile& out) {
  if (!arr.is_array()) throw ConfigError(path + ": must be a list");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Reader r(arr[i], path + "." + std::to_string(i));
    DisturbancePulse p;
    p.start = r.number("start_s", 0.0);
    p.ramp = r.number("ramp_s", 0.0);
    p.hold = r.number("hold_s", 0.0);
    p.magnitude = r.number("force_N", 0.0);
    p.direction = r.vector<3>("direction", p.direction);
    if (p.direction.norm() > 0.0) p.direction.normalize();
    p.frame = parseFrame(r, "frame", Frame::World);
    if (r.has("point")) {
      const json& pt = r.raw("point");
      if (pt.is_string()) {
        if (pt.get<std::string>() != "tool") r.fail("point must be \"tool\" or a body-frame vector");
        p.point = vehicle.toolOffset();
      } else {
        const json wrapped = {{"point", pt}};
        Reader tmp(wrapped, r.path());
        p.point = tmp.vector<3>("point", Vector3::Zero());
      }
    }
    p.torque = r.vector<3>("torque_Nm", p.torque);
    r.finish();
    out.pulses.push_back(p);
  }
}

void parseReference(Reader r, ScenarioConfig& cfg) {
  const std::string type = r.string("type", "hold");
  ReferenceConfig& ref = cfg.reference;
  if (type == "hold") {
    ref.kind = ReferenceConfig::Kind::Hold;
  } else if (type == "waypoints") {
    ref.kind = ReferenceConfig::Kind::Waypoints;
    const json& arr = r.raw("waypoints");
    if (!arr.is_array()) r.fail("waypoints must be a list");
    Pose prev = cfg.initial;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader w(arr[i], r.path() + ".waypoints." + std::to_string(i));
      Waypoint wp;
      wp.start = w.number("start_s", 0.0);
      wp.duration = w.number("duration_s", 1.0);
      wp.pose = parsePose(w, cfg.vehicle, prev);
      w.finish();
      prev = wp.pose;
      ref.waypoints.push_back(wp);
    }
  } else if (type == "surface") {
    ref.kind = ReferenceConfig::Kind::Surface;
    if (r.has("planner")) {
      Reader p = r.child("planner");
      PlannerConfig& pc = ref.planner;
      pc.offset = p.number("offset_m", pc.offset);
      pc.standoff = p.number("standoff_m", pc.standoff);
      pc.slide_direction = p.vector<3>("slide_direction", pc.slide_direction);
      pc.slide_speed = p.number("slide_speed_mps", pc.slide_speed);
      pc.max_speed = p.number("max_speed_mps", pc.max_speed);
      pc.max_rate = p.number("max_rate_radps", pc.max_rate);
      pc.min_duration = p.number("min_duration_s", pc.min_duration);
      pc.hold_after = p.number("hold_after_s", pc.hold_after);
      p.finish();
    }
    const json& arr = r.raw("script");
    if (!arr.is_array() || arr.empty()) r.fail("script must be a non-empty list");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader s(arr[i], r.path() + ".script." + std::to_string(i));
      ModeChange mc;
      mc.start = s.number("start_s", 0.0);
      try {
        mc.mode = plannerModeFromString(s.string("mode", "hold"));
      } catch (const std::invalid_argument& e) {
        s.fail(e.what());
      }
      s.finish();
      ref.script.push_back(mc);
    }
  } else {
    r.fail("reference type must be hold, waypoints or surface");
  }
  r.finish();
}

void parsePerception(Reader r, PerceptionConfig& p) {
  p.enabled = r.boolean("enabled", true);
  p.camera.width = r.integer("width_px", p.camera.width);
  p.camera.height = r.integer("height_px", p.camera.height);
  p.camera.horizontal_fov = deg2rad(r.number("fov_deg", rad2deg(p.camera.horizontal_fov)));
  p.camera.max_range = r.number("max_range_m", p.camera.max_range);
  p.camera.depth_noise = r.number("depth_noise_m", p.camera.depth_noise);
  p.selection_radius = r.number("selection_radius_m", p.selection_radius);
  const int min_points = r.integer("min_points", static_cast<int>(p.min_points));
  if (min_points < 3) r.fail("min_points must be at least 3");
  p.min_points = static_cast<std::size_t>(min_points);
  r.finish();
}

void parseAssertions(const json& arr, const std::string& path, std::vector<Assertion>& out) {
  if (!arr.is_array()) throw ConfigError(path + ": must be a list");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Reader r(arr[i], path + "." + std::to_string(i));
    Assertion a;
    a.metric = r.string("metric", "");
    a.op = r.string("op", "<");
    a.value = r.number("value", 0.0);
    a.tolerance = r.number("tolerance", 0.0);
    static const std::set<std::string> ops = {"<", "<=", ">", ">=", "within"};
    if (a.metric.empty()) r.fail("metric is required");
    if (!ops.count(a.op)) r.fail("op must be one of <, <=, >, >=, within");
    r.finish();
    out.push_back(a);
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [&](const std::string& m) { throw ConfigError(name + ": " + m); };
  if (schema_version != kScenarioSchemaVersion) fail("unsupported schema version");
  if (!(duration > 0.0)) fail("duration must be positive");
  if (rates.physics <= 0 || rates.control <= 0 || rates.planner <= 0 || rates.sensor <= 0)
    fail("rates must be positive");
  if (rates.physics % rates.control != 0) fail("physics rate must be a multiple of the control rate");
  if (rates.physics % rates.planner != 0) fail("physics rate must be a multiple of the planner rate");
  if (1.0 / rates.physics > 0.01) fail("physics step must not exceed 10 ms");
  try {
    vehicle.validate();
    scene.validate();
    disturbance.validate();
    gains.validate();
    perception.camera.validate();
    reference.planner.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (!(estimator.gain.array() > 0.0).all()) fail("estimator gains must be positive");
  if (reference.kind == ReferenceConfig::Kind::Surface && !perception.enabled)
    fail("the surface reference needs perception");
  if (force_sensor.resolution < 0.0 || force_sensor.noise < 0.0) fail("force sensor settings must be non-negative");
  if (2.0 * force_sensor.cutoff >= rates.sensor) fail("force filter cutoff must lie below Nyquist");
  for (const auto& w : reference.waypoints)
    if (!(w.duration > 0.0)) fail("waypoint durations must be positive");
}

void applyOverride(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::stringstream ss(path);
  std::string token;
  std::vector<std::string> tokens;
  while (std::getline(ss, token, '.')) tokens.push_back(token);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    const bool last = i + 1 == tokens.size();
    if (node->is_array()) {
      if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ConfigError("override path " + path + ": expected a list index at '" + t + "'");
      const std::size_t idx = std::stoul(t);
      if (idx >= node->size()) throw ConfigError("override path " + path + ": index out of range");
      node = &(*node)[idx];
    } else {
      if (!node->is_object() && !node->is_null())
        throw ConfigError("override path " + path + ": '" + t + "' is not inside an object");
      node = &(*node)[t];
    }
    if (last) *node = value;
  }
}

ScenarioConfig parseScenario(const json& doc) {
  ScenarioConfig cfg;
  Reader r(doc, "scenario");
  cfg.schema_version = r.integer("schema_version", -1);
  if (cfg.schema_version != kScenarioSchemaVersion)
    r.fail("schema_version must be " + std::to_string(kScenarioSchemaVersion));
  cfg.name = r.string("name", "unnamed");
  cfg.description = r.string("description", "");
  cfg.duration = r.number("duration_s", cfg.duration);
  if (r.has("seed")) {
    const json& s = r.raw("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0) r.fail("seed must be a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (r.has("rates")) {
    Reader q = r.child("rates");
    cfg.rates.physics = q.integer("physics_hz", cfg.rates.physics);
    cfg.rates.control = q.integer("control_hz", cfg.rates.control);
    cfg.rates.planner = q.integer("planner_hz", cfg.rates.planner);
    cfg.rates.sensor = q.integer("sensor_hz", cfg.rates.sensor);
    q.finish();
  }
  bool pitch_given = false;
  if (r.has("vehicle")) parseVehicle(r.child("vehicle"), cfg.vehicle, pitch_given);
  if (r.has("gains")) {
    parseGains(r.child("gains"), cfg, pitch_given);
  } else {
    cfg.gains = designGains(cfg.vehicle, Vector6::Ones(), Frame::Tool);
  }
  if (r.has("estimator")) {
    Reader e = r.child("estimator");
    cfg.estimator.gain = e.vector<6>("gain", cfg.estimator.gain);
    const std::string mode = e.string("mode", "observer");
    if (mode == "observer") cfg.estimator.mode = EstimatorMode::Observer;
    else if (mode == "ideal") cfg.estimator.mode = EstimatorMode::Ideal;
    else e.fail("mode must be observer or ideal");
    e.finish();
  }
  if (r.has("scene")) parseScene(r.child("scene"), cfg.scene);
  if (r.has("disturbances")) parseDisturbances(r.raw("disturbances"), "scenario.disturbances", cfg.vehicle, cfg.disturbance);
  if (r.has("initial_state")) {
    Reader s = r.child("initial_state");
    cfg.initial = parsePose(s, cfg.vehicle, Pose{});
    s.finish();
  }
  if (r.has("reference")) parseReference(r.child("reference"), cfg);
  if (r.has("perception")) parsePerception(r.child("perception"), cfg.perception);
  if (r.has("noise")) {
    Reader n = r.child("noise");
    cfg.noise.enabled = n.boolean("enabled", true);
    cfg.noise.position_walk = n.number("position_walk_m", cfg.noise.position_walk);
    cfg.noise.yaw_walk = n.number("yaw_walk_deg", cfg.noise.yaw_walk);
    cfg.noise.position_noise = n.number("position_noise_m", cfg.noise.position_noise);
    cfg.noise.attitude_noise = n.number("attitude_noise_rad", cfg.noise.attitude_noise);
    n.finish();
  }
  if (r.has("actuators")) {
    Reader a = r.child("actuators");
    cfg.actuators.enabled = a.boolean("lag", cfg.actuators.enabled);
    cfg.actuators.rotor_time_constant = a.number("rotor_time_constant_s", cfg.actuators.rotor_time_constant);
    cfg.actuators.tilt_time_constant = a.number("tilt_time_constant_s", cfg.actuators.tilt_time_constant);
    a.finish();
  }
  if (r.has("force_sensor")) {
    Reader f = r.child("force_sensor");
    cfg.force_sensor.noise = f.number("noise_N", cfg.force_sensor.noise);
    cfg.force_sensor.resolution = f.number("resolution_N", cfg.force_sensor.resolution);
    cfg.force_sensor.filter_order = f.integer("filter_order", cfg.force_sensor.filter_order);
    cfg.force_sensor.cutoff = f.number("cutoff_hz", cfg.force_sensor.cutoff);
    f.finish();
  }
  if (r.has("analysis")) {
    Reader a = r.child("analysis");
    if (a.has("force_windows_s")) {
      const json& arr = a.raw("force_windows_s");
      if (!arr.is_array()) a.fail("force_windows_s must be a list of [start, end] pairs");
      for (const auto& w : arr) {
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
          a.fail("force_windows_s must be a list of [start, end] pairs");
        cfg.analysis.force_windows.emplace_back(w[0].get<double>(), w[1].get<double>());
      }
    }
    cfg.analysis.window_average = a.number("window_average_s", cfg.analysis.window_average);
    cfg.analysis.contact_axis = a.vector<3>("contact_axis", cfg.analysis.contact_axis).normalized();
    a.finish();
  }
  if (r.has("assertions")) parseAssertions(r.raw("assertions"), "scenario.assertions", cfg.assertions);
  r.finish();
  cfg.validate();
  return cfg;
}

ScenarioConfig loadScenario(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open scenario file " + file.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  for (const auto& o : overrides) applyOverride(doc, o);
  return parseScenario(doc);
}

std::vector<CatalogEntry> scenarioCatalog(const std::filesystem::path& dir) {
  std::vector<CatalogEntry> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    CatalogEntry c;
    c.path = e.path();
    c.name = e.path().stem().string();
    try {
      std::ifstream in(e.path());
      const json doc = json::parse(in, nullptr, true, true);
      if (doc.contains("name") && doc["name"].is_string()) c.name = doc["name"].get<std::string>();
      if (doc.contains("description") && doc["description"].is_string())
        c.description = doc["description"].get<std::string>();
    } catch (const std::exception&) {
      c.description = "(unreadable)";
    }
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const CatalogEntry& a, const CatalogEntry& b) { return a.name < b.name; });
  return out;
}

}  // namespace omniam
