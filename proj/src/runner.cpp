#include "omniam/runner.hpp"

#include "omniam/allocation.hpp"
#include "omniam/wrench_estimator.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

namespace omniam {

namespace {

void addXyz(std::vector<std::string>& c, const std::string& prefix, const std::string& unit) {
  for (const char* a : {"x", "y", "z"}) c.push_back(prefix + a + "_" + unit);
}

void addWrench(std::vector<std::string>& c, const std::string& prefix) {
  for (const char* a : {"fx_N", "fy_N", "fz_N", "tx_Nm", "ty_Nm", "tz_Nm"}) c.push_back(prefix + a);
}

void addQuat(std::vector<std::string>& c, const std::string& prefix) {
  for (const char* a : {"q_w", "q_x", "q_y", "q_z"}) c.push_back(prefix + a);
}

void addRpy(std::vector<std::string>& c, const std::string& prefix) {
  for (const char* a : {"roll_rad", "pitch_rad", "yaw_rad"}) c.push_back(prefix + a);
}

std::vector<std::string> buildControlColumns() {
  std::vector<std::string> c{"t_s"};
  addXyz(c, "p_", "m");
  addQuat(c, "");
  addRpy(c, "");
  addXyz(c, "v_", "mps");
  addXyz(c, "w_", "radps");
  addXyz(c, "meas_p_", "m");
  addRpy(c, "meas_");
  addXyz(c, "sp_p_", "m");
  addQuat(c, "sp_");
  addRpy(c, "sp_");
  addXyz(c, "sp_v_", "mps");
  addXyz(c, "sp_w_", "radps");
  addXyz(c, "tip_", "m");
  addXyz(c, "sp_tip_", "m");
  for (const char* a : {"err_x_m", "err_y_m", "err_z_m", "err_rx_rad", "err_ry_rad", "err_rz_rad"}) c.push_back(a);
  addWrench(c, "est_");
  addWrench(c, "ext_contact_");
  addWrench(c, "ext_dist_");
  addWrench(c, "ext_");
  addWrench(c, "ref_");
  addWrench(c, "act_");
  for (int i = 0; i < 12; ++i) c.push_back("rotor_" + std::to_string(i) + "_radps");
  for (int i = 0; i < 6; ++i) c.push_back("tilt_" + std::to_string(i) + "_rad");
  for (int i = 0; i < 6; ++i) c.push_back("thrust_" + std::to_string(i) + "_N");
  for (const char* a : {"saturated", "force_scale", "infeasible", "contact", "penetration_m", "contact_normal_N"})
    c.push_back(a);
  addXyz(c, "contact_w", "N");
  addXyz(c, "sensor_", "N");
  addXyz(c, "sensor_filt_", "N");
  for (const char* a : {"surf_valid", "surf_count", "surf_d_m", "surf_nx", "surf_ny", "surf_nz"}) c.push_back(a);
  addXyz(c, "surf_c", "m");
  c.push_back("planner_mode");
  c.push_back("substeps");
  return c;
}

class Row {
 public:
  explicit Row(std::size_t n) { v_.reserve(n); }
  Row& add(double x) {
    v_.push_back(x);
    return *this;
  }
  template <typename D>
  Row& add(const Eigen::MatrixBase<D>& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) v_.push_back(m(i));
    return *this;
  }
  Row& quat(const Matrix3& r) {
    Eigen::Quaterniond q(r);
    q.normalize();
    if (q.w() < 0.0) q.coeffs() *= -1.0;
    return add(q.w()).add(q.x()).add(q.y()).add(q.z());
  }
  Row& rpy(const Matrix3& r) { return add(toRollPitchYaw(r)); }
  std::vector<double> take() { return std::move(v_); }

 private:
  std::vector<double> v_;
};

// Rest-to-rest quintic moves between configured poses.
class WaypointReference {
 public:
  WaypointReference(const Pose& initial, const std::vector<Waypoint>& wps) : initial_(initial) {
    Setpoint from;
    from.pose = initial;
    for (const auto& w : wps) {
      segments_.emplace_back(from, w.pose, w.start, w.duration);
      starts_.push_back(w.start);
      from = Setpoint{};
      from.pose = w.pose;
    }
  }

  Setpoint sample(double t) const {
    int idx = -1;
    for (std::size_t i = 0; i < starts_.size(); ++i)
      if (starts_[i] <= t) idx = static_cast<int>(i);
    if (idx < 0) {
      Setpoint sp;
      sp.pose = initial_;
      return sp;
    }
    return segments_[idx].sample(t);
  }

 private:
  Pose initial_;
  std::vector<TrajectorySegment> segments_;
  std::vector<double> starts_;
};

PlannerMode scriptedMode(const std::vector<ModeChange>& script, double t) {
  PlannerMode m = PlannerMode::Hold;
  for (const auto& c : script)
    if (c.start <= t + 1e-12) m = c.mode;
  return m;
}

std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over the combined inputs
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1) + 0xBF58476D1CE4E5B9ull * index;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double quantize(double x, double step) { return step > 0.0 ? step * std::round(x / step) : x; }

}  // namespace

std::size_t LogTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("missing column: " + name);
}

bool LogTable::hasColumn(const std::string& name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

std::vector<double> LogTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

const std::vector<std::string>& controlLogColumns() {
  static const std::vector<std::string> cols = buildControlColumns();
  return cols;
}

const std::vector<std::string>& sensorLogColumns() {
  static const std::vector<std::string> cols = {"t_s", "fx_N", "fy_N", "fz_N", "filt_fx_N", "filt_fy_N", "filt_fz_N"};
  return cols;
}

int plannerModeCode(PlannerMode m) { return static_cast<int>(m); }

RunLog runScenario(const ScenarioConfig& cfg) {
  cfg.validate();
  RunLog log;
  log.control.header = controlLogColumns();
  log.sensor.header = sensorLogColumns();

  const VehicleParams& truth = cfg.vehicle;
  const VehicleParams model = truth.nominal();
  const AllocatorGeometry geom = AllocatorGeometry::fromParams(truth);
  Simulator sim(truth, geom, cfg.scene, cfg.disturbance, cfg.actuators);
  Allocator allocator(geom);
  MomentumObserver observer(model, cfg.estimator.gain);
  StateNoiseModel noise(cfg.noise, mixSeed(cfg.seed, 1, 0));
  std::mt19937_64 sensor_rng(mixSeed(cfg.seed, 2, 0));
  std::normal_distribution<double> sensor_noise(0.0, 1.0);
  std::vector<ButterworthLowpass> sensor_filters(
      3, ButterworthLowpass(cfg.force_sensor.filter_order, cfg.force_sensor.cutoff, cfg.rates.sensor));

  const Matrix3 r_bt = model.toolRotation();
  const int per_control = cfg.rates.physics / cfg.rates.control;
  const int per_planner = cfg.rates.physics / cfg.rates.planner;
  const double dt = 1.0 / cfg.rates.physics;
  const double dt_control = 1.0 / cfg.rates.control;
  const long steps = std::lround(cfg.duration * cfg.rates.physics);

  SimState state;
  state.pose = cfg.initial;
  Pose measured = noise.apply(state.pose);

  std::unique_ptr<WaypointReference> waypoints;
  std::unique_ptr<SurfacePlanner> planner;
  if (cfg.reference.kind == ReferenceConfig::Kind::Waypoints)
    waypoints = std::make_unique<WaypointReference>(cfg.initial, cfg.reference.waypoints);
  if (cfg.reference.kind == ReferenceConfig::Kind::Surface)
    planner = std::make_unique<SurfacePlanner>(cfg.reference.planner, model, cfg.initial, 0.0);
  auto reference = [&](double t) {
    if (waypoints) return waypoints->sample(t);
    if (planner) return planner->sample(t);
    Setpoint sp;
    sp.pose = cfg.initial;
    return sp;
  };

  // Start in hover with the actuators already producing the gravity wrench.
  AllocationResult alloc = allocator.allocate(gravityTerm(state.pose.orientation, model));
  sim.resetActuators(alloc.command);
  Wrench applied = alloc.achieved;
  observer.reset(state.twist);

  SurfaceEstimate surface;
  Vector3 sensor_raw = Vector3::Zero();
  Vector3 sensor_filt = Vector3::Zero();
  long sensor_index = 0;
  long tick = 0;

  try {
    for (long n = 0; n < steps; ++n) {
      const double t = static_cast<double>(n) * dt;
      state.time = t;

      // Force sensor: sample k is due at k / rate; zero-order hold of the
      // physics state that is current at that instant.
      while (sensor_index * static_cast<long>(cfg.rates.physics) <= n * static_cast<long>(cfg.rates.sensor)) {
        const ContactResult c = contactWrench(state.pose, state.twist, truth.toolOffset(), cfg.scene);
        Vector3 f = c.sensor_force;
        for (int i = 0; i < 3; ++i) {
          if (cfg.force_sensor.noise > 0.0) f(i) += cfg.force_sensor.noise * sensor_noise(sensor_rng);
          f(i) = quantize(f(i), cfg.force_sensor.resolution);
          sensor_filt(i) = sensor_filters[i].step(f(i));
        }
        sensor_raw = f;
        Row row(7);
        row.add(static_cast<double>(sensor_index) / cfg.rates.sensor).add(sensor_raw).add(sensor_filt);
        log.sensor.rows.push_back(row.take());
        ++sensor_index;
      }

      if (n % per_control == 0) {
        if (tick > 0) noise.advance(dt_control);
        measured = noise.apply(state.pose);
        const ExternalWrench ext = sim.external(state);

        if (planner && n % per_planner == 0) {
          Pose camera;
          camera.position = state.pose.position + state.pose.orientation * truth.cameraPosition();
          camera.orientation = state.pose.orientation * truth.toolRotation();
          const PointCloud cloud = renderDepth(camera, cfg.scene, cfg.perception.camera,
                                               mixSeed(cfg.seed, 3, static_cast<std::uint64_t>(n)), t);
          // Camera and tool frames share axes; the tool origin sits further
          // along the optical axis.
          const PointCloud tool_cloud =
              shifted(cloud, Vector3(0.0, 0.0, -(truth.tool_length - truth.camera_offset)));
          surface = estimateSurface(selectAxisPoints(tool_cloud, cfg.perception.selection_radius),
                                    cfg.perception.min_points);
          planner->tick(t, measured, surface, scriptedMode(cfg.reference.script, t));
        }

        const Setpoint sp = reference(t);
        Wrench estimate;
        if (cfg.estimator.mode == EstimatorMode::Ideal) {
          estimate = ext.total();
        } else {
          estimate = tick == 0 ? observer.estimate()
                               : observer.update(state.twist, applied, measured.orientation, dt_control);
        }
        const ControlTerms ct = controlTerms(measured, state.twist, sp, estimate, cfg.gains, r_bt, model);

        bool infeasible = false;
        try {
          alloc = allocator.allocate(ct.wrench);
        } catch (const InfeasibleWrench&) {
          // Keep as much of the torque demand as the rotors allow.
          infeasible = true;
          double lo = 0.0, hi = 1.0;
          Wrench w = ct.wrench;
          for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            w.torque = mid * ct.wrench.torque;
            try {
              Allocator probe = allocator;
              probe.allocate(w);
              lo = mid;
            } catch (const InfeasibleWrench&) {
              hi = mid;
            }
          }
          w.torque = lo * ct.wrench.torque;
          alloc = allocator.allocate(w);
        }
        applied = alloc.achieved;

        const Vector6 err = poseError(state.pose, sp.pose);
        const Vector3 tip = toolTip(state.pose, truth);
        const Vector3 sp_tip = toolTip(sp.pose, model);
        const std::optional<WorldSurface> world_surface =
            planner ? planner->surface() : std::optional<WorldSurface>{};
        const Vector6 thrusts = groupThrusts(alloc.command, geom);

        Row row(log.control.header.size());
        row.add(t).add(state.pose.position).quat(state.pose.orientation).rpy(state.pose.orientation);
        row.add(state.twist.linear).add(state.twist.angular);
        row.add(measured.position).rpy(measured.orientation);
        row.add(sp.pose.position).quat(sp.pose.orientation).rpy(sp.pose.orientation);
        row.add(sp.velocity);
        row.add(tip).add(sp_tip).add(err);
        row.add(estimate.vector()).add(ext.contact.body.vector()).add(ext.disturbance.vector());
        row.add(ext.total().vector()).add(ct.wrench.vector()).add(alloc.achieved.vector());
        row.add(alloc.command.rotor_speeds).add(alloc.command.tilt).add(thrusts);
        row.add(alloc.saturated ? 1.0 : 0.0).add(alloc.force_scale).add(infeasible ? 1.0 : 0.0);
        row.add(ext.contact.in_contact ? 1.0 : 0.0).add(ext.contact.max_penetration).add(ext.contact.normal_force);
        row.add(ext.contact.world_force).add(sensor_raw).add(sensor_filt);
        row.add(surface.valid ? 1.0 : 0.0).add(static_cast<double>(surface.count)).add(surface.distance);
        if (world_surface) {
          row.add(world_surface->normal).add(world_surface->point);
        } else {
          row.add(Vector3::Zero()).add(Vector3::Zero());
        }
        row.add(planner ? plannerModeCode(planner->activeMode()) : -1);
        row.add(sim.lastSubsteps());
        log.control.rows.push_back(row.take());
        ++tick;
      }
      state = sim.step(state, alloc.command, dt);
    }
  } catch (const NonFiniteState& e) {
    log.completed = false;
    log.failure = e.what();
  } catch (const AngleNearPi& e) {
    log.completed = false;
    log.failure = e.what();
  }
  return log;
}

void writeCsv(std::ostream& out, const LogTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g", row[i] == 0.0 ? 0.0 : row[i]);
      if (i) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

LogTable readCsv(std::istream& in) {
  LogTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty log file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(t.header.size());
    const char* p = line.c_str();
    while (*p) {
      char* end = nullptr;
      row.push_back(std::strtod(p, &end));
      if (end == p) throw std::runtime_error("malformed log row");
      p = end;
      if (*p == ',') ++p;
    }
    if (row.size() != t.header.size()) throw std::runtime_error("log row width differs from header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

RunFiles writeRunLog(const RunLog& log, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  RunFiles f{dir / (stem + ".csv"), dir / (stem + "_sensor.csv")};
  {
    std::ofstream out(f.control);
    if (!out) throw std::runtime_error("cannot write " + f.control.string());
    writeCsv(out, log.control);
  }
  {
    std::ofstream out(f.sensor);
    if (!out) throw std::runtime_error("cannot write " + f.sensor.string());
    writeCsv(out, log.sensor);
  }
  return f;
}

}  // namespace omniam
