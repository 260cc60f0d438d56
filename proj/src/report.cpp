#include "omniam/report.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace omniam {

namespace {

class Columns {
 public:
  explicit Columns(const LogTable& t) : t_(t) {}
  bool has(const std::string& n) const { return t_.hasColumn(n); }
  bool has3(const std::string& prefix, const std::string& unit) const {
    return has(prefix + "x_" + unit) && has(prefix + "y_" + unit) && has(prefix + "z_" + unit);
  }
  double at(std::size_t row, const std::string& n) const { return t_.rows[row][t_.column(n)]; }
  Vector3 vec(std::size_t row, const std::string& prefix, const std::string& unit) const {
    return Vector3(at(row, prefix + "x_" + unit), at(row, prefix + "y_" + unit), at(row, prefix + "z_" + unit));
  }
  Matrix3 rot(std::size_t row, const std::string& prefix) const {
    Eigen::Quaterniond q(at(row, prefix + "q_w"), at(row, prefix + "q_x"), at(row, prefix + "q_y"),
                         at(row, prefix + "q_z"));
    return q.normalized().toRotationMatrix();
  }
  bool hasQuat(const std::string& prefix) const { return has(prefix + "q_w"); }
  std::size_t size() const { return t_.size(); }

 private:
  const LogTable& t_;
};

double wrapAngle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

double riseTime(const std::vector<double>& t, const std::vector<double>& y, double final_value) {
  double t10 = -1.0, t90 = -1.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double frac = y[i] / final_value;
    if (t10 < 0.0 && frac >= 0.1) t10 = t[i];
    if (t90 < 0.0 && frac >= 0.9) {
      t90 = t[i];
      break;
    }
  }
  if (t10 < 0.0 || t90 < 0.0) return -1.0;
  return t90 - t10;
}

Metrics computeMetrics(const LogTable& table, const AnalysisConfig& analysis) {
  Metrics m;
  const Columns c(table);
  const std::size_t n = c.size();
  m["samples"] = static_cast<double>(n);
  if (n == 0 || !c.has("t_s")) return m;
  const std::vector<double> t = table.values("t_s");
  const double dt = n > 1 ? t[1] - t[0] : 0.0;
  m["duration_s"] = t.back() - t.front() + dt;

  if (c.has3("p_", "m") && c.has3("sp_p_", "m")) {
    Vector3 sq = Vector3::Zero();
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vector3 e = c.vec(i, "p_", "m") - c.vec(i, "sp_p_", "m");
      sq += e.cwiseAbs2();
      peak = std::max(peak, e.norm());
    }
    sq /= static_cast<double>(n);
    m["position_rmse_m"] = std::sqrt(sq.sum());
    m["position_rmse_x_m"] = std::sqrt(sq.x());
    m["position_rmse_y_m"] = std::sqrt(sq.y());
    m["position_rmse_z_m"] = std::sqrt(sq.z());
    m["peak_position_error_m"] = peak;
  }

  const bool contact_cols = c.has("contact");
  if (c.hasQuat("") && c.hasQuat("sp_")) {
    double peak = 0.0, peak_contact = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rotationAngle(c.rot(i, ""), c.rot(i, "sp_"));
      peak = std::max(peak, a);
      if (contact_cols && c.at(i, "contact") > 0.5) peak_contact = std::max(peak_contact, a);
    }
    m["attitude_error_max_rad"] = peak;
    if (contact_cols) m["attitude_error_contact_max_rad"] = peak_contact;
  }
  if (c.has("err_rz_rad")) {
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::abs(c.at(i, "err_rz_rad")));
    m["peak_yaw_error_rad"] = peak;
  }

  if (contact_cols) {
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i) count += c.at(i, "contact") > 0.5 ? 1.0 : 0.0;
    m["contact_time_s"] = count * dt;
  }
  if (c.has("penetration_m")) {
    double peak = -1e300;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, c.at(i, "penetration_m"));
    m["max_penetration_m"] = peak;
  }

  if (c.has("saturated")) {
    std::size_t run = 0, longest = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (c.at(i, "saturated") > 0.5) {
        ++run;
        ++total;
        longest = std::max(longest, run);
      } else {
        run = 0;
      }
    }
    m["max_saturation_run_s"] = static_cast<double>(longest) * dt;
    m["saturation_fraction"] = static_cast<double>(total) / static_cast<double>(n);
  }
  if (c.has("infeasible")) {
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i) count += c.at(i, "infeasible") > 0.5 ? 1.0 : 0.0;
    m["infeasible_count"] = count;
  }

  static const char* kAxes[] = {"fx_N", "fy_N", "fz_N", "tx_Nm", "ty_Nm", "tz_Nm"};
  if (c.has("est_fx_N") && c.has("ext_fx_N")) {
    int best_axis = -1;
    double best_peak = 0.0;
    for (int a = 0; a < 6; ++a) {
      const std::vector<double> est = table.values(std::string("est_") + kAxes[a]);
      const std::vector<double> ext = table.values(std::string("ext_") + kAxes[a]);
      m[std::string("est_rmse_") + kAxes[a]] = rmse(est, ext);
      for (double v : ext)
        if (std::abs(v) > std::abs(best_peak)) {
          best_peak = v;
          best_axis = a;
        }
    }
    if (best_axis >= 0 && std::abs(best_peak) > 1e-6) {
      const double rise = riseTime(t, table.values(std::string("est_") + kAxes[best_axis]), best_peak);
      if (rise >= 0.0) m["estimate_rise_time_s"] = rise;
    }
  }

  if (c.has3("meas_p_", "m") && c.has("meas_roll_rad")) {
    Vector3 sq_p = Vector3::Zero(), sq_r = Vector3::Zero();
    static const char* kRpy[] = {"roll_rad", "pitch_rad", "yaw_rad"};
    for (std::size_t i = 0; i < n; ++i) {
      sq_p += (c.vec(i, "meas_p_", "m") - c.vec(i, "p_", "m")).cwiseAbs2();
      for (int a = 0; a < 3; ++a) {
        const double d = wrapAngle(c.at(i, std::string("meas_") + kRpy[a]) - c.at(i, kRpy[a]));
        sq_r(a) += d * d;
      }
    }
    sq_p /= static_cast<double>(n);
    sq_r /= static_cast<double>(n);
    m["state_rmse_x_m"] = std::sqrt(sq_p.x());
    m["state_rmse_y_m"] = std::sqrt(sq_p.y());
    m["state_rmse_z_m"] = std::sqrt(sq_p.z());
    m["state_rmse_roll_rad"] = std::sqrt(sq_r.x());
    m["state_rmse_pitch_rad"] = std::sqrt(sq_r.y());
    m["state_rmse_yaw_rad"] = std::sqrt(sq_r.z());
  }

  if (!analysis.force_windows.empty() && c.has("contact_normal_N")) {
    double fmin = 1e300, fmax = -1e300, inplane = 0.0;
    int k = 0;
    const Vector3 axis = analysis.contact_axis.normalized();
    for (const auto& [a, b] : analysis.force_windows) {
      double sum = 0.0;
      Vector3 err = Vector3::Zero();
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (t[i] < b - analysis.window_average || t[i] > b || t[i] < a) continue;
        sum += c.at(i, "contact_normal_N");
        if (c.has3("tip_", "m") && c.has3("sp_tip_", "m")) {
          const Vector3 e = c.vec(i, "tip_", "m") - c.vec(i, "sp_tip_", "m");
          err += e - e.dot(axis) * axis;
        }
        ++count;
      }
      const double mean = count ? sum / static_cast<double>(count) : 0.0;
      if (count) err /= static_cast<double>(count);
      m["force_window_" + std::to_string(k++) + "_N"] = mean;
      fmin = std::min(fmin, mean);
      fmax = std::max(fmax, mean);
      inplane = std::max(inplane, err.norm());
    }
    m["force_window_count"] = static_cast<double>(analysis.force_windows.size());
    m["force_window_min_N"] = fmin;
    m["force_window_max_N"] = fmax;
    m["in_plane_error_max_m"] = inplane;
  }

  if (c.has("planner_mode") && c.has3("tip_", "m")) {
    const double slide_code = plannerModeCode(PlannerMode::Slide);
    double length = 0.0, count = 0.0, in_contact = 0.0;
    bool have_prev = false;
    Vector3 prev = Vector3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(c.at(i, "planner_mode") - slide_code) > 0.5) {
        have_prev = false;
        continue;
      }
      const Vector3 tip = c.vec(i, "tip_", "m");
      if (have_prev) length += (tip - prev).norm();
      prev = tip;
      have_prev = true;
      count += 1.0;
      if (c.has("penetration_m") && c.at(i, "penetration_m") > 0.0) in_contact += 1.0;
    }
    if (count > 0.0) {
      m["slide_duration_s"] = count * dt;
      m["slide_distance_m"] = length;
      m["slide_speed_mps"] = length / (count * dt);
      m["slide_contact_fraction"] = in_contact / count;
    }
  }

  if (c.has3("sensor_filt_", "N") && c.has("est_fx_N") && c.hasQuat("")) {
    const Vector3 axis = analysis.contact_axis.normalized();
    std::vector<double> est, meas;
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vector3 f_body(c.at(i, "est_fx_N"), c.at(i, "est_fy_N"), c.at(i, "est_fz_N"));
      est.push_back(axis.dot(c.rot(i, "") * f_body));
      meas.push_back(axis.dot(c.vec(i, "sensor_filt_", "N")));
      peak = std::max(peak, std::abs(meas.back()));
    }
    if (peak > 0.0) {
      m["force_rmse_N"] = rmse(est, meas);
      m["sensor_force_peak_N"] = peak;
    }
  }
  return m;
}

std::vector<AssertionResult> evaluateAssertions(const Metrics& metrics, const std::vector<Assertion>& assertions) {
  std::vector<AssertionResult> out;
  for (const auto& a : assertions) {
    AssertionResult r;
    r.assertion = a;
    auto it = metrics.find(a.metric);
    if (it != metrics.end()) {
      r.found = true;
      r.value = it->second;
      const double v = r.value;
      if (a.op == "<") r.passed = v < a.value;
      else if (a.op == "<=") r.passed = v <= a.value;
      else if (a.op == ">") r.passed = v > a.value;
      else if (a.op == ">=") r.passed = v >= a.value;
      else if (a.op == "within") r.passed = std::abs(v - a.value) <= a.tolerance;
      if (!std::isfinite(v)) r.passed = false;
    }
    out.push_back(r);
  }
  return out;
}

void printMetrics(std::ostream& out, const Metrics& metrics) {
  std::size_t width = 0;
  for (const auto& [k, v] : metrics) width = std::max(width, k.size());
  char buf[64];
  for (const auto& [k, v] : metrics) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    out << "  " << k << std::string(width - k.size() + 2, ' ') << buf << '\n';
  }
}

void printAssertions(std::ostream& out, const std::vector<AssertionResult>& results) {
  char buf[160];
  for (const auto& r : results) {
    const auto& a = r.assertion;
    if (!r.found) {
      out << "FAIL  " << a.metric << " (metric not available)\n";
      continue;
    }
    if (a.op == "within")
      std::snprintf(buf, sizeof buf, "%s  %s = %.6g (expected %.6g +- %.6g)", r.passed ? "PASS" : "FAIL",
                    a.metric.c_str(), r.value, a.value, a.tolerance);
    else
      std::snprintf(buf, sizeof buf, "%s  %s = %.6g (expected %s %.6g)", r.passed ? "PASS" : "FAIL", a.metric.c_str(),
                    r.value, a.op.c_str(), a.value);
    out << buf << '\n';
  }
}

}  // namespace omniam
