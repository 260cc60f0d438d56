#include "omniam/analysis.hpp"

#include "omniam/vehicle.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace omniam {

Eigen::VectorXd rmse(const Eigen::MatrixXd& series, const Eigen::MatrixXd& reference) {
  if (series.rows() != reference.rows() || series.cols() != reference.cols())
    throw LengthMismatch("series and reference differ in shape");
  if (series.rows() == 0) return Eigen::VectorXd::Zero(series.cols());
  return ((series - reference).array().square().colwise().sum() / static_cast<double>(series.rows()))
      .sqrt()
      .transpose();
}

double rmse(const std::vector<double>& series, const std::vector<double>& reference) {
  if (series.size() != reference.size()) throw LengthMismatch("series and reference differ in length");
  if (series.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double d = series[i] - reference[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(series.size()));
}

ButterworthLowpass::ButterworthLowpass(int order, double cutoff, double rate) : order_(order) {
  if (order < 1) throw std::invalid_argument("filter order must be at least 1");
  if (!(cutoff > 0.0) || !(rate > 2.0 * cutoff)) throw std::invalid_argument("cutoff must lie below Nyquist");
  const double k = 2.0 * rate;
  const double wc = k * std::tan(std::numbers::pi * cutoff / rate);
  const double w2 = wc * wc;
  for (int i = 0; i < order / 2; ++i) {
    // Analog pole pair wc * exp(j theta) in the left half plane.
    const double theta = std::numbers::pi * (2.0 * i + order + 1) / (2.0 * order);
    const double re = wc * std::cos(theta);
    const double a0 = k * k - 2.0 * re * k + w2;
    Section s;
    s.b0 = w2 / a0;
    s.b1 = 2.0 * w2 / a0;
    s.b2 = w2 / a0;
    s.a1 = (2.0 * w2 - 2.0 * k * k) / a0;
    s.a2 = (k * k + 2.0 * re * k + w2) / a0;
    sections_.push_back(s);
  }
  if (order % 2 == 1) {
    const double a0 = k + wc;
    Section s;
    s.b0 = wc / a0;
    s.b1 = wc / a0;
    s.b2 = 0.0;
    s.a1 = (wc - k) / a0;
    s.a2 = 0.0;
    sections_.push_back(s);
  }
}

double ButterworthLowpass::step(double x) {
  double y = x;
  for (auto& s : sections_) {
    // Transposed direct form II.
    const double out = s.b0 * y + s.s1;
    s.s1 = s.b1 * y - s.a1 * out + s.s2;
    s.s2 = s.b2 * y - s.a2 * out;
    y = out;
  }
  return y;
}

std::vector<double> ButterworthLowpass::filter(const std::vector<double>& x) {
  std::vector<double> y;
  y.reserve(x.size());
  for (double v : x) y.push_back(step(v));
  return y;
}

void ButterworthLowpass::reset() {
  for (auto& s : sections_) s.s1 = s.s2 = 0.0;
}

StateNoiseModel::StateNoiseModel(NoiseModelParams params, std::uint64_t seed) : params_(params), rng_(seed) {
  if (params_.position_walk < 0.0 || params_.yaw_walk < 0.0 || params_.position_noise < 0.0 ||
      params_.attitude_noise < 0.0)
    throw std::invalid_argument("noise levels must be non-negative");
}

void StateNoiseModel::advance(double dt) {
  if (!params_.enabled) return;
  // Standard deviations are specified after one minute; scale to dt.
  const double scale = std::sqrt(dt / 60.0);
  for (int i = 0; i < 3; ++i) drift_p_(i) += params_.position_walk * scale * normal_(rng_);
  drift_yaw_ += deg2rad(params_.yaw_walk) * scale * normal_(rng_);
}

Pose StateNoiseModel::apply(const Pose& truth) {
  if (!params_.enabled) return truth;
  Pose out;
  Vector3 white_p = Vector3::Zero();
  Vector3 white_r = Vector3::Zero();
  if (params_.position_noise > 0.0)
    for (int i = 0; i < 3; ++i) white_p(i) = params_.position_noise * normal_(rng_);
  if (params_.attitude_noise > 0.0)
    for (int i = 0; i < 3; ++i) white_r(i) = params_.attitude_noise * normal_(rng_);
  out.position = truth.position + drift_p_ + white_p;
  out.orientation = rotationZ(drift_yaw_) * truth.orientation * expSO3(white_r);
  return out;
}

}  // namespace omniam
