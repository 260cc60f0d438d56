#pragma once

#include "omniam/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace omniam {

class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-column root-mean-square difference of two sample matrices (rows are
/// samples). Throws LengthMismatch when the shapes differ.
Eigen::VectorXd rmse(const Eigen::MatrixXd& series, const Eigen::MatrixXd& reference);
double rmse(const std::vector<double>& series, const std::vector<double>& reference);

/// Digital Butterworth low-pass from the bilinear transform with the cutoff
/// prewarped, realized as cascaded second-order sections (plus one
/// first-order section for odd orders). Starts from rest.
class ButterworthLowpass {
 public:
  ButterworthLowpass(int order = 5, double cutoff = 5.0, double rate = 800.0);

  double step(double x);
  std::vector<double> filter(const std::vector<double>& x);
  void reset();

  int order() const { return order_; }

 private:
  struct Section {
    double b0, b1, b2, a1, a2;
    double s1 = 0.0, s2 = 0.0;
  };
  std::vector<Section> sections_;
  int order_;
};

/// Slow random-walk drift of position and yaw plus white measurement noise,
/// standing in for an on-board state estimator.
struct NoiseModelParams {
  bool enabled = false;
  double position_walk = 0.01;    // drift standard deviation after 60 s [m]
  double yaw_walk = 0.1;          // drift standard deviation after 60 s [deg]
  double position_noise = 0.0;    // white noise [m]
  double attitude_noise = 0.0;    // white noise [rad]
};

class StateNoiseModel {
 public:
  explicit StateNoiseModel(NoiseModelParams params = {}, std::uint64_t seed = 0);

  /// Advances the random walks by dt.
  void advance(double dt);
  /// Perceived pose; identical to the input when disabled.
  Pose apply(const Pose& truth);

  const Vector3& positionDrift() const { return drift_p_; }
  double yawDrift() const { return drift_yaw_; }
  const NoiseModelParams& params() const { return params_; }

 private:
  NoiseModelParams params_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Vector3 drift_p_ = Vector3::Zero();
  double drift_yaw_ = 0.0;
};

}  // namespace omniam
