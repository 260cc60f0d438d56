#include "omniam/wrench_estimator.hpp"

#include "omniam/dynamics.hpp"
#include "omniam/impedance.hpp"

namespace omniam {

MomentumObserver::MomentumObserver(const VehicleParams& params, const Vector6& gain)
    : params_(params), inertia_(params.inertiaMatrix()), gain_(gain) {
  if (!(gain.array() > 0.0).all()) throw NonPositiveGain("observer gains must be positive");
}

void MomentumObserver::reset(const Twist& v) {
  integral_ = inertia_ * v.vector();
  estimate_ = Wrench{};
  prev_twist_ = v;
  prev_rotation_.reset();
  initialized_ = true;
}

const Wrench& MomentumObserver::update(const Twist& v, const Wrench& actuation, const Matrix3& r, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("observer step must be positive");
  if (!initialized_) reset(v);
  // Explicit Euler: the integrand is evaluated at the start of the interval.
  const Matrix3 r_prev = prev_rotation_ ? *prev_rotation_ : r;
  integral_ += dt * (actuation.vector() - coriolisTerm(prev_twist_, params_).vector() -
                     gravityTerm(r_prev, params_).vector() + estimate_.vector());
  prev_twist_ = v;
  prev_rotation_ = r;
  estimate_ = Wrench::fromVector(gain_.asDiagonal() * (inertia_ * v.vector() - integral_));
  return estimate_;
}

}  // namespace omniam
