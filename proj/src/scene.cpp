#include "omniam/scene.hpp"

#include <cmath>
#include <stdexcept>

namespace omniam {

namespace {

bool isUnit(const Vector3& v) { return std::abs(v.norm() - 1.0) < 1e-9; }

}  // namespace

void Scene::validate() const {
  for (const auto& prim : primitives) {
    if (const auto* pl = std::get_if<Plane>(&prim)) {
      if (!isUnit(pl->normal)) throw std::invalid_argument("plane normal must be unit length");
    } else {
      const auto& cy = std::get<Cylinder>(prim);
      if (!isUnit(cy.axis_direction)) throw std::invalid_argument("cylinder axis must be unit length");
      if (!(cy.radius > 0.0)) throw std::invalid_argument("cylinder radius must be positive");
    }
  }
  if (contact.stiffness < 0.0 || contact.damping < 0.0 || contact.friction < 0.0)
    throw std::invalid_argument("contact coefficients must be non-negative");
  if (!(contact.velocity_epsilon > 0.0)) throw std::invalid_argument("friction regularization must be positive");
}

Penetration penetration(const Primitive& p, const Vector3& point) {
  if (const auto* pl = std::get_if<Plane>(&p)) {
    return {-(point - pl->point).dot(pl->normal), pl->normal};
  }
  const auto& cy = std::get<Cylinder>(p);
  const Vector3 rel = point - cy.axis_point;
  const Vector3 radial = rel - rel.dot(cy.axis_direction) * cy.axis_direction;
  const double rho = radial.norm();
  // On the axis the radial direction is undefined; any perpendicular works.
  Vector3 u = rho > 1e-12 ? Vector3(radial / rho) : cy.axis_direction.unitOrthogonal();
  if (cy.concave) return {rho - cy.radius, -u};
  return {cy.radius - rho, u};
}

std::optional<double> intersectRay(const Primitive& p, const Vector3& origin, const Vector3& direction) {
  if (const auto* pl = std::get_if<Plane>(&p)) {
    const double denom = direction.dot(pl->normal);
    if (denom >= 0.0) return std::nullopt;  // parallel or back face
    const double t = (pl->point - origin).dot(pl->normal) / denom;
    if (t > 0.0) return t;
    return std::nullopt;
  }
  const auto& cy = std::get<Cylinder>(p);
  const Vector3& a = cy.axis_direction;
  const Vector3 oc = origin - cy.axis_point;
  const Vector3 d_perp = direction - direction.dot(a) * a;
  const Vector3 o_perp = oc - oc.dot(a) * a;
  const double qa = d_perp.squaredNorm();
  if (qa < 1e-15) return std::nullopt;
  const double qb = 2.0 * d_perp.dot(o_perp);
  const double qc = o_perp.squaredNorm() - cy.radius * cy.radius;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  double t0 = q / qa;
  double t1 = q != 0.0 ? qc / q : t0;
  if (t0 > t1) std::swap(t0, t1);
  for (double t : {t0, t1}) {
    if (!(t > 0.0)) continue;
    const Penetration pen = penetration(p, origin + t * direction);
    if (direction.dot(pen.normal) < 0.0) return t;
  }
  return std::nullopt;
}

ContactResult contactWrench(const Pose& pose, const Twist& twist, const Vector3& tool_offset, const Scene& scene) {
  ContactResult out;
  out.body.frame = Frame::Body;
  const Matrix3& r = pose.orientation;
  const Vector3 tip = pose.position + r * tool_offset;
  const Vector3 tip_velocity = r * (twist.linear + twist.angular.cross(tool_offset));
  const ContactParams& c = scene.contact;

  for (const auto& prim : scene.primitives) {
    const Penetration pen = penetration(prim, tip);
    out.max_penetration = std::max(out.max_penetration, pen.depth);
    if (pen.depth <= 0.0) continue;
    const double depth_rate = -tip_velocity.dot(pen.normal);
    const double fn = std::max(0.0, c.stiffness * pen.depth + c.damping * depth_rate);
    const Vector3 vt = tip_velocity - tip_velocity.dot(pen.normal) * pen.normal;
    const Vector3 friction = -c.friction * fn * vt / std::max(vt.norm(), c.velocity_epsilon);
    const Vector3 f = fn * pen.normal + friction;
    out.world_force += f;
    out.normal_force += fn;
    out.in_contact = true;
    if (const auto* pl = std::get_if<Plane>(&prim); pl && pl->force_sensor) out.sensor_force += f;
  }
  const Wrench at_tip{r.transpose() * out.world_force, Vector3::Zero(), Frame::Body};
  out.body = wrenchAtOrigin(at_tip, tool_offset);
  return out;
}

}  // namespace omniam
