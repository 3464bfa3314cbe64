#include "gazeaug/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gazeaug {

RotationMatrix3 rotation_pitch(double pitch_deg) {
  const double c = std::cos(deg2rad(pitch_deg));
  const double s = std::sin(deg2rad(pitch_deg));
  RotationMatrix3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

RotationMatrix3 rotation_yaw(double yaw_deg) {
  const double c = std::cos(deg2rad(yaw_deg));
  const double s = std::sin(deg2rad(yaw_deg));
  RotationMatrix3 r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

RotationMatrix3 rotation_from_yaw_pitch(const AnglePair& angles) {
  return rotation_pitch(angles.pitch) * rotation_yaw(angles.yaw);
}

AnglePair yaw_pitch_from_direction(const Vec3& dir) {
  // R(y,p) * z = (sin y, -sin p cos y, cos p cos y)
  const Vec3 d = normalized_direction(dir);
  const double yaw = std::asin(std::clamp(d.x(), -1.0, 1.0));
  const double pitch = std::atan2(-d.y(), d.z());
  return {rad2deg(yaw), rad2deg(pitch)};
}

RotationMatrix3 rotation_from_axis_angle(const Vec3& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta < 1e-15) {
    // first-order expansion keeps the map smooth at zero
    RotationMatrix3 r = RotationMatrix3::Identity();
    r(0, 1) = -axis_angle.z();
    r(0, 2) = axis_angle.y();
    r(1, 0) = axis_angle.z();
    r(1, 2) = -axis_angle.x();
    r(2, 0) = -axis_angle.y();
    r(2, 1) = axis_angle.x();
    return r;
  }
  return Eigen::AngleAxisd(theta, axis_angle / theta).toRotationMatrix();
}

double rotation_angle_between(const RotationMatrix3& a, const RotationMatrix3& b) {
  const RotationMatrix3 rel = a.transpose() * b;
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near zero; use the skew part there
  const Vec3 skew{rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1)};
  return rad2deg(std::atan2(0.5 * skew.norm(), c));
}

bool is_rotation(const RotationMatrix3& r, double tol) {
  if (!r.allFinite()) return false;
  const Mat3 gram = r.transpose() * r;
  if (((gram - Mat3::Identity()).cwiseAbs().array() > tol).any()) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

Vec3 apply(const RigidTransform& transform, const Vec3& point) {
  return transform.rotation * point + transform.translation;
}

std::vector<Vec3> apply_to_points(const RigidTransform& transform, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(apply(transform, p));
  return out;
}

Vec3 apply_to_direction(const RotationMatrix3& rotation, const Vec3& dir) {
  if (dir.squaredNorm() == 0.0) throw std::invalid_argument("apply_to_direction: zero-length direction");
  return rotation * dir;
}

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
  return {outer.rotation * inner.rotation, outer.rotation * inner.translation + outer.translation};
}

RigidTransform inverse(const RigidTransform& transform) {
  const RotationMatrix3 rt = transform.rotation.transpose();
  return {rt, -(rt * transform.translation)};
}

double angular_error(const Vec3& g, const Vec3& g_est) {
  const double ng = g.norm();
  const double ne = g_est.norm();
  if (ng == 0.0 || ne == 0.0) throw std::invalid_argument("angular_error: zero-length vector");
  // acos(|g.g_e| / (|g||g_e|)) written as atan2: same angle, but accurate near 0
  const Vec3 a = g / ng;
  const Vec3 b = g_est / ne;
  return rad2deg(std::atan2(a.cross(b).norm(), std::abs(a.dot(b))));
}

Vec3 normalized_direction(const Vec3& v) {
  const double n = v.norm();
  if (n == 0.0 || !std::isfinite(n)) throw std::invalid_argument("zero-length or non-finite direction");
  return v / n;
}

}  // namespace gazeaug
