#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <span>
#include <vector>

namespace gazeaug {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// 3x3 rotation matrix. Orthonormality is the caller's contract; use
/// is_rotation() to check it.
using RotationMatrix3 = Mat3;

/// Yaw and pitch in degrees. Roll is intentionally not represented.
struct AnglePair {
  double yaw = 0.0;
  double pitch = 0.0;
};

/// SE(3) pose: p -> rotation * p + translation (translation in mm).
struct RigidTransform {
  RotationMatrix3 rotation = RotationMatrix3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
};

constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

RotationMatrix3 rotation_pitch(double pitch_deg);
RotationMatrix3 rotation_yaw(double yaw_deg);

/// R(y, p) = R_pitch(p) * R_yaw(y).
RotationMatrix3 rotation_from_yaw_pitch(const AnglePair& angles);

/// Inverse of rotation_from_yaw_pitch on the forward axis: returns the (yaw,
/// pitch) whose rotation maps +z onto `dir`. Requires dir.z() > 0 for an
/// exact inverse; dir is normalized internally.
AnglePair yaw_pitch_from_direction(const Vec3& dir);

/// Rodrigues exponential map.
RotationMatrix3 rotation_from_axis_angle(const Vec3& axis_angle);

/// Geodesic distance between two rotations, in degrees.
double rotation_angle_between(const RotationMatrix3& a, const RotationMatrix3& b);

bool is_rotation(const RotationMatrix3& r, double tol = 1e-9);

Vec3 apply(const RigidTransform& transform, const Vec3& point);
std::vector<Vec3> apply_to_points(const RigidTransform& transform, std::span<const Vec3> points);

/// Rotates a direction. Translation never applies to directions.
/// Throws std::invalid_argument for a zero vector.
Vec3 apply_to_direction(const RotationMatrix3& rotation, const Vec3& dir);

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);
RigidTransform inverse(const RigidTransform& transform);

/// Angle between two directions in degrees, folded to [0, 90] by the
/// absolute value of the dot product. Throws on zero-length input.
double angular_error(const Vec3& g, const Vec3& g_est);

/// Unit vector in the direction of v. Throws on zero-length input.
Vec3 normalized_direction(const Vec3& v);

}  // namespace gazeaug
