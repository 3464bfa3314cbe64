#include "gazeaug/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace gazeaug {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void validate(const AugmentationParams& params) {
  if (!(params.d_n > 0.0)) throw std::invalid_argument("normalized distance must be positive");
  if (!(params.f_n > 0.0)) throw std::invalid_argument("normalized focal length must be positive");
  if (params.patch_width <= 0 || params.patch_height <= 0) throw std::invalid_argument("patch size must be positive");
  const auto& d = params.distribution;
  if (!(d.var_yaw >= 0.0) || !(d.var_pitch >= 0.0)) throw std::invalid_argument("variances must be non-negative");
  if (!std::isfinite(d.mean_yaw) || !std::isfinite(d.mean_pitch) || !std::isfinite(d.var_yaw) ||
      !std::isfinite(d.var_pitch))
    throw std::invalid_argument("distribution parameters must be finite");
}

RngStream sample_stream(std::uint64_t seed, std::uint64_t sample_index) {
  return RngStream(splitmix64(splitmix64(seed) ^ sample_index));
}

Vec3 correct_gaze_to_base(const RigidTransform& pose, const Vec3& gaze_actual) {
  return apply_to_direction(pose.rotation.transpose(), gaze_actual);
}

AnglePair sample_head_pose(const HeadPoseDistribution& dist, RngStream& rng) {
  std::normal_distribution<double> standard(0.0, 1.0);
  const double zy = standard(rng);
  const double zp = standard(rng);
  return {dist.mean_yaw + std::sqrt(dist.var_yaw) * zy, dist.mean_pitch + std::sqrt(dist.var_pitch) * zp};
}

AugmentedSample apply_augmentation(const TexturedMesh& mesh, const Vec3& gaze_base, const AnglePair& angles) {
  const RotationMatrix3 r = rotation_from_yaw_pitch(angles);
  AugmentedSample out;
  out.head_pose = r;
  out.gaze = apply_to_direction(r, gaze_base);
  out.mesh.vertices = apply_to_points({r, Vec3::Zero()}, mesh.vertices);
  out.mesh.triangles = mesh.triangles;
  out.mesh.uv = mesh.uv;
  out.mesh.texture = mesh.texture;
  return out;
}

VirtualCamera make_virtual_camera(const Vec3& eye_pos, const AugmentationParams& params) {
  if (!eye_pos.allFinite()) throw std::invalid_argument("eye position must be finite");
  return {Vec3(eye_pos.x(), eye_pos.y(), eye_pos.z() - params.d_n), params.f_n, params.patch_width,
          params.patch_height};
}

}  // namespace gazeaug
