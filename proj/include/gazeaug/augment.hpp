#pragma once

#include <cstdint>
#include <random>

#include "gazeaug/facemesh.hpp"
#include "gazeaug/geometry.hpp"
#include "gazeaug/render.hpp"

namespace gazeaug {

/// Independent normal yaw and pitch, in degrees and degrees^2.
struct HeadPoseDistribution {
  double mean_yaw = 0.0;
  double mean_pitch = 30.0;
  double var_yaw = 10.0;
  double var_pitch = 10.0;

  friend bool operator==(const HeadPoseDistribution&, const HeadPoseDistribution&) = default;
};

struct AugmentationParams {
  double d_n = 600.0;  // normalized distance, mm
  double f_n = 650.0;  // normalized focal length, px
  int patch_width = 96;
  int patch_height = 64;
  std::uint64_t seed = 42;
  HeadPoseDistribution distribution;
};

/// Throws std::invalid_argument for negative variances or non-positive
/// distance, focal length or patch size.
void validate(const AugmentationParams& params);

using RngStream = std::mt19937_64;

/// Stream for one sample, a pure function of (seed, sample_index).
RngStream sample_stream(std::uint64_t seed, std::uint64_t sample_index);

/// Expresses an annotated gaze direction in the centered model frame:
/// g_b = R^T g_a. Throws std::invalid_argument on a zero vector.
Vec3 correct_gaze_to_base(const RigidTransform& pose, const Vec3& gaze_actual);

/// One (yaw, pitch) draw. Always consumes two standard-normal variates so
/// zero variances return the means exactly.
AnglePair sample_head_pose(const HeadPoseDistribution& dist, RngStream& rng);

struct AugmentedSample {
  TexturedMesh mesh;
  Vec3 gaze;
  RotationMatrix3 head_pose;
};

/// Rotates mesh vertices and gaze by R(yaw, pitch); uv and texture are
/// carried over unchanged.
AugmentedSample apply_augmentation(const TexturedMesh& mesh, const Vec3& gaze_base, const AnglePair& angles);

/// Camera d_n behind the eye along -z, looking along +z, with the eye on
/// its optical axis.
VirtualCamera make_virtual_camera(const Vec3& eye_pos, const AugmentationParams& params);

}  // namespace gazeaug
