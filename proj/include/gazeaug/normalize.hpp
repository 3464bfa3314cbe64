#pragma once

#include <cstdint>

#include "gazeaug/augment.hpp"
#include "gazeaug/camera.hpp"
#include "gazeaug/geometry.hpp"
#include "gazeaug/image.hpp"

namespace gazeaug {

/// Maps a real camera frame into the normalized space used for training:
/// the camera is rotated so the eye lies on its optical axis with the head's
/// lateral axis horizontal, then scaled so the eye sits at d_n.
struct NormalizationResult {
  RotationMatrix3 rotation = RotationMatrix3::Identity();  // camera -> normalized camera
  double scale = 1.0;                                      // d_n / |eye|
  Mat3 warp = Mat3::Identity();                            // source pixel -> patch pixel
  int width = 0;
  int height = 0;
  EyePatchImage patch;
};

/// Throws std::domain_error when the eye is not in front of the camera and
/// std::invalid_argument when the head's lateral axis is parallel to the
/// viewing ray.
NormalizationResult compute_normalization(const RotationMatrix3& head_rotation, const Vec3& eye_center_cam,
                                          const CameraIntrinsics& intrinsics, const AugmentationParams& params);

/// Inverse-warps `frame` into a width x height patch with bilinear sampling.
/// Samples that fall outside the frame read `background`.
EyePatchImage normalize_image(const Image& frame, const NormalizationResult& result, std::uint8_t background = 0);

/// Unit R_norm * g, for preparing labels in the normalized space.
Vec3 normalize_gaze(const Vec3& g, const NormalizationResult& result);

/// Unit R_norm^T * g_n. Scale does not apply to directions.
Vec3 denormalize_gaze(const Vec3& g_n, const NormalizationResult& result);

}  // namespace gazeaug
