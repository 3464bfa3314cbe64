#include "gazeaug/normalize.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace gazeaug {

NormalizationResult compute_normalization(const RotationMatrix3& head_rotation, const Vec3& eye_center_cam,
                                          const CameraIntrinsics& intrinsics, const AugmentationParams& params) {
  if (!(eye_center_cam.z() > 0.0)) throw std::domain_error("normalization: eye is behind the camera");
  validate(intrinsics);
  validate(params);

  const double distance = eye_center_cam.norm();
  const Vec3 forward = eye_center_cam / distance;
  const Vec3 lateral = head_rotation.col(0);
  Vec3 right = lateral - lateral.dot(forward) * forward;
  const double right_norm = right.norm();
  if (right_norm < 1e-12) throw std::invalid_argument("normalization: head lateral axis is parallel to the eye ray");
  right /= right_norm;
  const Vec3 down = forward.cross(right);

  NormalizationResult out;
  out.rotation.row(0) = right.transpose();
  out.rotation.row(1) = down.transpose();
  out.rotation.row(2) = forward.transpose();
  out.scale = params.d_n / distance;
  out.width = params.patch_width;
  out.height = params.patch_height;

  Mat3 normalized_camera;
  normalized_camera << params.f_n, 0, 0.5 * params.patch_width,
                       0, params.f_n, 0.5 * params.patch_height,
                       0, 0, 1;
  const Mat3 scale = Eigen::Vector3d(1.0, 1.0, out.scale).asDiagonal();
  out.warp = normalized_camera * scale * out.rotation * intrinsics.matrix().inverse();
  return out;
}

EyePatchImage normalize_image(const Image& frame, const NormalizationResult& result, std::uint8_t background) {
  if (result.width <= 0 || result.height <= 0) throw std::invalid_argument("normalization result has no patch size");
  const Eigen::FullPivLU<Mat3> lu(result.warp);
  if (!lu.isInvertible()) throw std::invalid_argument("normalization warp is singular");
  const Mat3 inv = lu.inverse();
  EyePatchImage patch(result.width, result.height, frame.channels, background);
  std::array<double, 3> value{};
  for (int y = 0; y < result.height; ++y) {
    for (int x = 0; x < result.width; ++x) {
      const Vec3 src = inv * Vec3(x + 0.5, y + 0.5, 1.0);
      if (!(src.z() > 0.0)) continue;
      sample_bilinear(frame, src.x() / src.z(), src.y() / src.z(),
                      std::span<double>(value.data(), static_cast<std::size_t>(frame.channels)),
                      BorderMode::constant, background);
      for (int c = 0; c < frame.channels; ++c)
        patch.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value[static_cast<std::size_t>(c)]), 0L, 255L));
    }
  }
  return patch;
}

Vec3 normalize_gaze(const Vec3& g, const NormalizationResult& result) {
  return apply_to_direction(result.rotation, g).normalized();
}

Vec3 denormalize_gaze(const Vec3& g_n, const NormalizationResult& result) {
  return apply_to_direction(result.rotation.transpose(), g_n).normalized();
}

}  // namespace gazeaug
