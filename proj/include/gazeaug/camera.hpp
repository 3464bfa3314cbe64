#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gazeaug/geometry.hpp"

namespace gazeaug {

/// Image-plane location in pixels. Pixel (i, j) has its center at
/// (i + 0.5, j + 0.5).
using PixelPoint = Vec2;

/// Radial (k1, k2, k3) and tangential (p1, p2) polynomial lens distortion.
struct Distortion {
  double k1 = 0.0;
  double k2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double k3 = 0.0;

  bool is_zero() const { return k1 == 0.0 && k2 == 0.0 && p1 == 0.0 && p2 == 0.0 && k3 == 0.0; }

  /// Builds from 0-5 coefficients in (k1, k2, p1, p2, k3) order; missing
  /// entries are zero.
  static Distortion from_coefficients(std::span<const double> coeffs);
  std::vector<double> coefficients() const { return {k1, k2, p1, p2, k3}; }
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  Distortion dist;

  Mat3 matrix() const;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Throws std::invalid_argument when focal lengths are not positive or the
/// principal point is absurdly far outside a known image.
void validate(const CameraIntrinsics& intrinsics, std::optional<ImageSize> image = std::nullopt);

/// Applies the distortion polynomial to a normalized image coordinate.
Vec2 distort_normalized(const Distortion& dist, const Vec2& xy);

/// Pinhole projection with distortion. Throws std::domain_error when
/// point.z() <= 0.
PixelPoint project(const CameraIntrinsics& intrinsics, const Vec3& point);

struct UndistortedPoint {
  PixelPoint point;
  bool converged = true;
};

/// Removes lens distortion by fixed-point iteration (at most 20 steps, stop
/// once the normalized-coordinate step is below 1e-9). The result is the
/// ideal pinhole pixel location under the same fx, fy, cx, cy.
std::vector<UndistortedPoint> undistort_points(const CameraIntrinsics& intrinsics,
                                               std::span<const PixelPoint> points);

}  // namespace gazeaug
