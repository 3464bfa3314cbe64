#include "gazeaug/camera.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gazeaug {

namespace {

constexpr int kMaxUndistortIterations = 20;
constexpr double kUndistortStep = 1e-9;

}  // namespace

Distortion Distortion::from_coefficients(std::span<const double> coeffs) {
  if (coeffs.size() > 5) throw std::invalid_argument("at most 5 distortion coefficients are supported");
  double c[5] = {0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < coeffs.size(); ++i) c[i] = coeffs[i];
  return {c[0], c[1], c[2], c[3], c[4]};
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0, cx,
       0, fy, cy,
       0, 0, 1;
  return k;
}

void validate(const CameraIntrinsics& intrinsics, std::optional<ImageSize> image) {
  if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0))
    throw std::invalid_argument("camera focal lengths must be positive");
  if (!std::isfinite(intrinsics.cx) || !std::isfinite(intrinsics.cy))
    throw std::invalid_argument("camera principal point must be finite");
  if (image) {
    const double bx = 10.0 * image->width;
    const double by = 10.0 * image->height;
    if (std::abs(intrinsics.cx) > bx || std::abs(intrinsics.cy) > by)
      throw std::invalid_argument("camera principal point outside sanity bound for image size " +
                                  std::to_string(image->width) + "x" + std::to_string(image->height));
  }
}

Vec2 distort_normalized(const Distortion& d, const Vec2& xy) {
  const double x = xy.x();
  const double y = xy.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (d.k1 + r2 * (d.k2 + r2 * d.k3));
  return {x * radial + 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x),
          y * radial + d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y};
}

PixelPoint project(const CameraIntrinsics& intrinsics, const Vec3& point) {
  if (!(point.z() > 0.0)) throw std::domain_error("project: point is behind the camera");
  const Vec2 n{point.x() / point.z(), point.y() / point.z()};
  const Vec2 d = intrinsics.dist.is_zero() ? n : distort_normalized(intrinsics.dist, n);
  return {intrinsics.fx * d.x() + intrinsics.cx, intrinsics.fy * d.y() + intrinsics.cy};
}

std::vector<UndistortedPoint> undistort_points(const CameraIntrinsics& intrinsics,
                                               std::span<const PixelPoint> points) {
  std::vector<UndistortedPoint> out;
  out.reserve(points.size());
  const Distortion& d = intrinsics.dist;
  for (const auto& px : points) {
    if (d.is_zero()) {
      out.push_back({px, true});
      continue;
    }
    const double xd = (px.x() - intrinsics.cx) / intrinsics.fx;
    const double yd = (px.y() - intrinsics.cy) / intrinsics.fy;
    double x = xd;
    double y = yd;
    bool converged = false;
    for (int it = 0; it < kMaxUndistortIterations; ++it) {
      const double r2 = x * x + y * y;
      const double radial = 1.0 + r2 * (d.k1 + r2 * (d.k2 + r2 * d.k3));
      const double dx = 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x);
      const double dy = d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y;
      const double nx = (xd - dx) / radial;
      const double ny = (yd - dy) / radial;
      const double step = std::hypot(nx - x, ny - y);
      x = nx;
      y = ny;
      if (step < kUndistortStep) {
        converged = true;
        break;
      }
    }
    out.push_back({{intrinsics.fx * x + intrinsics.cx, intrinsics.fy * y + intrinsics.cy}, converged});
  }
  return out;
}

}  // namespace gazeaug
