#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "gazeaug/facemesh.hpp"
#include "gazeaug/geometry.hpp"
#include "gazeaug/image.hpp"

namespace gazeaug {

/// Axis-aligned pinhole camera looking along +z, principal point at the
/// image center.
struct VirtualCamera {
  Vec3 origin = Vec3::Zero();  // mm
  double focal = 0.0;          // px
  int width = 0;
  int height = 0;

  Vec2 principal_point() const { return {0.5 * width, 0.5 * height}; }
  /// Projects a point given in the camera frame (relative to origin).
  Vec2 project_camera_frame(const Vec3& p) const {
    return {focal * p.x() / p.z() + 0.5 * width, focal * p.y() / p.z() + 0.5 * height};
  }
};

struct DepthBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  DepthBuffer(int w, int h)
      : width(w), height(h),
        depth(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), std::numeric_limits<double>::infinity()) {}
  double& at(int x, int y) { return depth[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
  double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
};

/// Near clipping plane distance in mm.
inline constexpr double kNearPlane = 1.0;

/// Rasterizes one textured triangle whose vertices are already in the
/// camera frame. A pixel is written when its center lies inside the closed
/// projected triangle and its interpolated depth is nearer than the buffer.
/// Texture coordinates use perspective-correct interpolation and bilinear,
/// clamp-to-edge sampling. Parts in front of the near plane are clipped.
struct Fragment {
  int x = 0;
  int y = 0;
  double depth = 0.0;  // camera-frame z
  Vec2 uv;             // perspective-correct
};

/// Enumerates the pixels whose centers lie in the closed projected triangle
/// (after near-plane clipping), without depth testing.
void for_each_fragment(const VirtualCamera& cam, const std::array<Vec3, 3>& vertices, const std::array<Vec2, 3>& uvs,
                       const std::function<void(const Fragment&)>& emit);

void rasterize_triangle(const VirtualCamera& cam, const std::array<Vec3, 3>& vertices,
                        const std::array<Vec2, 3>& uvs, const Image& texture, Image& target, DepthBuffer& depth);

/// Renders the mesh through `cam` (no lighting, no culling). Uncovered
/// pixels keep `background`. Output channels follow the texture.
EyePatchImage render(const TexturedMesh& mesh, const VirtualCamera& cam, std::uint8_t background = 0);

}  // namespace gazeaug
