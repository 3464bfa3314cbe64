#include "gazeaug/render.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace gazeaug {

namespace {

struct ClipVertex {
  Vec3 p;
  Vec2 uv;
};

double edge(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Sutherland-Hodgman against z >= kNearPlane.
std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri) {
  std::vector<ClipVertex> out;
  out.reserve(4);
  for (std::size_t i = 0; i < 3; ++i) {
    const ClipVertex& a = tri[i];
    const ClipVertex& b = tri[(i + 1) % 3];
    const bool a_in = a.p.z() >= kNearPlane;
    const bool b_in = b.p.z() >= kNearPlane;
    if (a_in) out.push_back(a);
    if (a_in != b_in) {
      const double s = (kNearPlane - a.p.z()) / (b.p.z() - a.p.z());
      ClipVertex c{a.p + s * (b.p - a.p), a.uv + s * (b.uv - a.uv)};
      c.p.z() = kNearPlane;
      out.push_back(c);
    }
  }
  return out;
}

void fragments_clipped(const VirtualCamera& cam, const ClipVertex& v0, const ClipVertex& v1, const ClipVertex& v2,
                       const std::function<void(const Fragment&)>& emit) {
  const std::array<Vec2, 3> s{cam.project_camera_frame(v0.p), cam.project_camera_frame(v1.p),
                              cam.project_camera_frame(v2.p)};
  const double area = edge(s[0], s[1], s[2]);
  if (area == 0.0 || !std::isfinite(area)) return;
  const std::array<double, 3> inv_z{1.0 / v0.p.z(), 1.0 / v1.p.z(), 1.0 / v2.p.z()};
  const std::array<Vec2, 3> uv{v0.uv, v1.uv, v2.uv};

  const double min_x = std::min({s[0].x(), s[1].x(), s[2].x()});
  const double max_x = std::max({s[0].x(), s[1].x(), s[2].x()});
  const double min_y = std::min({s[0].y(), s[1].y(), s[2].y()});
  const double max_y = std::max({s[0].y(), s[1].y(), s[2].y()});
  // pixel i is centered at i + 0.5
  const int x0 = std::max(0, static_cast<int>(std::ceil(std::max(min_x - 0.5, -1.0))));
  const int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(std::min(max_x - 0.5, 1.0 * cam.width))));
  const int y0 = std::max(0, static_cast<int>(std::ceil(std::max(min_y - 0.5, -1.0))));
  const int y1 = std::min(cam.height - 1, static_cast<int>(std::floor(std::min(max_y - 0.5, 1.0 * cam.height))));

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2 p{x + 0.5, y + 0.5};
      const double w0 = edge(s[1], s[2], p) / area;
      const double w1 = edge(s[2], s[0], p) / area;
      const double w2 = edge(s[0], s[1], p) / area;
      if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
      const double iz = w0 * inv_z[0] + w1 * inv_z[1] + w2 * inv_z[2];
      const Vec2 t = (w0 * inv_z[0] * uv[0] + w1 * inv_z[1] * uv[1] + w2 * inv_z[2] * uv[2]) / iz;
      emit(Fragment{x, y, 1.0 / iz, t});
    }
  }
}

}  // namespace

void for_each_fragment(const VirtualCamera& cam, const std::array<Vec3, 3>& vertices, const std::array<Vec2, 3>& uvs,
                       const std::function<void(const Fragment&)>& emit) {
  const std::array<ClipVertex, 3> tri{ClipVertex{vertices[0], uvs[0]}, ClipVertex{vertices[1], uvs[1]},
                                      ClipVertex{vertices[2], uvs[2]}};
  if (vertices[0].z() >= kNearPlane && vertices[1].z() >= kNearPlane && vertices[2].z() >= kNearPlane) {
    fragments_clipped(cam, tri[0], tri[1], tri[2], emit);
    return;
  }
  const auto poly = clip_near(tri);
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) fragments_clipped(cam, poly[0], poly[i], poly[i + 1], emit);
}

void rasterize_triangle(const VirtualCamera& cam, const std::array<Vec3, 3>& vertices, const std::array<Vec2, 3>& uvs,
                        const Image& texture, Image& target, DepthBuffer& depth) {
  if (target.width != cam.width || target.height != cam.height || depth.width != cam.width ||
      depth.height != cam.height)
    throw std::invalid_argument("target and depth buffer must match the camera size");
  if (texture.empty()) throw std::invalid_argument("rasterize_triangle: empty texture");
  std::array<double, 3> color{};
  const int channels = target.channels;
  for_each_fragment(cam, vertices, uvs, [&](const Fragment& f) {
    double& zbuf = depth.at(f.x, f.y);
    if (f.depth > zbuf) return;
    sample_bilinear(texture, f.uv.x() * texture.width, f.uv.y() * texture.height,
                    std::span<double>(color.data(), static_cast<std::size_t>(texture.channels)));
    std::array<std::uint8_t, 3> px{};
    for (int c = 0; c < channels; ++c) {
      const double v = texture.channels == channels ? color[static_cast<std::size_t>(c)] : color[0];
      px[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    if (f.depth == zbuf) {
      // exact depth tie (shared edges): keep the larger value so the
      // result does not depend on submission order
      bool larger = false;
      for (int c = 0; c < channels; ++c) {
        if (px[static_cast<std::size_t>(c)] != target.at(f.x, f.y, c)) {
          larger = px[static_cast<std::size_t>(c)] > target.at(f.x, f.y, c);
          break;
        }
      }
      if (!larger) return;
    }
    zbuf = f.depth;
    for (int c = 0; c < channels; ++c) target.at(f.x, f.y, c) = px[static_cast<std::size_t>(c)];
  });
}

EyePatchImage render(const TexturedMesh& mesh, const VirtualCamera& cam, std::uint8_t background) {
  if (cam.width <= 0 || cam.height <= 0 || !(cam.focal > 0.0)) throw std::invalid_argument("invalid virtual camera");
  const int channels = mesh.texture.empty() ? 1 : mesh.texture.channels;
  EyePatchImage target(cam.width, cam.height, channels, background);
  if (mesh.triangles.empty()) return target;
  DepthBuffer depth(cam.width, cam.height);
  std::vector<Vec3> local;
  local.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) local.push_back(v - cam.origin);
  for (const auto& t : mesh.triangles) {
    rasterize_triangle(cam, {local[t[0]], local[t[1]], local[t[2]]}, {mesh.uv[t[0]], mesh.uv[t[1]], mesh.uv[t[2]]},
                       mesh.texture, target, depth);
  }
  return target;
}

}  // namespace gazeaug
