#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "gazeaug/render.hpp"
#include "oracles.hpp"

using namespace gazeaug;

namespace {

VirtualCamera patch_camera() { return VirtualCamera{Vec3::Zero(), 650.0, 96, 64}; }

Image solid(std::uint8_t v) { return Image(4, 4, 1, v); }

TexturedMesh single_triangle(const std::array<Vec3, 3>& v, std::uint8_t color) {
  TexturedMesh m;
  m.vertices = {v[0], v[1], v[2]};
  m.triangles = {{0, 1, 2}};
  m.uv = {{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.9}};
  m.texture = solid(color);
  return m;
}

std::set<std::pair<int, int>> lit(const Image& img, std::uint8_t background) {
  std::set<std::pair<int, int>> out;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y) != background) out.insert({x, y});
  return out;
}

}  // namespace

TEST(Render, EmptyMeshIsBackground) {
  const Image img = render(TexturedMesh{}, patch_camera(), 17);
  EXPECT_EQ(img.width, 96);
  EXPECT_EQ(img.height, 64);
  for (auto p : img.pixels) EXPECT_EQ(p, 17);
}

TEST(Render, CoverageMatchesPointInTriangle) {
  const VirtualCamera cam = patch_camera();
  const std::array<Vec3, 3> v{Vec3(-20.3, -10.1, 500), Vec3(25.7, -5.2, 520), Vec3(3.3, 21.9, 480)};
  const Image img = render(single_triangle(v, 200), cam, 0);
  std::set<std::pair<int, int>> expected;
  const Vec2 a = cam.project_camera_frame(v[0]), b = cam.project_camera_frame(v[1]), c = cam.project_camera_frame(v[2]);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x)
      if (oracle::point_in_triangle(a, b, c, Vec2(x + 0.5, y + 0.5))) expected.insert({x, y});
  EXPECT_FALSE(expected.empty());
  EXPECT_EQ(lit(img, 0), expected);
  for (const auto& [x, y] : expected) EXPECT_EQ(img.at(x, y), 200);
}

TEST(Render, NearerTriangleWins) {
  const std::array<Vec3, 3> base{Vec3(-30, -20, 1), Vec3(30, -20, 1), Vec3(0, 25, 1)};
  TexturedMesh m;
  for (double z : {550.0, 500.0})
    for (const auto& p : base) m.vertices.push_back(Vec3(p.x() * z / 500, p.y() * z / 500, z));
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  // left half of the texture is dark, right half bright; far triangle samples bright
  m.texture = Image(2, 1, 1);
  m.texture.at(0, 0) = 50;
  m.texture.at(1, 0) = 250;
  m.uv = {{0.75, 0.5}, {0.75, 0.5}, {0.75, 0.5}, {0.25, 0.5}, {0.25, 0.5}, {0.25, 0.5}};
  for (int order = 0; order < 2; ++order) {
    if (order == 1) std::swap(m.triangles[0], m.triangles[1]);
    const Image img = render(m, patch_camera(), 0);
    const auto px = lit(img, 0);
    ASSERT_FALSE(px.empty());
    for (const auto& [x, y] : px) EXPECT_EQ(img.at(x, y), 50);
  }
}

TEST(Render, SinglePixelTriangle) {
  // screen coordinates (10,20)-(11.2,20)-(10,21.2) enclose only the center (10.5, 20.5)
  const VirtualCamera cam = patch_camera();
  const double z = 650.0;
  auto back = [&](double u, double v) { return Vec3((u - 48.0) * z / cam.focal, (v - 32.0) * z / cam.focal, z); };
  const Image img = render(single_triangle({back(10, 20), back(11.2, 20), back(10, 21.2)}, 99), cam, 0);
  const auto px = lit(img, 0);
  ASSERT_EQ(px.size(), 1u);
  EXPECT_EQ(*px.begin(), std::make_pair(10, 20));
}

TEST(Render, BehindCameraWritesNothing) {
  const Image img = render(single_triangle({Vec3(-10, -10, -50), Vec3(10, -10, -50), Vec3(0, 10, -60)}, 99),
                           patch_camera(), 0);
  EXPECT_TRUE(lit(img, 0).empty());
}

TEST(Render, CrossingNearPlaneIsClipped) {
  const VirtualCamera cam = patch_camera();
  const std::array<Vec3, 3> v{Vec3(-5, 0, -100), Vec3(5, 0, 300), Vec3(0, 5, 300)};
  std::set<std::pair<int, int>> seen;
  for_each_fragment(cam, v, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, [&](const Fragment& f) {
    EXPECT_GE(f.depth, kNearPlane - 1e-9);
    seen.insert({f.x, f.y});
  });
  EXPECT_FALSE(seen.empty());
}

TEST(Render, PerspectiveCorrectUvMatchesRayCast) {
  const VirtualCamera cam = patch_camera();
  // strongly slanted triangle
  const std::array<Vec3, 3> v{Vec3(-40, -25, 300), Vec3(40, -20, 900), Vec3(0, 30, 450)};
  const std::array<Vec2, 3> uv{Vec2(0, 0), Vec2(1, 0), Vec2(0.3, 1)};
  double max_persp = 0.0, max_affine = 0.0;
  const Vec2 s0 = cam.project_camera_frame(v[0]), s1 = cam.project_camera_frame(v[1]),
             s2 = cam.project_camera_frame(v[2]);
  int count = 0;
  for_each_fragment(cam, v, uv, [&](const Fragment& f) {
    const Vec3 dir((f.x + 0.5 - 48.0) / cam.focal, (f.y + 0.5 - 32.0) / cam.focal, 1.0);
    const auto hit = oracle::ray_triangle(Vec3::Zero(), dir, v[0], v[1], v[2]);
    if (!hit) return;  // edge pixel lost to the oracle's own tolerance
    const Vec2 truth = (1 - hit->b1 - hit->b2) * uv[0] + hit->b1 * uv[1] + hit->b2 * uv[2];
    max_persp = std::max(max_persp, (f.uv - truth).norm());
    EXPECT_NEAR(f.depth, hit->t, 1e-9 * hit->t);
    // screen-space (affine) interpolation for comparison
    const Vec2 p(f.x + 0.5, f.y + 0.5);
    const double area = (s1 - s0).x() * (s2 - s0).y() - (s1 - s0).y() * (s2 - s0).x();
    const double b1 = ((p - s0).x() * (s2 - s0).y() - (p - s0).y() * (s2 - s0).x()) / area;
    const double b2 = ((s1 - s0).x() * (p - s0).y() - (s1 - s0).y() * (p - s0).x()) / area;
    max_affine = std::max(max_affine, ((1 - b1 - b2) * uv[0] + b1 * uv[1] + b2 * uv[2] - truth).norm());
    ++count;
  });
  EXPECT_GT(count, 100);
  EXPECT_LT(max_persp, 1e-3);
  EXPECT_GT(max_affine, 1e-2);
}

TEST(Render, TriangleOrderDoesNotMatter) {
  TexturedMesh m;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> xy(-40, 40), z(400, 700);
  for (int i = 0; i < 60; ++i) m.vertices.emplace_back(xy(rng), xy(rng), z(rng));
  for (int i = 0; i + 2 < 60; i += 3) m.triangles.push_back({i, i + 1, i + 2});
  m.triangles.push_back({0, 4, 8});
  m.triangles.push_back({4, 8, 0});  // identical geometry, tie on every pixel
  for (std::size_t i = 0; i < m.vertices.size(); ++i) m.uv.emplace_back((i % 7) / 7.0, (i % 5) / 5.0);
  m.texture = Image(8, 8, 3);
  for (std::size_t i = 0; i < m.texture.pixels.size(); ++i) m.texture.pixels[i] = static_cast<std::uint8_t>(i * 37);
  const Image ref = render(m, patch_camera(), 0);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(m.triangles.begin(), m.triangles.end(), rng);
    EXPECT_EQ(render(m, patch_camera(), 0), ref);
  }
}

TEST(Render, MovingCameraEqualsMovingMesh) {
  // dyadic offsets keep the subtraction exact
  TexturedMesh m = single_triangle({Vec3(-20.5, -10.25, 500), Vec3(25.75, -5.5, 520), Vec3(3.25, 21.5, 480)}, 0);
  m.texture = Image(2, 2, 1);
  m.texture.pixels = {10, 80, 160, 240};
  const Vec3 shift(4.5, -2.25, 16.0);
  VirtualCamera moved = patch_camera();
  moved.origin = shift;
  TexturedMesh translated = m;
  for (auto& v : translated.vertices) v -= shift;
  EXPECT_EQ(render(m, moved, 3), render(translated, patch_camera(), 3));
}

TEST(Render, RgbTextureGivesRgbOutput) {
  TexturedMesh m = single_triangle({Vec3(-20, -10, 500), Vec3(25, -5, 520), Vec3(3, 21, 480)}, 0);
  m.texture = Image(2, 2, 3, 0);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) m.texture.at(x, y, 1) = 123;
  const Image img = render(m, patch_camera(), 0);
  EXPECT_EQ(img.channels, 3);
  EXPECT_EQ(img.at(48, 32, 1), 123);
  EXPECT_EQ(img.at(48, 32, 0), 0);
}
