#include "gazeaug/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gazeaug/render.hpp"

namespace gazeaug {

namespace {

constexpr double kHalfWidth = 90.0;
constexpr double kHalfHeight = 115.0;

double blob(double x, double y, double cx, double cy, double rx, double ry) {
  const double dx = (x - cx) / rx;
  const double dy = (y - cy) / ry;
  return std::exp(-(dx * dx + dy * dy));
}

}  // namespace

Vec2 synthetic_uv(const Vec3& p) {
  return {std::clamp((p.x() + kHalfWidth) / (2.0 * kHalfWidth), 0.0, 1.0),
          std::clamp((p.y() + kHalfHeight) / (2.0 * kHalfHeight), 0.0, 1.0)};
}

Image synthetic_face_texture(int size) {
  Image tex(size, size, 3);
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      // texel center back to canonical millimetres
      const double x = ((i + 0.5) / size) * 2.0 * kHalfWidth - kHalfWidth;
      const double y = ((j + 0.5) / size) * 2.0 * kHalfHeight - kHalfHeight;
      double r = 205.0, g = 165.0, b = 145.0;
      const double shade = 12.0 * std::sin(x * 0.21) * std::cos(y * 0.17) + ((((i / 16) + (j / 16)) % 2) ? 6.0 : -6.0);
      r += shade;
      g += shade;
      b += shade;
      for (const double side : {1.0, -1.0}) {
        const double ex = side * 32.0;
        const double sclera = blob(x, y, ex, -32.0, 12.0, 4.5);
        const double iris = blob(x, y, ex, -32.0, 5.0, 5.0);
        const double pupil = blob(x, y, ex, -32.0, 2.0, 2.0);
        const double brow = blob(x, y, side * 30.0, -46.0, 16.0, 3.0);
        r = r * (1 - sclera) + 245 * sclera;
        g = g * (1 - sclera) + 245 * sclera;
        b = b * (1 - sclera) + 240 * sclera;
        r = r * (1 - iris) + 70 * iris;
        g = g * (1 - iris) + 110 * iris;
        b = b * (1 - iris) + 60 * iris;
        r *= 1 - 0.9 * pupil;
        g *= 1 - 0.9 * pupil;
        b *= 1 - 0.9 * pupil;
        r *= 1 - 0.6 * brow;
        g *= 1 - 0.65 * brow;
        b *= 1 - 0.65 * brow;
        const double nostril = blob(x, y, side * 7.0, 24.0, 3.0, 2.0);
        r *= 1 - 0.5 * nostril;
        g *= 1 - 0.5 * nostril;
        b *= 1 - 0.5 * nostril;
      }
      const double lips = blob(x, y, 0.0, 52.0, 20.0, 5.0);
      r = r * (1 - lips) + 170 * lips;
      g = g * (1 - lips) + 70 * lips;
      b = b * (1 - lips) + 80 * lips;
      tex.at(i, j, 0) = static_cast<std::uint8_t>(std::clamp(std::lround(r), 0L, 255L));
      tex.at(i, j, 1) = static_cast<std::uint8_t>(std::clamp(std::lround(g), 0L, 255L));
      tex.at(i, j, 2) = static_cast<std::uint8_t>(std::clamp(std::lround(b), 0L, 255L));
    }
  }
  return tex;
}

SyntheticSample make_synthetic_sample(const FaceModel& model, const Image& texture, const SynthOptions& options,
                                      std::size_t index, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> depth(options.min_distance, options.max_distance);

  SyntheticSample out;
  const AnglePair angles{options.max_yaw * unit(rng), options.max_pitch * unit(rng)};
  const double roll = deg2rad(options.max_roll * unit(rng));
  out.pose.rotation = rotation_from_yaw_pitch(angles) * rotation_from_axis_angle(Vec3(0, 0, roll));
  const double tz = depth(rng);
  out.pose.translation = Vec3(30.0 * unit(rng), 20.0 * unit(rng), tz);

  TexturedMesh mesh;
  mesh.vertices = apply_to_points(out.pose, model.vertices);
  mesh.triangles = model.triangles.empty() ? triangulate_fallback([&] {
    std::vector<Vec2> xy;
    for (const auto& v : model.vertices) xy.emplace_back(v.x(), v.y());
    return xy;
  }()) : model.triangles;
  for (const auto& v : model.vertices) mesh.uv.push_back(synthetic_uv(v));
  mesh.texture = texture;

  const VirtualCamera camera{Vec3::Zero(), options.focal, options.width, options.height};
  Image rendered = render(mesh, camera, 90);

  SampleRecord& r = out.record;
  r.sample_id = "synth" + std::to_string(index);
  r.image_path = "images/" + r.sample_id + ".png";
  r.intrinsics.fx = options.focal;
  r.intrinsics.fy = options.focal;
  r.intrinsics.cx = 0.5 * options.width;
  r.intrinsics.cy = 0.5 * options.height;
  for (const auto& v : mesh.vertices) r.landmarks.push_back(camera.project_camera_frame(v));
  const Vec3 mid = 0.5 * (eye_center(mesh.vertices, model, EyeSide::left) + eye_center(mesh.vertices, model, EyeSide::right));
  r.gaze_origin = mid;
  r.gaze_target = Vec3(250.0 * unit(rng), 150.0 * unit(rng), 0.0);
  r.user_id = "synthetic" + std::to_string(index % 3);
  out.image = std::move(rendered);
  return out;
}

std::filesystem::path write_synthetic_dataset(const FaceModel& model, const SynthOptions& options,
                                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "images");
  const Image texture = synthetic_face_texture();
  std::mt19937_64 rng(options.seed);
  const auto manifest = out_dir / "manifest.jsonl";
  std::ofstream out(manifest);
  if (!out) throw std::runtime_error("cannot write " + manifest.string());
  for (std::size_t i = 0; i < options.count; ++i) {
    const SyntheticSample s = make_synthetic_sample(model, texture, options, i, rng);
    save_png(out_dir / s.record.image_path, s.image);
    out << to_json_line(s.record) << '\n';
  }
  return manifest;
}

}  // namespace gazeaug
