#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>

#include "gazeaug/dataset.hpp"
#include "gazeaug/facemesh.hpp"
#include "gazeaug/image.hpp"

namespace gazeaug {

/// Parameters for rendering synthetic dataset samples from a face model.
struct SynthOptions {
  std::size_t count = 10;
  std::uint64_t seed = 7;
  int width = 640;
  int height = 480;
  double focal = 600.0;
  double max_yaw = 15.0;
  double max_pitch = 15.0;
  double max_roll = 5.0;
  double min_distance = 500.0;
  double max_distance = 650.0;
};

struct SyntheticSample {
  SampleRecord record;
  Image image;
  RigidTransform pose;  // ground-truth model -> camera
};

/// Procedural RGB face texture addressed by synthetic_uv().
Image synthetic_face_texture(int size = 512);

/// Texture coordinate of a canonical model point.
Vec2 synthetic_uv(const Vec3& model_point);

/// Renders one sample: random pose, landmarks from exact projection, gaze
/// from the mid-eye point towards a random target near the camera plane.
SyntheticSample make_synthetic_sample(const FaceModel& model, const Image& texture, const SynthOptions& options,
                                      std::size_t index, std::mt19937_64& rng);

/// Writes images/<id>.png and manifest.jsonl under `out_dir`; returns the
/// manifest path.
std::filesystem::path write_synthetic_dataset(const FaceModel& model, const SynthOptions& options,
                                              const std::filesystem::path& out_dir);

}  // namespace gazeaug
