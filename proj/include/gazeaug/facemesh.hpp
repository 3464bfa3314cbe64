#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gazeaug/camera.hpp"
#include "gazeaug/geometry.hpp"
#include "gazeaug/image.hpp"

namespace gazeaug {

using Triangle = std::array<int, 3>;

enum class EyeSide { left, right };

/// Canonical 3D landmark model in its centered, forward-facing pose. The
/// face looks toward -z; x points to the subject's left, y points down.
struct FaceModel {
  std::string name;
  std::vector<Vec3> vertices;  // mm
  std::vector<Triangle> triangles;
  std::vector<int> left_eye_indices;
  std::vector<int> right_eye_indices;

  const std::vector<int>& eye_indices(EyeSide side) const {
    return side == EyeSide::left ? left_eye_indices : right_eye_indices;
  }
};

struct TexturedMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec2> uv;  // per vertex, [0,1]^2
  Image texture;
};

/// Throws std::invalid_argument on out-of-range triangle indices, empty or
/// overlapping eye index lists.
void validate(const FaceModel& model);

/// Throws std::invalid_argument when uv and vertex counts differ, a uv lies
/// outside [0,1]^2, or a triangle is out of range or repeats an index.
void validate(const TexturedMesh& mesh);

/// JSON document with fields name, units ("mm"), vertices, triangles
/// (optional), left_eye_indices, right_eye_indices.
FaceModel load_face_model(const std::filesystem::path& path);
void save_face_model(const std::filesystem::path& path, const FaceModel& model);

/// Number of landmarks outside [0,width] x [0,height].
std::size_t count_out_of_bounds(std::span<const PixelPoint> landmarks, int width, int height);

/// Vertices are the canonical model points, texture is `image`, uv are the
/// landmarks divided by the image size (clamped to the border). Triangles
/// come from the model, or from triangulate_fallback() on the landmarks when
/// the model has none.
TexturedMesh build_textured_mesh(const FaceModel& model, std::span<const PixelPoint> landmarks, Image image);

/// 2D Delaunay triangulation covering the convex hull of `points`.
/// Triangles are counter-clockwise in (x, y). Exact duplicate points are
/// left unreferenced. Throws std::invalid_argument when fewer than 3 points
/// are given or all points are collinear.
std::vector<Triangle> triangulate_fallback(std::span<const PixelPoint> points);

/// Mean of the eye landmarks of `side`.
Vec3 eye_center(std::span<const Vec3> vertices, const FaceModel& model, EyeSide side);

/// Built-in 468-landmark model: a smooth face-like height field with
/// explicit eye contours. Deterministic; used for synthetic data and tests.
FaceModel synthetic_face_model();

}  // namespace gazeaug
