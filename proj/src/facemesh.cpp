#include "gazeaug/facemesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <stdexcept>

namespace gazeaug {

namespace {

using nlohmann::json;

void check_index_list(const std::vector<int>& indices, std::size_t count, const char* what) {
  if (indices.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  for (int i : indices)
    if (i < 0 || static_cast<std::size_t>(i) >= count)
      throw std::invalid_argument(std::string(what) + " index " + std::to_string(i) + " out of range");
}

void check_triangles(const std::vector<Triangle>& triangles, std::size_t count) {
  for (const auto& t : triangles) {
    for (int v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= count)
        throw std::invalid_argument("triangle index " + std::to_string(v) + " out of range");
  }
}

// Surface depth of the synthetic face at (x, y); the face looks toward -z.
double synthetic_depth(double x, double y) {
  const double rx = x / 90.0;
  const double ry = y / 115.0;
  const double base = -60.0 * std::sqrt(std::max(0.05, 1.0 - rx * rx - ry * ry));
  const double nose = -26.0 * std::exp(-(std::pow(x / 11.0, 2) + std::pow((y - 8.0) / 26.0, 2)));
  const double socket = 7.0 * std::exp(-(std::pow((std::abs(x) - 32.0) / 15.0, 2) + std::pow((y + 32.0) / 9.0, 2)));
  const double brow = -4.0 * std::exp(-(std::pow((std::abs(x) - 30.0) / 22.0, 2) + std::pow((y + 48.0) / 5.0, 2)));
  const double lips = -5.0 * std::exp(-(std::pow(x / 22.0, 2) + std::pow((y - 52.0) / 7.0, 2)));
  return base + nose + socket + brow + lips;
}

}  // namespace

void validate(const FaceModel& model) {
  if (model.vertices.size() < 3) throw std::invalid_argument("face model needs at least 3 vertices");
  check_triangles(model.triangles, model.vertices.size());
  check_index_list(model.left_eye_indices, model.vertices.size(), "left_eye_indices");
  check_index_list(model.right_eye_indices, model.vertices.size(), "right_eye_indices");
  const std::set<int> left(model.left_eye_indices.begin(), model.left_eye_indices.end());
  for (int i : model.right_eye_indices)
    if (left.contains(i)) throw std::invalid_argument("eye index lists overlap at " + std::to_string(i));
}

void validate(const TexturedMesh& mesh) {
  if (mesh.uv.size() != mesh.vertices.size()) throw std::invalid_argument("mesh uv count differs from vertex count");
  for (const auto& uv : mesh.uv)
    if (!(uv.x() >= 0.0 && uv.x() <= 1.0 && uv.y() >= 0.0 && uv.y() <= 1.0))
      throw std::invalid_argument("mesh uv outside [0,1]");
  check_triangles(mesh.triangles, mesh.vertices.size());
  for (const auto& t : mesh.triangles)
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw std::invalid_argument("degenerate mesh triangle");
}

FaceModel load_face_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open face model " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("face model " + path.string() + ": " + e.what());
  }
  FaceModel model;
  try {
    const auto units = doc.at("units").get<std::string>();
    if (units != "mm") throw std::runtime_error("face model units must be \"mm\", got \"" + units + "\"");
    model.name = doc.at("name").get<std::string>();
    for (const auto& v : doc.at("vertices")) {
      if (v.size() != 3) throw std::runtime_error("face model vertex must have 3 coordinates");
      model.vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    if (doc.contains("triangles")) {
      for (const auto& t : doc.at("triangles")) {
        if (t.size() != 3) throw std::runtime_error("face model triangle must have 3 indices");
        model.triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
      }
    }
    model.left_eye_indices = doc.at("left_eye_indices").get<std::vector<int>>();
    model.right_eye_indices = doc.at("right_eye_indices").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw std::runtime_error("face model " + path.string() + ": " + e.what());
  }
  try {
    validate(model);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("face model " + path.string() + ": " + e.what());
  }
  return model;
}

void save_face_model(const std::filesystem::path& path, const FaceModel& model) {
  json doc;
  doc["name"] = model.name;
  doc["units"] = "mm";
  doc["vertices"] = json::array();
  for (const auto& v : model.vertices) doc["vertices"].push_back({v.x(), v.y(), v.z()});
  if (!model.triangles.empty()) doc["triangles"] = model.triangles;
  doc["left_eye_indices"] = model.left_eye_indices;
  doc["right_eye_indices"] = model.right_eye_indices;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write face model " + path.string());
  out << doc.dump() << '\n';
}

std::size_t count_out_of_bounds(std::span<const PixelPoint> landmarks, int width, int height) {
  return static_cast<std::size_t>(std::count_if(landmarks.begin(), landmarks.end(), [&](const PixelPoint& p) {
    return !(p.x() >= 0.0 && p.x() <= width && p.y() >= 0.0 && p.y() <= height);
  }));
}

TexturedMesh build_textured_mesh(const FaceModel& model, std::span<const PixelPoint> landmarks, Image image) {
  if (landmarks.size() != model.vertices.size())
    throw std::invalid_argument("landmark count " + std::to_string(landmarks.size()) + " does not match face model (" +
                                std::to_string(model.vertices.size()) + ")");
  if (image.width <= 0 || image.height <= 0) throw std::invalid_argument("texture image is empty");
  TexturedMesh mesh;
  mesh.vertices = model.vertices;
  mesh.uv.reserve(landmarks.size());
  for (const auto& p : landmarks) {
    const double u = std::isfinite(p.x()) ? std::clamp(p.x() / image.width, 0.0, 1.0) : 0.0;
    const double v = std::isfinite(p.y()) ? std::clamp(p.y() / image.height, 0.0, 1.0) : 0.0;
    mesh.uv.emplace_back(u, v);
  }
  mesh.triangles = model.triangles.empty() ? triangulate_fallback(landmarks) : model.triangles;
  mesh.texture = std::move(image);
  return mesh;
}

Vec3 eye_center(std::span<const Vec3> vertices, const FaceModel& model, EyeSide side) {
  const auto& indices = model.eye_indices(side);
  if (indices.empty()) throw std::invalid_argument("eye index list is empty");
  Vec3 sum = Vec3::Zero();
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= vertices.size())
      throw std::invalid_argument("eye index " + std::to_string(i) + " out of range");
    sum += vertices[static_cast<std::size_t>(i)];
  }
  return sum / static_cast<double>(indices.size());
}

FaceModel synthetic_face_model() {
  constexpr int kCount = 468;
  constexpr int kEyeContour = 8;
  constexpr double kEyeX = 32.0;
  constexpr double kEyeY = -32.0;
  constexpr double kEyeHalfWidth = 14.0;
  constexpr double kEyeHalfHeight = 5.0;

  FaceModel model;
  model.name = "synthetic-face-468-v1";
  std::vector<Vec2> xy;

  // eye contours first: index 0 and 4 of each contour are the corners
  for (const double side : {1.0, -1.0}) {
    for (int k = 0; k < kEyeContour; ++k) {
      const double a = 2.0 * kPi * k / kEyeContour;
      xy.emplace_back(side * (kEyeX + kEyeHalfWidth * std::cos(a)), kEyeY + kEyeHalfHeight * std::sin(a));
    }
  }
  model.left_eye_indices = {0, 4};
  model.right_eye_indices = {kEyeContour, kEyeContour + 4};

  // sunflower fill of the face oval, keeping clear of the eye openings
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; static_cast<int>(xy.size()) < kCount; ++i) {
    const double r = std::sqrt((i + 0.5) / 480.0);
    const double x = 78.0 * r * std::cos(i * golden);
    const double y = 100.0 * r * std::sin(i * golden);
    const double ex = (std::abs(x) - kEyeX) / (kEyeHalfWidth + 4.0);
    const double ey = (y - kEyeY) / (kEyeHalfHeight + 4.0);
    if (ex * ex + ey * ey < 1.0) continue;
    xy.emplace_back(x, y);
  }

  for (std::size_t i = 0; i < xy.size(); ++i) {
    double z = synthetic_depth(xy[i].x(), xy[i].y());
    if (i < 2 * kEyeContour) z -= 1.5;  // eyelid rim sits slightly proud of the socket
    model.vertices.emplace_back(xy[i].x(), xy[i].y(), z);
  }
  model.triangles = triangulate_fallback(xy);
  return model;
}

}  // namespace gazeaug
