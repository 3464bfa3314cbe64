#include "gazeaug/dataset.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

namespace gazeaug {

namespace {

using nlohmann::json;

Vec3 vec3_from(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument(std::string(field) + " must be an array of 3 numbers");
  Vec3 v(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!v.allFinite()) throw std::invalid_argument(std::string(field) + " must be finite");
  return v;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json parse_object(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  return j;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

const char* channel_name(ChannelMode mode) { return mode == ChannelMode::gray ? "gray" : "rgb"; }

}  // namespace

Vec3 SampleRecord::gaze() const {
  if (gaze_direction) return normalized_direction(*gaze_direction);
  if (gaze_target && gaze_origin) return normalized_direction(*gaze_target - *gaze_origin);
  throw std::logic_error("sample " + sample_id + " has no gaze annotation");
}

SampleRecord parse_sample_line(std::string_view line) {
  const json j = parse_object(line);
  SampleRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    if (r.sample_id.empty()) throw std::invalid_argument("sample_id is empty");
    if (r.sample_id.find_first_of("/\\") != std::string::npos)
      throw std::invalid_argument("sample_id must not contain path separators");
    r.image_path = j.at("image_path").get<std::string>();

    const auto& lms = j.at("landmarks");
    if (!lms.is_array() || lms.empty()) throw std::invalid_argument("landmarks must be a non-empty array");
    r.landmarks.reserve(lms.size());
    for (const auto& p : lms) {
      if (!p.is_array() || p.size() != 2) throw std::invalid_argument("each landmark must be [u, v]");
      const PixelPoint px(p[0].get<double>(), p[1].get<double>());
      if (!px.allFinite()) throw std::invalid_argument("landmark coordinates must be finite");
      r.landmarks.push_back(px);
    }

    const auto& in = j.at("intrinsics");
    r.intrinsics.fx = in.at("fx").get<double>();
    r.intrinsics.fy = in.at("fy").get<double>();
    r.intrinsics.cx = in.at("cx").get<double>();
    r.intrinsics.cy = in.at("cy").get<double>();
    if (in.contains("dist")) {
      const auto coeffs = in.at("dist").get<std::vector<double>>();
      r.intrinsics.dist = Distortion::from_coefficients(coeffs);
    }
    validate(r.intrinsics);

    if (j.contains("gaze_origin")) r.gaze_origin = vec3_from(j.at("gaze_origin"), "gaze_origin");
    if (j.contains("gaze_target")) r.gaze_target = vec3_from(j.at("gaze_target"), "gaze_target");
    if (j.contains("gaze_direction")) r.gaze_direction = vec3_from(j.at("gaze_direction"), "gaze_direction");
    if (j.contains("user_id")) r.user_id = j.at("user_id").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(e.what());
  }

  if (r.gaze_target && r.gaze_direction)
    throw std::invalid_argument("ambiguous gaze: both gaze_target and gaze_direction present");
  if (!r.gaze_target && !r.gaze_direction) throw std::invalid_argument("missing gaze_target or gaze_direction");
  if (r.gaze_target && !r.gaze_origin) throw std::invalid_argument("gaze_target requires gaze_origin");
  if (r.gaze_direction && r.gaze_direction->squaredNorm() == 0.0)
    throw std::invalid_argument("gaze_direction is a zero vector");
  if (r.gaze_target && (*r.gaze_target - *r.gaze_origin).squaredNorm() == 0.0)
    throw std::invalid_argument("gaze_target coincides with gaze_origin");
  return r;
}

std::string to_json_line(const SampleRecord& r) {
  json j;
  j["sample_id"] = r.sample_id;
  j["image_path"] = r.image_path;
  j["landmarks"] = json::array();
  for (const auto& p : r.landmarks) j["landmarks"].push_back({p.x(), p.y()});
  j["intrinsics"] = {{"fx", r.intrinsics.fx}, {"fy", r.intrinsics.fy}, {"cx", r.intrinsics.cx}, {"cy", r.intrinsics.cy},
                     {"dist", r.intrinsics.dist.coefficients()}};
  if (r.gaze_origin) j["gaze_origin"] = vec3_json(*r.gaze_origin);
  if (r.gaze_target) j["gaze_target"] = vec3_json(*r.gaze_target);
  if (r.gaze_direction) j["gaze_direction"] = vec3_json(*r.gaze_direction);
  if (r.user_id) j["user_id"] = *r.user_id;
  return j.dump();
}

IngestResult ingest_manifest(const std::filesystem::path& path, std::optional<std::size_t> expected_landmarks) {
  std::ifstream in(path);
  if (!in) throw RunFailure("cannot open manifest " + path.string());
  IngestResult result;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      SampleRecord r = parse_sample_line(line);
      if (expected_landmarks && r.landmarks.size() != *expected_landmarks)
        throw std::invalid_argument("expected " + std::to_string(*expected_landmarks) + " landmarks, got " +
                                    std::to_string(r.landmarks.size()));
      if (!ids.insert(r.sample_id).second) throw std::invalid_argument("duplicate sample_id " + r.sample_id);
      result.records.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      result.errors.push_back({number, e.what()});
    }
  }
  if (result.records.empty()) throw RunFailure("no valid records in " + path.string());
  return result;
}

AugmentedRecord parse_augmented_line(std::string_view line) {
  const json j = parse_object(line);
  AugmentedRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.copy_index = j.at("copy_index").get<int>();
    r.left_patch_path = j.at("left_patch_path").get<std::string>();
    r.right_patch_path = j.at("right_patch_path").get<std::string>();
    const auto& yp = j.at("head_pose_yaw_pitch");
    r.head_pose_yaw_pitch = {yp.at(0).get<double>(), yp.at(1).get<double>()};
    const auto& m = j.at("head_pose_matrix");
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) r.head_pose_matrix(row, col) = m.at(row).at(col).get<double>();
    r.gaze = vec3_from(j.at("gaze"), "gaze");
    r.params_ref = j.at("params_ref").get<std::string>();
    r.landmarks_clamped = j.value("landmarks_clamped", false);
  } catch (const json::exception& e) {
    throw std::invalid_argument(e.what());
  }
  return r;
}

std::string to_json_line(const AugmentedRecord& r) {
  json j;
  j["sample_id"] = r.sample_id;
  j["copy_index"] = r.copy_index;
  j["left_patch_path"] = r.left_patch_path;
  j["right_patch_path"] = r.right_patch_path;
  j["head_pose_yaw_pitch"] = {r.head_pose_yaw_pitch.yaw, r.head_pose_yaw_pitch.pitch};
  j["head_pose_matrix"] = json::array();
  for (int row = 0; row < 3; ++row)
    j["head_pose_matrix"].push_back({r.head_pose_matrix(row, 0), r.head_pose_matrix(row, 1), r.head_pose_matrix(row, 2)});
  j["gaze"] = vec3_json(r.gaze);
  j["params_ref"] = r.params_ref;
  j["landmarks_clamped"] = r.landmarks_clamped;
  return j.dump();
}

AugmentationParams RunMetadata::params() const {
  AugmentationParams p;
  p.d_n = d_n;
  p.f_n = f_n;
  p.patch_width = patch_width;
  p.patch_height = patch_height;
  p.seed = seed;
  p.distribution = distribution;
  return p;
}

std::string to_json(const RunMetadata& m) {
  json j;
  j["d_n"] = m.d_n;
  j["f_n"] = m.f_n;
  j["patch_width"] = m.patch_width;
  j["patch_height"] = m.patch_height;
  j["distribution"] = {{"mean_yaw", m.distribution.mean_yaw},
                       {"mean_pitch", m.distribution.mean_pitch},
                       {"var_yaw", m.distribution.var_yaw},
                       {"var_pitch", m.distribution.var_pitch}};
  j["seed"] = m.seed;
  j["copies"] = m.copies;
  j["channels"] = channel_name(m.channels);
  j["background"] = m.background;
  j["face_model_checksum"] = m.face_model_checksum;
  j["tool_version"] = m.tool_version;
  return j.dump(2);
}

RunMetadata parse_run_metadata(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed metadata: ") + e.what());
  }
  RunMetadata m;
  try {
    m.d_n = j.at("d_n").get<double>();
    m.f_n = j.at("f_n").get<double>();
    m.patch_width = j.at("patch_width").get<int>();
    m.patch_height = j.at("patch_height").get<int>();
    const auto& d = j.at("distribution");
    m.distribution = {d.at("mean_yaw").get<double>(), d.at("mean_pitch").get<double>(), d.at("var_yaw").get<double>(),
                      d.at("var_pitch").get<double>()};
    m.seed = j.at("seed").get<std::uint64_t>();
    m.copies = j.at("copies").get<int>();
    const auto channels = j.at("channels").get<std::string>();
    if (channels != "gray" && channels != "rgb") throw std::invalid_argument("unknown channels " + channels);
    m.channels = channels == "gray" ? ChannelMode::gray : ChannelMode::rgb;
    m.background = j.at("background").get<int>();
    m.face_model_checksum = j.at("face_model_checksum").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("metadata: ") + e.what());
  }
  return m;
}

std::string checksum(const RunMetadata& meta) { return fnv1a_hex(to_json(meta)); }

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a_hex(buffer.str());
}

std::vector<AugmentedRecord> read_augmented_records(const std::filesystem::path& path, std::size_t* skipped_lines) {
  std::vector<AugmentedRecord> out;
  std::size_t skipped = 0;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_augmented_line(line));
    } catch (const std::invalid_argument&) {
      ++skipped;
    }
  }
  if (skipped_lines) *skipped_lines = skipped;
  return out;
}

}  // namespace gazeaug
