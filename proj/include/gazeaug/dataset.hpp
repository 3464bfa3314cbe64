#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gazeaug/augment.hpp"
#include "gazeaug/camera.hpp"
#include "gazeaug/geometry.hpp"
#include "gazeaug/image.hpp"

namespace gazeaug {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// A run could not produce any output (bad inputs, too many failures).
class RunFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One input sample. Exactly one of gaze_target / gaze_direction is set;
/// gaze_target requires gaze_origin.
struct SampleRecord {
  std::string sample_id;
  std::string image_path;  // as written in the manifest
  std::vector<PixelPoint> landmarks;
  CameraIntrinsics intrinsics;
  std::optional<Vec3> gaze_origin;
  std::optional<Vec3> gaze_target;
  std::optional<Vec3> gaze_direction;
  std::optional<std::string> user_id;

  /// Unit gaze direction in the camera frame.
  Vec3 gaze() const;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct IngestResult {
  std::vector<SampleRecord> records;
  std::vector<LineError> errors;
};

/// Parses one manifest line. Throws std::invalid_argument with the reason.
SampleRecord parse_sample_line(std::string_view line);
std::string to_json_line(const SampleRecord& record);

/// Reads a line-delimited manifest. Blank lines are ignored; malformed lines,
/// repeated sample_ids and (when given) landmark-count mismatches go to
/// `errors`. Throws RunFailure("no valid records") when nothing parses.
IngestResult ingest_manifest(const std::filesystem::path& path,
                             std::optional<std::size_t> expected_landmarks = std::nullopt);

struct AugmentedRecord {
  std::string sample_id;
  int copy_index = 0;
  std::string left_patch_path;   // relative to the output directory
  std::string right_patch_path;
  AnglePair head_pose_yaw_pitch;
  RotationMatrix3 head_pose_matrix = RotationMatrix3::Identity();
  Vec3 gaze = Vec3::UnitZ();
  std::string params_ref;
  bool landmarks_clamped = false;
};

AugmentedRecord parse_augmented_line(std::string_view line);
std::string to_json_line(const AugmentedRecord& record);

struct RunMetadata {
  double d_n = 600.0;
  double f_n = 650.0;
  int patch_width = 96;
  int patch_height = 64;
  HeadPoseDistribution distribution;
  std::uint64_t seed = 42;
  int copies = 1;
  ChannelMode channels = ChannelMode::gray;
  int background = 0;
  std::string face_model_checksum;
  std::string tool_version{kToolVersion};

  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;

  AugmentationParams params() const;
};

std::string to_json(const RunMetadata& meta);
RunMetadata parse_run_metadata(std::string_view text);
/// Checksum of the canonical serialized metadata; stored in every record.
std::string checksum(const RunMetadata& meta);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_checksum(const std::filesystem::path& path);

/// Records file of an augmentation output. Unparseable lines (for example
/// a torn final write) are skipped and counted.
std::vector<AugmentedRecord> read_augmented_records(const std::filesystem::path& path,
                                                    std::size_t* skipped_lines = nullptr);

}  // namespace gazeaug
