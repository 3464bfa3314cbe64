#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazeaug/augment.hpp"
#include "gazeaug/dataset.hpp"
#include "gazeaug/facemesh.hpp"
#include "gazeaug/pnp.hpp"
#include "gazeaug/render.hpp"

namespace gazeaug {

/// A single sample could not be processed; the run continues without it.
class SampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sample brought into the centered model frame: pose recovered, gaze
/// corrected, textured mesh built.
struct PreparedSample {
  PnPSolution pnp;
  Vec3 gaze_base;
  TexturedMesh mesh;
  bool landmarks_clamped = false;
};

/// Undistorts landmarks, solves for the head pose, corrects the gaze and
/// builds the mesh. Throws SampleError when the pose cannot be recovered.
PreparedSample prepare_sample(const SampleRecord& sample, Image image, const FaceModel& model);

struct RenderedAugmentation {
  AnglePair angles;
  AugmentedSample sample;
  VirtualCamera left_camera;
  VirtualCamera right_camera;
  EyePatchImage left_patch;
  EyePatchImage right_patch;
};

RenderedAugmentation render_augmentation(const PreparedSample& prepared, const FaceModel& model,
                                         const AugmentationParams& params, const AnglePair& angles,
                                         std::uint8_t background);

/// Output directory layout.
struct OutputLayout {
  std::filesystem::path root;
  std::filesystem::path metadata() const { return root / "metadata"; }
  std::filesystem::path records() const { return root / "records"; }
  std::filesystem::path patches() const { return root / "patches"; }
};

struct AugmentRunOptions {
  std::filesystem::path out_dir;
  std::filesystem::path image_root;  // relative image paths resolve against this
  unsigned threads = 0;              // 0: hardware concurrency
  std::ostream* log = nullptr;
};

struct RunSummary {
  std::size_t written_records = 0;
  std::size_t processed_samples = 0;
  std::size_t skipped_existing = 0;  // already present in the output (resume)
  std::size_t failed_samples = 0;
};

/// Runs the full augmentation over `samples`: per sample and copy, recover
/// pose, correct gaze, draw a head pose, re-pose the mesh and render both
/// eyes. Records are appended in input order, so output is independent of
/// the thread count. Samples with every copy already in the output are
/// skipped. Throws RunFailure when the output belongs to a different run or
/// more than half of the samples fail.
RunSummary augment_dataset(std::span<const SampleRecord> samples, const FaceModel& model, const RunMetadata& meta,
                           const AugmentRunOptions& options);

/// Gaze angles of a direction after folding it onto the +z hemisphere.
AnglePair gaze_angles(const Vec3& gaze);

struct AngleHistogram {
  double bin_width = 2.0;
  double lo = -90.0;
  double hi = 90.0;
  std::vector<double> centers;
  std::vector<std::size_t> gaze_yaw, gaze_pitch, head_yaw, head_pitch;
};

/// Bins are centered on multiples of bin_width from lo to hi inclusive;
/// values outside [lo - w/2, hi + w/2) are dropped.
AngleHistogram make_histogram(std::span<const AnglePair> gaze, std::span<const AnglePair> head,
                              double bin_width = 2.0, double lo = -90.0, double hi = 90.0);
std::string format_histogram(const AngleHistogram& histogram);

struct StatsInput {
  std::vector<AnglePair> gaze;
  std::vector<AnglePair> head;
  std::size_t skipped_lines = 0;
};

/// Reads a sample manifest or an augmentation records file. Head pose comes
/// from records directly; for manifests it is recovered by PnP when a face
/// model is supplied and omitted otherwise.
StatsInput read_stats_input(const std::filesystem::path& path, const FaceModel* model = nullptr);

struct UserError {
  double mean = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::size_t matched = 0;
  double mean = 0.0;
  double median = 0.0;
  std::map<std::string, UserError> per_user;
  std::vector<std::string> unmatched_predictions;
  std::vector<std::string> unmatched_truth;
};

struct GazeEntry {
  std::string sample_id;
  Vec3 gaze;
  std::optional<std::string> user_id;
};

/// Lines carrying sample_id plus one of gaze, gaze_direction or
/// gaze_target/gaze_origin; user_id optional. Throws RunFailure on
/// malformed lines or duplicate ids.
std::vector<GazeEntry> read_gaze_file(const std::filesystem::path& path);

/// Angular error statistics over the ids present in both inputs. Throws
/// RunFailure when no ids match.
EvalReport evaluate(std::span<const GazeEntry> predictions, std::span<const GazeEntry> truth);
std::string format_report(const EvalReport& report);

/// Full-face view of an augmented sample with both eye patches below it.
Image compose_preview(const RenderedAugmentation& rendered, const FaceModel& model, const AugmentationParams& params,
                      std::uint8_t background);

}  // namespace gazeaug
