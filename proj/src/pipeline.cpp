#include "gazeaug/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "gazeaug/camera.hpp"

namespace gazeaug {

namespace {

constexpr std::size_t kBatchSize = 32;
constexpr std::size_t kMinSamplesBeforeAbort = 20;

std::string patch_name(const std::string& sample_id, char side, int copy) {
  return sample_id + "_" + side + "_" + std::to_string(copy) + ".png";
}

struct SampleResult {
  std::vector<AugmentedRecord> records;
  std::string error;
};

SampleResult process_sample(const SampleRecord& sample, std::size_t index, const FaceModel& model,
                            const RunMetadata& meta, const std::string& params_ref, const AugmentRunOptions& options,
                            const OutputLayout& layout) {
  SampleResult result;
  try {
    std::filesystem::path image_path = sample.image_path;
    if (image_path.is_relative()) image_path = options.image_root / image_path;
    Image image;
    try {
      image = load_image(image_path, meta.channels);
    } catch (const std::runtime_error& e) {
      throw SampleError(e.what());
    }
    const PreparedSample prepared = prepare_sample(sample, std::move(image), model);
    const AugmentationParams params = meta.params();
    RngStream rng = sample_stream(meta.seed, index);
    for (int copy = 0; copy < meta.copies; ++copy) {
      const AnglePair angles = sample_head_pose(params.distribution, rng);
      const RenderedAugmentation rendered =
          render_augmentation(prepared, model, params, angles, static_cast<std::uint8_t>(meta.background));
      AugmentedRecord rec;
      rec.sample_id = sample.sample_id;
      rec.copy_index = copy;
      rec.left_patch_path = "patches/" + patch_name(sample.sample_id, 'L', copy);
      rec.right_patch_path = "patches/" + patch_name(sample.sample_id, 'R', copy);
      save_png(layout.root / rec.left_patch_path, rendered.left_patch);
      save_png(layout.root / rec.right_patch_path, rendered.right_patch);
      rec.head_pose_yaw_pitch = angles;
      rec.head_pose_matrix = rendered.sample.head_pose;
      rec.gaze = rendered.sample.gaze.normalized();
      rec.params_ref = params_ref;
      rec.landmarks_clamped = prepared.landmarks_clamped;
      result.records.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    result.records.clear();
    result.error = e.what();
  }
  return result;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t histogram_bin(double value, const AngleHistogram& h) {
  const double pos = (value - h.lo) / h.bin_width + 0.5;
  if (!(pos >= 0.0) || pos >= static_cast<double>(h.centers.size())) return h.centers.size();
  return static_cast<std::size_t>(std::floor(pos));
}

}  // namespace

PreparedSample prepare_sample(const SampleRecord& sample, Image image, const FaceModel& model) {
  if (sample.landmarks.size() != model.vertices.size())
    throw SampleError("sample " + sample.sample_id + ": landmark count does not match the face model");
  validate(sample.intrinsics, ImageSize{image.width, image.height});

  PnPProblem problem;
  problem.model_points = model.vertices;
  problem.intrinsics = sample.intrinsics;
  problem.image_points.reserve(sample.landmarks.size());
  for (const auto& u : undistort_points(sample.intrinsics, sample.landmarks)) {
    if (!u.converged) throw SampleError("sample " + sample.sample_id + ": landmark undistortion did not converge");
    problem.image_points.push_back(u.point);
  }

  PreparedSample out;
  try {
    out.pnp = solve_pnp(problem);
  } catch (const std::exception& e) {
    throw SampleError("sample " + sample.sample_id + ": " + e.what());
  }
  if (!out.pnp.converged || !std::isfinite(out.pnp.rms_residual))
    throw SampleError("sample " + sample.sample_id + ": head pose estimation did not converge");

  out.gaze_base = correct_gaze_to_base(out.pnp.pose, sample.gaze());
  out.landmarks_clamped = count_out_of_bounds(sample.landmarks, image.width, image.height) > 0;
  out.mesh = build_textured_mesh(model, sample.landmarks, std::move(image));
  return out;
}

RenderedAugmentation render_augmentation(const PreparedSample& prepared, const FaceModel& model,
                                         const AugmentationParams& params, const AnglePair& angles,
                                         std::uint8_t background) {
  RenderedAugmentation out;
  out.angles = angles;
  out.sample = apply_augmentation(prepared.mesh, prepared.gaze_base, angles);
  out.left_camera = make_virtual_camera(eye_center(out.sample.mesh.vertices, model, EyeSide::left), params);
  out.right_camera = make_virtual_camera(eye_center(out.sample.mesh.vertices, model, EyeSide::right), params);
  out.left_patch = render(out.sample.mesh, out.left_camera, background);
  out.right_patch = render(out.sample.mesh, out.right_camera, background);
  return out;
}

RunSummary augment_dataset(std::span<const SampleRecord> samples, const FaceModel& model, const RunMetadata& meta,
                           const AugmentRunOptions& options) {
  validate(meta.params());
  validate(model);
  if (meta.copies < 1) throw std::invalid_argument("copies must be at least 1");
  if (meta.background < 0 || meta.background > 255) throw std::invalid_argument("background must be in [0, 255]");

  const OutputLayout layout{options.out_dir};
  std::filesystem::create_directories(layout.patches());
  const std::string metadata_text = to_json(meta);
  const std::string params_ref = checksum(meta);

  RunSummary summary;
  std::unordered_set<std::string> done;
  if (std::filesystem::exists(layout.metadata())) {
    RunMetadata existing;
    try {
      existing = parse_run_metadata(read_text(layout.metadata()));
    } catch (const std::invalid_argument& e) {
      throw RunFailure("output directory " + layout.root.string() + " has unreadable metadata: " + e.what());
    }
    if (!(existing == meta))
      throw RunFailure("output directory " + layout.root.string() + " belongs to a run with different parameters");
    if (std::filesystem::exists(layout.records())) {
      std::size_t torn = 0;
      const auto previous = read_augmented_records(layout.records(), &torn);
      // a sample counts as done only with every copy present; partial ones
      // and torn lines are dropped so the sample is redone cleanly
      std::unordered_map<std::string, std::set<int>> copies_seen;
      for (const auto& r : previous) copies_seen[r.sample_id].insert(r.copy_index);
      for (const auto& [id, seen] : copies_seen)
        if (seen.size() == static_cast<std::size_t>(meta.copies)) done.insert(id);
      std::ofstream rewrite(layout.records(), std::ios::trunc);
      for (const auto& r : previous)
        if (done.contains(r.sample_id)) rewrite << to_json_line(r) << '\n';
    }
  } else {
    std::ofstream out(layout.metadata());
    out << metadata_text << '\n';
    if (!out) throw RunFailure("cannot write " + layout.metadata().string());
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (done.contains(samples[i].sample_id)) ++summary.skipped_existing;
    else todo.push_back(i);
  }

  std::ofstream records(layout.records(), std::ios::app);
  if (!records) throw RunFailure("cannot open " + layout.records().string());

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<SampleResult> results;
  for (std::size_t begin = 0; begin < todo.size(); begin += kBatchSize) {
    const std::size_t end = std::min(todo.size(), begin + kBatchSize);
    results.assign(end - begin, {});
    std::atomic<std::size_t> next{begin};
    auto work = [&] {
      for (std::size_t k = next++; k < end; k = next++) {
        const std::size_t index = todo[k];
        results[k - begin] = process_sample(samples[index], index, model, meta, params_ref, options, layout);
      }
    };
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 1; t < std::min<std::size_t>(threads, end - begin); ++t) pool.emplace_back(work);
      work();
    }
    for (std::size_t k = begin; k < end; ++k) {
      const auto& r = results[k - begin];
      ++summary.processed_samples;
      if (!r.error.empty()) {
        ++summary.failed_samples;
        if (options.log) *options.log << "skipping " << samples[todo[k]].sample_id << ": " << r.error << '\n';
        continue;
      }
      std::string block;
      for (const auto& rec : r.records) block += to_json_line(rec) + '\n';
      records << block << std::flush;
      summary.written_records += r.records.size();
    }
    if (summary.processed_samples >= kMinSamplesBeforeAbort && 2 * summary.failed_samples > summary.processed_samples)
      throw RunFailure("aborting: " + std::to_string(summary.failed_samples) + " of " +
                       std::to_string(summary.processed_samples) + " samples failed");
  }
  if (summary.processed_samples > 0 && 2 * summary.failed_samples > summary.processed_samples)
    throw RunFailure(std::to_string(summary.failed_samples) + " of " + std::to_string(summary.processed_samples) +
                     " samples failed");
  return summary;
}

AnglePair gaze_angles(const Vec3& gaze) {
  const Vec3 g = gaze.z() < 0.0 ? Vec3(-gaze) : gaze;
  return yaw_pitch_from_direction(g);
}

AngleHistogram make_histogram(std::span<const AnglePair> gaze, std::span<const AnglePair> head, double bin_width,
                              double lo, double hi) {
  if (!(bin_width > 0.0) || !(hi >= lo)) throw std::invalid_argument("invalid histogram range");
  AngleHistogram h;
  h.bin_width = bin_width;
  h.lo = lo;
  h.hi = hi;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / bin_width + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) h.centers.push_back(lo + bin_width * static_cast<double>(i));
  h.gaze_yaw.assign(n, 0);
  h.gaze_pitch.assign(n, 0);
  h.head_yaw.assign(n, 0);
  h.head_pitch.assign(n, 0);
  auto add = [&](std::vector<std::size_t>& counts, double v) {
    const std::size_t b = histogram_bin(v, h);
    if (b < n) ++counts[b];
  };
  for (const auto& a : gaze) {
    add(h.gaze_yaw, a.yaw);
    add(h.gaze_pitch, a.pitch);
  }
  for (const auto& a : head) {
    add(h.head_yaw, a.yaw);
    add(h.head_pitch, a.pitch);
  }
  return h;
}

std::string format_histogram(const AngleHistogram& h) {
  std::ostringstream out;
  out << "bin_center_deg,gaze_yaw_count,gaze_pitch_count,head_yaw_count,head_pitch_count\n";
  char center[32];
  for (std::size_t i = 0; i < h.centers.size(); ++i) {
    std::snprintf(center, sizeof center, "%g", h.centers[i] == 0.0 ? 0.0 : h.centers[i]);
    out << center << ',' << h.gaze_yaw[i] << ',' << h.gaze_pitch[i] << ',' << h.head_yaw[i] << ','
        << h.head_pitch[i] << '\n';
  }
  return out.str();
}

StatsInput read_stats_input(const std::filesystem::path& path, const FaceModel* model) {
  std::ifstream in(path);
  if (!in) throw RunFailure("cannot open " + path.string());
  StatsInput out;
  std::string line;
  std::size_t parsed = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      if (line.find("\"head_pose_yaw_pitch\"") != std::string::npos) {
        const AugmentedRecord r = parse_augmented_line(line);
        out.gaze.push_back(gaze_angles(r.gaze));
        out.head.push_back(r.head_pose_yaw_pitch);
      } else {
        const SampleRecord r = parse_sample_line(line);
        out.gaze.push_back(gaze_angles(r.gaze()));
        if (model && r.landmarks.size() == model->vertices.size()) {
          PnPProblem problem{model->vertices, {}, r.intrinsics};
          for (const auto& u : undistort_points(r.intrinsics, r.landmarks)) problem.image_points.push_back(u.point);
          const PnPSolution sol = solve_pnp(problem);
          if (sol.converged) out.head.push_back(yaw_pitch_from_direction(sol.pose.rotation * Vec3::UnitZ()));
        }
      }
      ++parsed;
    } catch (const std::exception&) {
      ++out.skipped_lines;
    }
  }
  if (parsed == 0) throw RunFailure("no valid records in " + path.string());
  return out;
}

std::vector<GazeEntry> read_gaze_file(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path);
  if (!in) throw RunFailure("cannot open " + path.string());
  std::vector<GazeEntry> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  auto vec = [](const json& j) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  };
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(number) + ": ";
    try {
      const json j = json::parse(line);
      GazeEntry e;
      e.sample_id = j.at("sample_id").get<std::string>();
      if (j.contains("gaze")) e.gaze = vec(j.at("gaze"));
      else if (j.contains("gaze_direction")) e.gaze = vec(j.at("gaze_direction"));
      else if (j.contains("gaze_target") && j.contains("gaze_origin"))
        e.gaze = vec(j.at("gaze_target")) - vec(j.at("gaze_origin"));
      else throw std::invalid_argument("no gaze field");
      if (!e.gaze.allFinite() || e.gaze.squaredNorm() == 0.0) throw std::invalid_argument("gaze is zero or non-finite");
      if (j.contains("user_id")) e.user_id = j.at("user_id").get<std::string>();
      if (!seen.insert(e.sample_id).second) throw std::invalid_argument("duplicate sample_id " + e.sample_id);
      out.push_back(std::move(e));
    } catch (const std::exception& e) {
      throw RunFailure(where + e.what());
    }
  }
  return out;
}

EvalReport evaluate(std::span<const GazeEntry> predictions, std::span<const GazeEntry> truth) {
  std::unordered_map<std::string, const GazeEntry*> by_id;
  for (const auto& t : truth) by_id.emplace(t.sample_id, &t);
  std::unordered_set<std::string> matched_ids;

  EvalReport report;
  std::vector<double> errors;
  std::map<std::string, double> user_sums;
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.sample_id);
    if (it == by_id.end()) {
      report.unmatched_predictions.push_back(p.sample_id);
      continue;
    }
    matched_ids.insert(p.sample_id);
    const double e = angular_error(it->second->gaze, p.gaze);
    errors.push_back(e);
    const auto& user = it->second->user_id ? it->second->user_id : p.user_id;
    if (user) {
      user_sums[*user] += e;
      ++report.per_user[*user].count;
    }
  }
  for (const auto& t : truth)
    if (!matched_ids.contains(t.sample_id)) report.unmatched_truth.push_back(t.sample_id);
  if (errors.empty()) throw RunFailure("no sample ids in common between predictions and ground truth");

  report.matched = errors.size();
  double sum = 0.0;
  for (double e : errors) sum += e;
  report.mean = sum / static_cast<double>(errors.size());
  std::sort(errors.begin(), errors.end());
  const std::size_t mid = errors.size() / 2;
  report.median = errors.size() % 2 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
  for (auto& [user, stats] : report.per_user) stats.mean = user_sums[user] / static_cast<double>(stats.count);
  return report;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream out;
  char buf[64];
  out << "matched_samples: " << r.matched << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", r.mean);
  out << "mean_error_deg: " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", r.median);
  out << "median_error_deg: " << buf << '\n';
  for (const auto& [user, stats] : r.per_user) {
    std::snprintf(buf, sizeof buf, "%.2f", stats.mean);
    out << "user " << user << ": " << buf << " (" << stats.count << ")\n";
  }
  out << "unmatched_predictions: " << r.unmatched_predictions.size() << '\n';
  out << "unmatched_truth: " << r.unmatched_truth.size() << '\n';
  return out.str();
}

Image compose_preview(const RenderedAugmentation& rendered, const FaceModel& model, const AugmentationParams& params,
                      std::uint8_t background) {
  constexpr int kFaceView = 320;
  constexpr int kGap = 8;
  const Vec3 mid = 0.5 * (eye_center(rendered.sample.mesh.vertices, model, EyeSide::left) +
                          eye_center(rendered.sample.mesh.vertices, model, EyeSide::right));
  const VirtualCamera face_cam{Vec3(mid.x(), mid.y(), mid.z() - params.d_n), params.f_n, kFaceView, kFaceView};
  const Image face = render(rendered.sample.mesh, face_cam, background);

  const int pw = rendered.left_patch.width;
  const int ph = rendered.left_patch.height;
  const int width = std::max(kFaceView, 2 * pw + kGap);
  const int height = kFaceView + kGap + ph;
  Image canvas(width, height, face.channels, background);
  auto blit = [&](const Image& src, int ox, int oy) {
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x)
        for (int c = 0; c < canvas.channels; ++c) canvas.at(ox + x, oy + y, c) = src.at(x, y, src.channels == 1 ? 0 : c);
  };
  blit(face, (width - kFaceView) / 2, 0);
  // subject's right eye appears on the image left
  blit(rendered.right_patch, (width - 2 * pw - kGap) / 2, kFaceView + kGap);
  blit(rendered.left_patch, (width - 2 * pw - kGap) / 2 + pw + kGap, kFaceView + kGap);
  return canvas;
}

}  // namespace gazeaug
