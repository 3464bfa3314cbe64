// Command-line front end: augment, stats, eval, preview, synth, face-model.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>

#include "gazeaug/dataset.hpp"
#include "gazeaug/facemesh.hpp"
#include "gazeaug/pipeline.hpp"
#include "gazeaug/synth.hpp"

namespace {

using namespace gazeaug;

constexpr int kExitRunFailure = 1;
constexpr int kExitUsage = 2;

struct RunFlags {
  std::string manifest;
  std::string face_model;
  double mean_yaw = 0.0;
  double mean_pitch = 30.0;
  double var_yaw = 10.0;
  double var_pitch = 10.0;
  double dn = 600.0;
  double fn = 650.0;
  std::string patch = "64x96";
  int copies = 1;
  std::uint64_t seed = 42;
  std::string channels = "gray";
  int background = 0;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--manifest", f.manifest, "Input sample manifest (one JSON record per line)")->required();
  cmd->add_option("--face-model", f.face_model, "Canonical face model file")->required();
  cmd->add_option("--mean-yaw", f.mean_yaw, "Mean augmented head yaw (deg)")->capture_default_str();
  cmd->add_option("--mean-pitch", f.mean_pitch, "Mean augmented head pitch (deg)")->capture_default_str();
  cmd->add_option("--var-yaw", f.var_yaw, "Head yaw variance (deg^2)")->capture_default_str();
  cmd->add_option("--var-pitch", f.var_pitch, "Head pitch variance (deg^2)")->capture_default_str();
  cmd->add_option("--dn", f.dn, "Normalized camera distance (mm)")->capture_default_str();
  cmd->add_option("--fn", f.fn, "Normalized focal length (px)")->capture_default_str();
  cmd->add_option("--patch", f.patch, "Eye patch size HEIGHTxWIDTH")->capture_default_str();
  cmd->add_option("--copies", f.copies, "Augmented copies per sample")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master random seed")->capture_default_str();
  cmd->add_option("--channels", f.channels, "Patch channels")
      ->check(CLI::IsMember({"gray", "rgb"}))
      ->capture_default_str();
  cmd->add_option("--background", f.background, "Background value for uncovered pixels")
      ->check(CLI::Range(0, 255))
      ->capture_default_str();
}

RunMetadata metadata_from(const RunFlags& f, const std::string& model_checksum) {
  static const std::regex patch_re(R"((\d+)x(\d+))");
  std::smatch m;
  if (!std::regex_match(f.patch, m, patch_re)) throw std::invalid_argument("--patch must look like 64x96");
  RunMetadata meta;
  meta.patch_height = std::stoi(m[1].str());
  meta.patch_width = std::stoi(m[2].str());
  meta.d_n = f.dn;
  meta.f_n = f.fn;
  meta.distribution = {f.mean_yaw, f.mean_pitch, f.var_yaw, f.var_pitch};
  meta.seed = f.seed;
  meta.copies = f.copies;
  meta.channels = f.channels == "rgb" ? ChannelMode::rgb : ChannelMode::gray;
  meta.background = f.background;
  meta.face_model_checksum = model_checksum;
  validate(meta.params());
  if (meta.copies < 1) throw std::invalid_argument("--copies must be at least 1");
  return meta;
}

FaceModel load_model_or_fail(const std::string& path) {
  try {
    return load_face_model(path);
  } catch (const std::exception& e) {
    throw RunFailure(e.what());
  }
}

IngestResult ingest_and_report(const std::string& manifest, std::size_t landmarks) {
  IngestResult ingest = ingest_manifest(manifest, landmarks);
  for (const auto& e : ingest.errors) std::cerr << manifest << ":" << e.line << ": " << e.reason << '\n';
  return ingest;
}

int run_augment(const RunFlags& f, const std::string& out, unsigned threads) {
  const FaceModel model = load_model_or_fail(f.face_model);
  const RunMetadata meta = metadata_from(f, file_checksum(f.face_model));
  const IngestResult ingest = ingest_and_report(f.manifest, model.vertices.size());
  AugmentRunOptions options;
  options.out_dir = out;
  options.image_root = std::filesystem::path(f.manifest).parent_path();
  options.threads = threads;
  options.log = &std::cerr;
  const RunSummary s = augment_dataset(ingest.records, model, meta, options);
  std::cout << "records written: " << s.written_records << "\n"
            << "samples processed: " << s.processed_samples << "\n"
            << "samples skipped (already present): " << s.skipped_existing << "\n"
            << "samples failed: " << s.failed_samples << "\n"
            << "manifest lines rejected: " << ingest.errors.size() << "\n";
  return 0;
}

int run_preview(const RunFlags& f, const std::string& sample_id, const std::string& out) {
  const FaceModel model = load_model_or_fail(f.face_model);
  const RunMetadata meta = metadata_from(f, file_checksum(f.face_model));
  const IngestResult ingest = ingest_and_report(f.manifest, model.vertices.size());
  const auto it = std::find_if(ingest.records.begin(), ingest.records.end(),
                               [&](const SampleRecord& r) { return r.sample_id == sample_id; });
  if (it == ingest.records.end()) throw RunFailure("sample " + sample_id + " not found in " + f.manifest);
  const auto index = static_cast<std::uint64_t>(it - ingest.records.begin());

  std::filesystem::path image_path = it->image_path;
  if (image_path.is_relative()) image_path = std::filesystem::path(f.manifest).parent_path() / image_path;
  const PreparedSample prepared = prepare_sample(*it, load_image(image_path, meta.channels), model);
  const AugmentationParams params = meta.params();
  RngStream rng = sample_stream(meta.seed, index);
  const AnglePair angles = sample_head_pose(params.distribution, rng);
  const auto bg = static_cast<std::uint8_t>(meta.background);
  const RenderedAugmentation rendered = render_augmentation(prepared, model, params, angles, bg);
  save_png(out, compose_preview(rendered, model, params, bg));
  std::printf("head pose yaw %.2f pitch %.2f deg, pnp rms %.3f px -> %s\n", angles.yaw, angles.pitch,
              prepared.pnp.rms_residual, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-synthetic gaze dataset augmentation"};
  app.require_subcommand(1);

  RunFlags aug_flags;
  std::string aug_out;
  unsigned threads = 0;
  auto* augment = app.add_subcommand("augment", "Render augmented eye patches for every manifest sample");
  add_run_flags(augment, aug_flags);
  augment->add_option("--out", aug_out, "Output directory")->required();
  augment->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();

  RunFlags prev_flags;
  std::string prev_sample, prev_out;
  auto* preview = app.add_subcommand("preview", "Render one augmented sample for inspection");
  add_run_flags(preview, prev_flags);
  preview->add_option("--sample", prev_sample, "sample_id to render")->required();
  preview->add_option("--out", prev_out, "Output PNG")->required();

  std::string stats_in, stats_out, stats_model;
  double bin_width = 2.0;
  auto* stats = app.add_subcommand("stats", "Gaze and head pose yaw/pitch histograms");
  stats->add_option("--input", stats_in, "Sample manifest or augmentation records")->required();
  stats->add_option("--out", stats_out, "Output CSV table")->required();
  stats->add_option("--face-model", stats_model, "Recover head pose of manifest samples with this model");
  stats->add_option("--bin-width", bin_width, "Bin width (deg)")->check(CLI::PositiveNumber)->capture_default_str();

  std::string pred, truth;
  auto* eval = app.add_subcommand("eval", "Angular error of predicted against true gaze");
  eval->add_option("--pred", pred, "Predictions (JSON lines)")->required();
  eval->add_option("--truth", truth, "Ground truth (JSON lines)")->required();

  std::string synth_out, synth_model;
  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Render a synthetic sample manifest for trying the pipeline");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--face-model", synth_model, "Face model (default: built-in synthetic model)");
  synth->add_option("--count", synth_opts.count, "Number of samples")->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "Random seed")->capture_default_str();

  std::string fm_out;
  auto* face_model = app.add_subcommand("face-model", "Write the built-in synthetic face model");
  face_model->add_option("--out", fm_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*augment) return run_augment(aug_flags, aug_out, threads);
    if (*preview) return run_preview(prev_flags, prev_sample, prev_out);
    if (*stats) {
      std::optional<FaceModel> model;
      if (!stats_model.empty()) model = load_model_or_fail(stats_model);
      const StatsInput input = read_stats_input(stats_in, model ? &*model : nullptr);
      if (input.skipped_lines) std::cerr << "skipped " << input.skipped_lines << " unparseable lines\n";
      std::ofstream out(stats_out);
      out << format_histogram(make_histogram(input.gaze, input.head, bin_width));
      if (!out) throw RunFailure("cannot write " + stats_out);
      return 0;
    }
    if (*eval) {
      const auto p = read_gaze_file(pred);
      const auto t = read_gaze_file(truth);
      const EvalReport report = evaluate(p, t);
      for (const auto& id : report.unmatched_predictions) std::cerr << "unmatched prediction: " << id << '\n';
      for (const auto& id : report.unmatched_truth) std::cerr << "unmatched ground truth: " << id << '\n';
      std::cout << format_report(report);
      return 0;
    }
    if (*synth) {
      const FaceModel model = synth_model.empty() ? synthetic_face_model() : load_model_or_fail(synth_model);
      std::cout << write_synthetic_dataset(model, synth_opts, synth_out).string() << '\n';
      return 0;
    }
    if (*face_model) {
      save_face_model(fm_out, synthetic_face_model());
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return 0;
}
