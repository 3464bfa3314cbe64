// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gazeaug/augment.hpp"
#include "gazeaug/normalize.hpp"
#include "gazeaug/pipeline.hpp"
#include "gazeaug/pnp.hpp"
#include "gazeaug/render.hpp"
#include "gazeaug/synth.hpp"
#include "oracles.hpp"

using namespace gazeaug;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

CameraIntrinsics webcam() {
  CameraIntrinsics k;
  k.fx = 600.0;
  k.fy = 600.0;
  k.cx = 320.0;
  k.cy = 240.0;
  return k;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

RigidTransform random_face_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-40.0, 40.0), tz(400.0, 800.0), txy(-60.0, 60.0);
  return {rotation_from_yaw_pitch({ang(rng), ang(rng)}), Vec3(txy(rng), txy(rng), tz(rng))};
}

PnPProblem project_model(const FaceModel& model, const RigidTransform& pose, const CameraIntrinsics& k) {
  PnPProblem p;
  p.model_points = model.vertices;
  p.intrinsics = k;
  for (const auto& v : model.vertices) p.image_points.push_back(project(k, apply(pose, v)));
  return p;
}

Outcome pnp_oracle() {
  const auto start = Clock::now();
  const FaceModel model = synthetic_face_model();
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> noise(0.0, 0.5);
  int exact_ok = 0, noisy_ok = 0;
  double worst_rot = 0.0, worst_trans = 0.0;
  for (int i = 0; i < 100; ++i) {
    const RigidTransform truth = random_face_pose(rng);
    PnPProblem problem = project_model(model, truth, webcam());
    const PnPSolution exact = solve_pnp(problem);
    const double rot = rotation_angle_between(exact.pose.rotation, truth.rotation);
    const double trans = (exact.pose.translation - truth.translation).norm();
    worst_rot = std::max(worst_rot, rot);
    worst_trans = std::max(worst_trans, trans);
    if (rot < 0.1 && trans < 0.5) ++exact_ok;
    for (auto& px : problem.image_points) px += Vec2(noise(rng), noise(rng));
    if (rotation_angle_between(solve_pnp(problem).pose.rotation, truth.rotation) < 1.0) ++noisy_ok;
  }
  const double elapsed = seconds_since(start);
  return {exact_ok == 100 && noisy_ok >= 95 && elapsed < 30.0,
          fmt("noiseless %d/100 (worst %.2e deg, %.2e mm), 0.5px noise %d/100 within 1 deg, %.2f s", exact_ok,
              worst_rot, worst_trans, noisy_ok, elapsed)};
}

Outcome jacobian_check() {
  const FaceModel model = synthetic_face_model();
  std::mt19937_64 rng(1002);
  const PnPProblem problem = project_model(model, random_face_pose(rng), webcam());
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const RigidTransform pose = random_face_pose(rng);
    const Eigen::MatrixXd analytic = residual_jacobian(pose, problem);
    const Eigen::MatrixXd numeric = oracle::numeric_jacobian(pose, problem, 1e-6);
    worst = std::max(worst, (analytic - numeric).norm() / numeric.norm());
  }
  return {worst < 1e-5, fmt("max relative error %.2e over 100 poses", worst)};
}

Outcome gaze_round_trip() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const RigidTransform pose{rotation_from_axis_angle(random_unit(rng) * angle(rng)), Vec3(0, 0, 600)};
    const Vec3 g = random_unit(rng);
    const Vec3 actual = pose.rotation * g;
    worst = std::max(worst, angular_error(pose.rotation * correct_gaze_to_base(pose, actual), actual));
  }
  return {worst <= 1e-7, fmt("max error %.2e deg over 1000 cases", worst)};
}

Outcome distribution_moments() {
  const auto start = Clock::now();
  const HeadPoseDistribution dist;
  const int n = 10000;
  std::vector<AnglePair> draws;
  draws.reserve(n);
  // first draw of each per-sample stream, as an augmentation run takes them
  for (int i = 0; i < n; ++i) {
    RngStream rng = sample_stream(42, static_cast<std::uint64_t>(i));
    draws.push_back(sample_head_pose(dist, rng));
  }
  double my = 0, mp = 0;
  for (const auto& d : draws) {
    my += d.yaw;
    mp += d.pitch;
  }
  my /= n;
  mp /= n;
  double vy = 0, vp = 0;
  for (const auto& d : draws) {
    vy += (d.yaw - my) * (d.yaw - my);
    vp += (d.pitch - mp) * (d.pitch - mp);
  }
  vy /= n - 1;
  vp /= n - 1;
  const double elapsed = seconds_since(start);
  const bool pass = std::abs(my) <= 0.095 && std::abs(mp - 30.0) <= 0.095 && vy >= 9.0 && vy <= 11.0 && vp >= 9.0 &&
                    vp <= 11.0 && elapsed < 5.0;
  return {pass, fmt("mean (%.4f, %.4f) deg, variance (%.3f, %.3f) deg^2, %.3f s", my, mp, vy, vp, elapsed)};
}

Outcome virtual_camera_centering() {
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> xy(-400, 400), z(-200, 1500);
  const AugmentationParams params;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 eye(xy(rng), xy(rng), z(rng));
    const VirtualCamera cam = make_virtual_camera(eye, params);
    worst = std::max(worst, (cam.project_camera_frame(eye - cam.origin) - cam.principal_point()).norm());
  }
  return {worst <= 1e-6, fmt("max offset %.2e px over 1000 eye positions", worst)};
}

Outcome rasterizer_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> depth(150.0, 1200.0), screen(-30.0, 126.0), uv(0.0, 1.0);
  const VirtualCamera cam{Vec3::Zero(), 650.0, 96, 64};
  const Image texture(4, 4, 1, 255);
  int coverage_ok = 0;
  double worst_uv = 0.0;
  std::size_t lit_total = 0, uv_checked = 0;
  for (int scene = 0; scene < 200; ++scene) {
    std::array<Vec3, 3> v;
    std::array<Vec2, 3> s;
    std::array<Vec2, 3> t;
    for (int k = 0; k < 3; ++k) {
      const double z = depth(rng);
      s[k] = Vec2(screen(rng), screen(rng) * 64.0 / 96.0);
      v[k] = Vec3((s[k].x() - 48.0) * z / cam.focal, (s[k].y() - 32.0) * z / cam.focal, z);
      t[k] = Vec2(uv(rng), uv(rng));
    }
    Image target(cam.width, cam.height, 1, 0);
    DepthBuffer zbuf(cam.width, cam.height);
    rasterize_triangle(cam, v, t, texture, target, zbuf);

    const Vec2 a = cam.project_camera_frame(v[0]), b = cam.project_camera_frame(v[1]),
               c = cam.project_camera_frame(v[2]);
    bool same = true;
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        const bool expected = oracle::point_in_triangle(a, b, c, Vec2(x + 0.5, y + 0.5));
        const bool got = target.at(x, y) != 0;
        if (expected != got) same = false;
        lit_total += got;
      }
    }
    if (same) ++coverage_ok;

    for_each_fragment(cam, v, t, [&](const Fragment& f) {
      const Vec3 dir((f.x + 0.5 - 48.0) / cam.focal, (f.y + 0.5 - 32.0) / cam.focal, 1.0);
      const auto hit = oracle::ray_triangle(Vec3::Zero(), dir, v[0], v[1], v[2]);
      if (!hit) return;
      const Vec2 expected = (1.0 - hit->b1 - hit->b2) * t[0] + hit->b1 * t[1] + hit->b2 * t[2];
      worst_uv = std::max(worst_uv, (f.uv - expected).norm());
      ++uv_checked;
    });
  }
  const double elapsed = seconds_since(start);
  return {coverage_ok == 200 && worst_uv < 1e-3 && uv_checked > 0 && elapsed < 60.0,
          fmt("coverage identical in %d/200 scenes (%zu lit px), max uv error %.2e over %zu px, %.2f s", coverage_ok,
              lit_total, worst_uv, uv_checked, elapsed)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome end_to_end() {
  const auto root = std::filesystem::temp_directory_path() / ("gazeaug_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  const FaceModel model = synthetic_face_model();
  SynthOptions opts;
  opts.count = 10;
  const auto manifest = write_synthetic_dataset(model, opts, root / "data");
  const auto samples = ingest_manifest(manifest, model.vertices.size()).records;

  RunMetadata meta;
  meta.distribution = {0.0, 30.0, 0.0, 0.0};
  meta.seed = 42;
  meta.face_model_checksum = fnv1a_hex(model.name);
  AugmentRunOptions run;
  run.image_root = root / "data";
  run.out_dir = root / "run1";
  const RunSummary first = augment_dataset(samples, model, meta, run);
  run.out_dir = root / "run2";
  augment_dataset(samples, model, meta, run);
  const std::string records1 = slurp(root / "run1/records");
  const bool identical = !records1.empty() && records1 == slurp(root / "run2/records");

  // recover the head pose from the re-posed mesh as seen by each eye camera
  double worst_pitch = 0.0, worst_geodesic = 0.0;
  std::size_t checked = 0, covered_px = 0;
  const AugmentationParams params = meta.params();
  const auto records = read_augmented_records(root / "run1/records");
  for (const auto& rec : records) {
    const auto it = std::find_if(samples.begin(), samples.end(),
                                 [&](const SampleRecord& s) { return s.sample_id == rec.sample_id; });
    const PreparedSample prepared = prepare_sample(*it, load_image(root / "data" / it->image_path, ChannelMode::gray), model);
    const RenderedAugmentation r = render_augmentation(prepared, model, params, rec.head_pose_yaw_pitch, 0);
    for (const VirtualCamera* cam : {&r.left_camera, &r.right_camera}) {
      PnPProblem problem;
      problem.model_points = model.vertices;
      problem.intrinsics = {cam->focal, cam->focal, 0.5 * cam->width, 0.5 * cam->height, {}};
      for (const auto& v : r.sample.mesh.vertices) problem.image_points.push_back(cam->project_camera_frame(v - cam->origin));
      const PnPSolution sol = solve_pnp(problem);
      const AnglePair recovered = yaw_pitch_from_direction(sol.pose.rotation * Vec3::UnitZ());
      worst_pitch = std::max(worst_pitch, std::abs(recovered.pitch - 30.0));
      worst_geodesic = std::max(worst_geodesic, rotation_angle_between(sol.pose.rotation, rotation_pitch(30.0)));
      ++checked;
    }
    const Image patch = load_image(root / "run1" / rec.left_patch_path, ChannelMode::gray);
    for (auto px : patch.pixels) covered_px += px != 0;
  }
  std::filesystem::remove_all(root);
  const bool pass = first.written_records == 10 && records.size() == 10 && checked == 20 && worst_pitch < 0.5 &&
                    worst_geodesic < 0.5 && identical && covered_px > 0;
  return {pass, fmt("%zu records, worst pitch error %.2e deg, worst geodesic %.2e deg over %zu eye views, "
                    "seed-42 manifests %s",
                    records.size(), worst_pitch, worst_geodesic, checked, identical ? "byte-identical" : "DIFFER")};
}

Outcome normalization_round_trip() {
  std::mt19937_64 rng(1008);
  std::uniform_real_distribution<double> ang(-45, 45), roll(-20, 20), xy(-200, 200), z(250, 1000);
  const AugmentationParams params;
  double worst_dir = 0.0, worst_roll = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Mat3 head =
        rotation_from_yaw_pitch({ang(rng), ang(rng)}) * rotation_from_axis_angle(Vec3(0, 0, deg2rad(roll(rng))));
    const auto n = compute_normalization(head, Vec3(xy(rng), xy(rng), z(rng)), webcam(), params);
    const Vec3 g = random_unit(rng);
    worst_dir = std::max(worst_dir, (denormalize_gaze(n.rotation * g, n) - g).norm());
    const Vec3 lateral = (n.rotation * head).col(0);
    worst_roll = std::max(worst_roll, std::abs(rad2deg(std::asin(std::clamp(lateral.y(), -1.0, 1.0)))));
  }
  return {worst_dir <= 1e-9 && worst_roll <= 1e-9,
          fmt("max direction error %.2e, max normalized roll %.2e deg over 1000 cases", worst_dir, worst_roll)};
}

Outcome eval_metric() {
  const auto dir = std::filesystem::temp_directory_path() / ("gazeaug_acceptance_eval_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::vector<std::pair<std::string, Vec3>>& rows) {
    std::ofstream out(dir / name);
    for (const auto& [id, g] : rows)
      out << "{\"sample_id\":\"" << id << "\",\"gaze\":[" << fmt("%.17g,%.17g,%.17g", g.x(), g.y(), g.z()) << "]}\n";
  };
  auto tilted = [](double deg) { return Vec3(std::sin(deg2rad(deg)), 0.0, std::cos(deg2rad(deg))); };
  write("truth", {{"a", {0, 0, 1}}, {"b", {0, 0, 1}}, {"c", {0, 0, 1}}});
  write("same", {{"a", {0, 0, 1}}, {"b", {0, 0, 1}}, {"c", {0, 0, 1}}});
  write("ortho", {{"a", {1, 0, 0}}, {"b", {0, 1, 0}}, {"c", {-1, 0, 0}}});
  write("known", {{"a", tilted(10)}, {"b", tilted(20)}, {"c", tilted(30)}});
  write("anti", {{"a", {0, 0, -1}}, {"b", {0, 0, -5}}, {"c", {0, 0, -0.1}}});
  const auto truth = read_gaze_file(dir / "truth");
  auto mean_line = [&](const char* name) {
    const std::string report = format_report(evaluate(read_gaze_file(dir / name), truth));
    const auto pos = report.find("mean_error_deg: ");
    return report.substr(pos + 16, report.find('\n', pos) - pos - 16);
  };
  const std::string same = mean_line("same"), ortho = mean_line("ortho"), known = mean_line("known"),
                    anti = mean_line("anti");
  std::filesystem::remove_all(dir);
  return {same == "0.00" && ortho == "90.00" && known == "20.00" && anti == "0.00",
          fmt("identical %s, orthogonal %s, 10/20/30 mean %s, antiparallel %s", same.c_str(), ortho.c_str(),
              known.c_str(), anti.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"pnp_oracle_suite", pnp_oracle},
      {"pnp_jacobian_check", jacobian_check},
      {"gaze_round_trip", gaze_round_trip},
      {"head_pose_distribution_moments", distribution_moments},
      {"virtual_camera_centering", virtual_camera_centering},
      {"rasterizer_oracle", rasterizer_oracle},
      {"end_to_end_loop", end_to_end},
      {"normalization_round_trip", normalization_round_trip},
      {"angular_error_metric", eval_metric},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
