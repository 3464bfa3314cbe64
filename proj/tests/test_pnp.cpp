#include <gtest/gtest.h>

#include <random>

#include "gazeaug/facemesh.hpp"
#include "gazeaug/pnp.hpp"
#include "oracles.hpp"

using namespace gazeaug;

namespace {

CameraIntrinsics webcam() {
  CameraIntrinsics k;
  k.fx = 600.0;
  k.fy = 600.0;
  k.cx = 320.0;
  k.cy = 240.0;
  return k;
}

PnPProblem posed_problem(const RigidTransform& pose) {
  PnPProblem p;
  p.model_points = synthetic_face_model().vertices;
  p.intrinsics = webcam();
  for (const auto& v : p.model_points) p.image_points.push_back(project(p.intrinsics, apply(pose, v)));
  return p;
}

RigidTransform make_pose(double yaw, double pitch, const Vec3& t) {
  return {rotation_from_yaw_pitch({yaw, pitch}), t};
}

}  // namespace

TEST(Residuals, ZeroAtGroundTruth) {
  const auto pose = make_pose(10.0, 20.0, {5, -8, 600});
  const auto problem = posed_problem(pose);
  for (const auto& r : reprojection_residuals(pose, problem)) EXPECT_LT(r.norm(), 1e-7);
}

TEST(Residuals, ConstructedUNoiseGivesUnitRms) {
  const auto pose = make_pose(0.0, 0.0, {0, 0, 600});
  auto problem = posed_problem(pose);
  for (auto& p : problem.image_points) p.x() += 1.0;
  const auto res = reprojection_residuals(pose, problem);
  double su = 0.0, sv = 0.0;
  for (const auto& r : res) {
    su += r.x() * r.x();
    sv += r.y() * r.y();
  }
  EXPECT_NEAR(std::sqrt(su / static_cast<double>(res.size())), 1.0, 1e-9);
  EXPECT_NEAR(sv, 0.0, 1e-12);
}

TEST(Residuals, CostMatchesScalarSum) {
  const auto truth = make_pose(-12.0, 7.0, {20, 10, 550});
  const auto problem = posed_problem(truth);
  const auto other = make_pose(3.0, -4.0, {-5, 2, 620});
  double expected = 0.0;
  const auto& k = problem.intrinsics;
  for (std::size_t i = 0; i < problem.model_points.size(); ++i) {
    const auto& m = problem.model_points[i];
    double cam[3];
    for (int r = 0; r < 3; ++r)
      cam[r] = other.rotation(r, 0) * m.x() + other.rotation(r, 1) * m.y() + other.rotation(r, 2) * m.z() +
               other.translation(r);
    const double du = k.fx * cam[0] / cam[2] + k.cx - problem.image_points[i].x();
    const double dv = k.fy * cam[1] / cam[2] + k.cy - problem.image_points[i].y();
    expected += du * du + dv * dv;
  }
  EXPECT_NEAR(reprojection_cost(other, problem), expected, 1e-9 * expected);
}

TEST(Residuals, BehindCameraReportsIndex) {
  auto problem = posed_problem(make_pose(0, 0, {0, 0, 600}));
  const auto bad = make_pose(0, 0, {0, 0, -600});
  try {
    reprojection_residuals(bad, problem);
    FAIL() << "expected BehindCameraError";
  } catch (const BehindCameraError& e) {
    EXPECT_EQ(e.index(), 0u);
  }
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ang(-40.0, 40.0), tz(400.0, 800.0), txy(-50.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pose = make_pose(ang(rng), ang(rng), {txy(rng), txy(rng), tz(rng)});
    auto problem = posed_problem(make_pose(0, 0, {0, 0, 600}));
    const Eigen::MatrixXd analytic = residual_jacobian(pose, problem);
    const Eigen::MatrixXd numeric = oracle::numeric_jacobian(pose, problem, 1e-6);
    EXPECT_LT((analytic - numeric).norm() / numeric.norm(), 1e-5);
  }
}

TEST(Solve, RecoversYaw10Pitch20) {
  const auto truth = make_pose(10.0, 20.0, {0, 0, 600});
  const auto sol = solve_pnp(posed_problem(truth));
  EXPECT_TRUE(sol.converged);
  EXPECT_LT(rotation_angle_between(sol.pose.rotation, truth.rotation), 0.1);
  EXPECT_LT((sol.pose.translation - truth.translation).norm(), 0.5);
  EXPECT_LT(sol.rms_residual, 1e-6);
}

TEST(Solve, RecoversIdentityRotation) {
  const auto truth = make_pose(0.0, 0.0, {0, 0, 600});
  const auto sol = solve_pnp(posed_problem(truth));
  EXPECT_LT(rotation_angle_between(sol.pose.rotation, truth.rotation), 0.1);
  EXPECT_LT((sol.pose.translation - truth.translation).norm(), 0.5);
}

TEST(Solve, ObjectiveNeverIncreasesFromInit) {
  const auto truth = make_pose(25.0, -15.0, {30, -20, 700});
  const auto problem = posed_problem(truth);
  const auto init = make_pose(0, 0, {0, 0, 500});
  const double start = reprojection_cost(init, problem);
  const auto sol = solve_pnp(problem, init);
  EXPECT_LE(reprojection_cost(sol.pose, problem), start);
  EXPECT_LT(rotation_angle_between(sol.pose.rotation, truth.rotation), 0.1);
}

TEST(Solve, NoisyLandmarksStayWithinOneDegree) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> ang(-40.0, 40.0), tz(400.0, 800.0);
  std::normal_distribution<double> noise(0.0, 0.5);
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto truth = make_pose(ang(rng), ang(rng), {0, 0, tz(rng)});
    auto problem = posed_problem(truth);
    for (auto& p : problem.image_points) p += Vec2(noise(rng), noise(rng));
    const auto sol = solve_pnp(problem);
    if (rotation_angle_between(sol.pose.rotation, truth.rotation) < 1.0) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(Validate, RejectsTooFewMismatchedCollinear) {
  PnPProblem p;
  p.intrinsics = webcam();
  for (int i = 0; i < 5; ++i) {
    p.model_points.emplace_back(i, 0, 0);
    p.image_points.emplace_back(i, 0);
  }
  EXPECT_THROW(validate(p), std::invalid_argument);
  p.model_points.emplace_back(5, 0, 0);
  p.image_points.emplace_back(5, 0);
  EXPECT_THROW(validate(p), std::invalid_argument);  // collinear
  p.image_points.pop_back();
  EXPECT_THROW(validate(p), std::invalid_argument);  // size mismatch
}

TEST(WeakPerspective, MirroredTwinFlipsDepthOrder) {
  const auto problem = posed_problem(make_pose(20.0, 0.0, {0, 0, 600}));
  const auto a = weak_perspective_pose(problem, false);
  const auto b = weak_perspective_pose(problem, true);
  EXPECT_TRUE(is_rotation(a.rotation, 1e-9));
  EXPECT_TRUE(is_rotation(b.rotation, 1e-9));
  EXPECT_NEAR(a.rotation(0, 2), -b.rotation(0, 2), 1e-12);
  EXPECT_NEAR(a.rotation(0, 0), b.rotation(0, 0), 1e-12);
}
