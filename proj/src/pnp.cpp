#include "gazeaug/pnp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gazeaug {

namespace {

constexpr int kMaxIterations = 100;
constexpr double kInitialLambda = 1e-3;
constexpr double kMaxLambda = 1e16;
constexpr double kRelativeDecrease = 1e-10;
constexpr double kMinStep = 1e-10;

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

// Residuals and Jacobian in one pass. Throws BehindCameraError.
void linearize(const RigidTransform& pose, const PnPProblem& problem, Eigen::VectorXd& r,
               Eigen::MatrixXd* jac) {
  const auto n = problem.model_points.size();
  const auto& k = problem.intrinsics;
  r.resize(2 * static_cast<Eigen::Index>(n));
  if (jac) jac->resize(r.size(), 6);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 rx = pose.rotation * problem.model_points[i];
    const Vec3 p = rx + pose.translation;
    if (!(p.z() > 0.0)) throw BehindCameraError(i);
    const double iz = 1.0 / p.z();
    const auto row = 2 * static_cast<Eigen::Index>(i);
    r(row) = k.fx * p.x() * iz + k.cx - problem.image_points[i].x();
    r(row + 1) = k.fy * p.y() * iz + k.cy - problem.image_points[i].y();
    if (!jac) continue;
    Eigen::Matrix<double, 2, 3> dproj;
    dproj << k.fx * iz, 0, -k.fx * p.x() * iz * iz,
             0, k.fy * iz, -k.fy * p.y() * iz * iz;
    // d(exp(w) R X)/dw at w = 0 is -[R X]x
    jac->block<2, 3>(row, 0) = -dproj * skew(rx);
    jac->block<2, 3>(row, 3) = dproj;
  }
}

double cost_or_inf(const RigidTransform& pose, const PnPProblem& problem) {
  Eigen::VectorXd r;
  try {
    linearize(pose, problem, r, nullptr);
  } catch (const BehindCameraError&) {
    return std::numeric_limits<double>::infinity();
  }
  return r.squaredNorm();
}

double rms_from_cost(double cost, std::size_t n) { return std::sqrt(cost / static_cast<double>(n)); }

PnPSolution refine(const PnPProblem& problem, const RigidTransform& init) {
  PnPSolution sol;
  sol.pose = init;
  const std::size_t n = problem.model_points.size();

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  try {
    linearize(sol.pose, problem, r, &jac);
  } catch (const BehindCameraError&) {
    // starting point unusable; report it as-is
    sol.rms_residual = std::numeric_limits<double>::infinity();
    return sol;
  }
  double cost = r.squaredNorm();
  double lambda = kInitialLambda;

  while (sol.iterations < kMaxIterations && !sol.converged) {
    ++sol.iterations;
    if (cost == 0.0) {
      sol.converged = true;
      break;
    }
    const Eigen::Matrix<double, 6, 6> h = jac.transpose() * jac;
    const Eigen::Matrix<double, 6, 1> g = jac.transpose() * r;
    const Eigen::Matrix<double, 6, 1> diag = h.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    bool solved_once = false;
    while (!accepted && lambda <= kMaxLambda) {
      Eigen::Matrix<double, 6, 6> damped = h;
      damped.diagonal() += lambda * diag;
      const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(damped);
      const Eigen::Matrix<double, 6, 1> step = -ldlt.solve(g);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      solved_once = true;
      RigidTransform cand;
      cand.rotation = rotation_from_axis_angle(step.head<3>()) * sol.pose.rotation;
      cand.translation = sol.pose.translation + step.tail<3>();
      const double cand_cost = cost_or_inf(cand, problem);
      if (cand_cost < cost) {
        const double decrease = (cost - cand_cost) / cost;
        sol.pose = cand;
        cost = cand_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        linearize(sol.pose, problem, r, &jac);
        if (decrease < kRelativeDecrease || step.norm() < kMinStep) sol.converged = true;
      } else {
        lambda *= 10.0;
        // the step has shrunk below resolution: no further descent possible
        if (step.norm() < kMinStep) {
          sol.converged = true;
          break;
        }
      }
    }
    if (!solved_once) throw DegeneratePnPError("PnP normal equations are singular at every damping level");
    if (!accepted && !sol.converged) {
      // damping saturated without progress; this is a stationary point
      sol.converged = true;
    }
  }
  sol.rms_residual = rms_from_cost(cost, n);
  return sol;
}

}  // namespace

BehindCameraError::BehindCameraError(std::size_t index)
    : std::domain_error("landmark " + std::to_string(index) + " projects from behind the camera"),
      index_(index) {}

void validate(const PnPProblem& problem) {
  const auto n = problem.model_points.size();
  if (n != problem.image_points.size())
    throw std::invalid_argument("PnP: model and image point counts differ (" + std::to_string(n) + " vs " +
                                std::to_string(problem.image_points.size()) + ")");
  if (n < 6) throw std::invalid_argument("PnP: at least 6 correspondences are required");
  validate(problem.intrinsics);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : problem.model_points) mean += p;
  mean /= static_cast<double>(n);
  Mat3 scatter = Mat3::Zero();
  for (const auto& p : problem.model_points) scatter += (p - mean) * (p - mean).transpose();
  const Eigen::JacobiSVD<Mat3> svd(scatter);
  const auto s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= 1e-12 * s(0)) throw std::invalid_argument("PnP: model points are collinear");
}

std::vector<Vec2> reprojection_residuals(const RigidTransform& pose, const PnPProblem& problem) {
  Eigen::VectorXd r;
  linearize(pose, problem, r, nullptr);
  std::vector<Vec2> out(problem.model_points.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.segment<2>(2 * static_cast<Eigen::Index>(i));
  return out;
}

double reprojection_cost(const RigidTransform& pose, const PnPProblem& problem) {
  Eigen::VectorXd r;
  linearize(pose, problem, r, nullptr);
  return r.squaredNorm();
}

Eigen::MatrixXd residual_jacobian(const RigidTransform& pose, const PnPProblem& problem) {
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  linearize(pose, problem, r, &jac);
  return jac;
}

RigidTransform weak_perspective_pose(const PnPProblem& problem, bool mirrored) {
  const auto n = static_cast<Eigen::Index>(problem.model_points.size());
  const auto& k = problem.intrinsics;
  Eigen::Matrix3Xd model(3, n);
  Eigen::Matrix2Xd image(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    model.col(i) = problem.model_points[static_cast<std::size_t>(i)];
    const auto& px = problem.image_points[static_cast<std::size_t>(i)];
    image.col(i) << (px.x() - k.cx) / k.fx, (px.y() - k.cy) / k.fy;
  }
  const Vec3 model_mean = model.rowwise().mean();
  const Vec2 image_mean = image.rowwise().mean();
  model.colwise() -= model_mean;
  image.colwise() -= image_mean;

  // affine camera A (2x3) minimizing |A X - x|, via pseudo-inverse for flat models
  const Mat3 scatter = model * model.transpose();
  const Eigen::Matrix<double, 2, 3> cross = image * model.transpose();
  const Eigen::Matrix<double, 2, 3> affine =
      scatter.completeOrthogonalDecomposition().solve(cross.transpose()).transpose();

  const Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> svd(affine, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix<double, 2, 3> rows = svd.matrixU() * svd.matrixV().leftCols<2>().transpose();
  const double scale = 0.5 * (svd.singularValues()(0) + svd.singularValues()(1));
  if (mirrored) rows.col(2) = -rows.col(2);

  RigidTransform pose;
  pose.rotation.row(0) = rows.row(0);
  pose.rotation.row(1) = rows.row(1);
  pose.rotation.row(2) = rows.row(0).cross(rows.row(1));

  const double depth = scale > 0.0 ? 1.0 / scale : 1.0;
  const Vec3 centroid = pose.rotation * model_mean;
  pose.translation << image_mean.x() * depth - centroid.x(), image_mean.y() * depth - centroid.y(),
      depth - centroid.z();
  return pose;
}

PnPSolution solve_pnp(const PnPProblem& problem, std::optional<RigidTransform> init) {
  validate(problem);
  if (init) return refine(problem, *init);
  PnPSolution best = refine(problem, weak_perspective_pose(problem, false));
  PnPSolution twin = refine(problem, weak_perspective_pose(problem, true));
  if (twin.rms_residual < best.rms_residual) best = twin;
  return best;
}

}  // namespace gazeaug
