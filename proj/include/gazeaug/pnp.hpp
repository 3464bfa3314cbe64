#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gazeaug/camera.hpp"
#include "gazeaug/geometry.hpp"

namespace gazeaug {

/// Model points (mm, canonical frame) paired with their observed,
/// already-undistorted pixel locations. The distortion coefficients in
/// `intrinsics` are ignored here; run undistort_points() first.
struct PnPProblem {
  std::vector<Vec3> model_points;
  std::vector<PixelPoint> image_points;
  CameraIntrinsics intrinsics;
};

struct PnPSolution {
  RigidTransform pose;
  double rms_residual = 0.0;  // px, over all landmarks
  int iterations = 0;
  bool converged = false;
};

/// A transformed model point lands at or behind the camera plane.
class BehindCameraError : public std::domain_error {
 public:
  BehindCameraError(std::size_t index);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// The normal equations stayed singular under every damping level.
class DegeneratePnPError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument if the sizes differ, fewer than 6 points are
/// given, or the model points are collinear.
void validate(const PnPProblem& problem);

/// Per-landmark (du, dv) = project(pose * X_i) - x_i.
std::vector<Vec2> reprojection_residuals(const RigidTransform& pose, const PnPProblem& problem);

/// Sum of squared residual components.
double reprojection_cost(const RigidTransform& pose, const PnPProblem& problem);

/// Jacobian of the stacked residuals (2N x 6) with respect to the local
/// increment (w, dt) applied as R <- exp(w) R, t <- t + dt.
Eigen::MatrixXd residual_jacobian(const RigidTransform& pose, const PnPProblem& problem);

/// Weak-perspective initial pose (affine camera fit, rows orthonormalized by
/// SVD). `mirrored` selects the depth-reversed twin of the same fit.
RigidTransform weak_perspective_pose(const PnPProblem& problem, bool mirrored = false);

/// Minimizes the reprojection error over SE(3) with Levenberg-Marquardt.
/// Without `init` both weak-perspective candidates are refined and the
/// lower-cost result is returned.
PnPSolution solve_pnp(const PnPProblem& problem, std::optional<RigidTransform> init = std::nullopt);

}  // namespace gazeaug
