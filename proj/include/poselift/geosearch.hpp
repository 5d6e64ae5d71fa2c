#pragma once

#include "poselift/skeleton.hpp"

namespace poselift {

struct SearchConfig {
  double step_mm = 1.0;
  double z_max_mm = 10000.0;
  enum class Mode { Scan, ClosedForm } mode = Mode::Scan;
};

struct RefinedPose {
  Pose3D pose_abs;   // back-projected ground-truth rays at the chosen depth
  Pose3D pose_rel;   // root_align(pose_abs)
  double delta_z = 0.0;
  double residual = 0.0;  // loss value at delta_z, mm^2
};

// Recovers a global depth offset dz for the coarse root-relative pose so the
// absolute pose lies on the ground-truth pixel rays: joint i sits at
// (a_i*(z_i+dz), b_i*(z_i+dz), z_i+dz) with a_i=(u_i-cx)/fx, b_i=(v_i-cy)/fy.
// dz minimizes the disagreement between that pose, re-aligned to its root,
// and the coarse pose; with an exact coarse pose the loss vanishes at the
// true root depth, so the minimization recovers the generator's absolute
// pose. Scan mode sweeps dz in {0, step, ...} up to z_max (ties within 1e-12
// resolve to the smallest dz); ClosedForm solves the quadratic directly and
// clamps into [0, z_max].
// Errors: DegenerateProjection when every ray parallels the root ray (the
// loss no longer depends on dz); NoValidDepth when no candidate keeps all
// joint depths positive.
RefinedPose refine(const Pose3D& coarse, const Pose2D& gt2d, const CameraIntrinsics& k,
                   const SearchConfig& cfg, const JointSchema& schema);

// Unconstrained minimizer of the same quadratic, clamped to dz >= 0.
double closed_form_delta_z(const Pose3D& coarse, const Pose2D& gt2d, const CameraIntrinsics& k,
                           const JointSchema& schema);

// Max over joints of the pixel distance between project(joint) and gt2d.
double reprojection_error(const Pose3D& pose_abs, const Pose2D& gt2d, const CameraIntrinsics& k);

}  // namespace poselift
