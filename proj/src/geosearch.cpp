#include "poselift/geosearch.hpp"

#include <cmath>
#include <vector>

#include "poselift/kernels.hpp"

namespace poselift {

namespace {

struct Rays {
  std::vector<double> a, b;        // pixel rays (u-cx)/fx, (v-cy)/fy
  std::vector<double> alpha, beta; // rays centered on the root ray
  std::vector<double> r0, s0;      // residuals at dz = 0
  double denom = 0.0;              // sum of alpha^2 + beta^2
  double z_min = 0.0;              // most negative coarse depth
};

Rays build_rays(const Pose3D& coarse, const Pose2D& gt2d, const CameraIntrinsics& k,
                const JointSchema& schema) {
  if (coarse.frame != Frame::RootRelative)
    throw FrameMismatch("refine: coarse pose must be root-relative");
  const int n = schema.size();
  if (coarse.size() != n || gt2d.size() != n)
    throw SchemaMismatch("refine: pose joint counts do not match schema " + schema.name);

  Rays rays;
  rays.a.resize(n);
  rays.b.resize(n);
  rays.alpha.resize(n);
  rays.beta.resize(n);
  rays.r0.resize(n);
  rays.s0.resize(n);
  for (int i = 0; i < n; ++i) {
    rays.a[i] = (gt2d.joints[i].u - k.cx) / k.fx;
    rays.b[i] = (gt2d.joints[i].v - k.cy) / k.fy;
  }
  const double a_root = rays.a[schema.root_index];
  const double b_root = rays.b[schema.root_index];
  rays.z_min = coarse.joints[0].z;
  for (int i = 0; i < n; ++i) {
    const Point3& c = coarse.joints[i];
    rays.alpha[i] = rays.a[i] - a_root;
    rays.beta[i] = rays.b[i] - b_root;
    rays.r0[i] = rays.a[i] * c.z - c.x;
    rays.s0[i] = rays.b[i] * c.z - c.y;
    rays.denom += rays.alpha[i] * rays.alpha[i] + rays.beta[i] * rays.beta[i];
    rays.z_min = std::min(rays.z_min, c.z);
  }
  if (rays.denom == 0.0)
    throw DegenerateProjection(
        "refine: all ground-truth rays parallel the root ray; depth is unobservable");
  return rays;
}

double loss_at(const Rays& rays, double t) {
  double acc = 0.0;
  for (size_t i = 0; i < rays.alpha.size(); ++i) {
    const double e1 = rays.r0[i] + rays.alpha[i] * t;
    const double e2 = rays.s0[i] + rays.beta[i] * t;
    acc += e1 * e1 + e2 * e2;
  }
  return acc;
}

double unconstrained_minimizer(const Rays& rays) {
  double num = 0.0;
  for (size_t i = 0; i < rays.alpha.size(); ++i)
    num += rays.alpha[i] * rays.r0[i] + rays.beta[i] * rays.s0[i];
  return -num / rays.denom;
}

RefinedPose finish(const Rays& rays, const Pose3D& coarse, double dz, double residual,
                   const JointSchema& schema) {
  RefinedPose out;
  out.delta_z = dz;
  out.residual = residual;
  out.pose_abs.frame = Frame::Absolute;
  out.pose_abs.joints.resize(coarse.joints.size());
  for (size_t i = 0; i < coarse.joints.size(); ++i) {
    const double z = coarse.joints[i].z + dz;
    out.pose_abs.joints[i] = {rays.a[i] * z, rays.b[i] * z, z};
  }
  out.pose_rel = root_align(out.pose_abs, schema);
  return out;
}

}  // namespace

RefinedPose refine(const Pose3D& coarse, const Pose2D& gt2d, const CameraIntrinsics& k,
                   const SearchConfig& cfg, const JointSchema& schema) {
  if (!(cfg.step_mm > 0.0) || !(cfg.z_max_mm > cfg.step_mm))
    throw ShapeMismatch("refine: need step_mm > 0 and z_max_mm > step_mm");
  const Rays rays = build_rays(coarse, gt2d, k, schema);

  if (cfg.mode == SearchConfig::Mode::ClosedForm) {
    double dz = std::min(std::max(unconstrained_minimizer(rays), 0.0), cfg.z_max_mm);
    if (!(rays.z_min + dz > 0.0))
      throw NoValidDepth("refine: closed-form depth leaves a joint behind the camera");
    return finish(rays, coarse, dz, loss_at(rays, dz), schema);
  }

  const int count = static_cast<int>(std::floor(cfg.z_max_mm / cfg.step_mm)) + 1;
  // Candidates must keep every joint depth positive: dz > -z_min. That is a
  // suffix of the grid, so locate its first index and scan from there.
  int j_min = 0;
  if (!(rays.z_min > 0.0)) {
    j_min = static_cast<int>(std::floor(-rays.z_min / cfg.step_mm)) + 1;
    while (j_min > 0 && (j_min - 1) * cfg.step_mm > -rays.z_min) --j_min;
    while (j_min * cfg.step_mm <= -rays.z_min) ++j_min;
  }
  if (j_min >= count)
    throw NoValidDepth("refine: every scanned depth leaves a joint behind the camera");

  const double t0 = cfg.step_mm * j_min;
  const int scan_count = count - j_min;
  std::vector<double> losses(scan_count);
  const int n = schema.size();
  const kernels::ScanResult best = kernels::scan_quadratic_argmin(
      rays.alpha.data(), rays.beta.data(), rays.r0.data(), rays.s0.data(), n, t0, cfg.step_mm,
      scan_count, losses.data(), 1e-12);
  const double dz = t0 + cfg.step_mm * best.index;
  return finish(rays, coarse, dz, best.loss, schema);
}

double closed_form_delta_z(const Pose3D& coarse, const Pose2D& gt2d, const CameraIntrinsics& k,
                           const JointSchema& schema) {
  const Rays rays = build_rays(coarse, gt2d, k, schema);
  return std::max(unconstrained_minimizer(rays), 0.0);
}

double reprojection_error(const Pose3D& pose_abs, const Pose2D& gt2d, const CameraIntrinsics& k) {
  if (pose_abs.size() != gt2d.size())
    throw SchemaMismatch("reprojection_error: joint count mismatch");
  double worst = 0.0;
  for (int i = 0; i < pose_abs.size(); ++i) {
    const Pixel2 px = project(pose_abs.joints[i], k);
    worst = std::max(worst, std::hypot(px.u - gt2d.joints[i].u, px.v - gt2d.joints[i].v));
  }
  return worst;
}

}  // namespace poselift
