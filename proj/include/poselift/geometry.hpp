#pragma once

#include "poselift/errors.hpp"

namespace poselift {

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Pixel2 {
  double u = 0.0;
  double v = 0.0;
};

// Origin of a square crop window in source-frame pixels plus the scale that
// resizes it to the 256x256 working resolution.
struct CropTransform {
  double x0 = 0.0;
  double y0 = 0.0;
  double s = 1.0;
};

// u = fx*x/z + cx, v = fy*y/z + cy. Throws NonPositiveDepth for z <= 0.
Pixel2 project(const Point3& p, const CameraIntrinsics& k);

// Inverse of project at a known depth z > 0.
Point3 back_project(const Pixel2& px, double z, const CameraIntrinsics& k);

// Intrinsics valid in crop coordinates: fx' = fx*s, cx' = (cx - x0)*s, etc.
// Projecting with the result equals projecting with k then crop_apply.
CameraIntrinsics adjust_intrinsics_for_crop(const CameraIntrinsics& k, const CropTransform& crop);

Pixel2 crop_apply(const CropTransform& crop, const Pixel2& px);
Pixel2 crop_invert(const CropTransform& crop, const Pixel2& px);

inline double disparity(double fx, double dx, double z) { return fx * dx / z; }

}  // namespace poselift
