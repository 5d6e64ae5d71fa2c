#include "poselift/geometry.hpp"

namespace poselift {

Pixel2 project(const Point3& p, const CameraIntrinsics& k) {
  if (!(p.z > 0.0)) throw NonPositiveDepth("project: z = " + std::to_string(p.z));
  return {k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

Point3 back_project(const Pixel2& px, double z, const CameraIntrinsics& k) {
  if (!(z > 0.0)) throw NonPositiveDepth("back_project: z = " + std::to_string(z));
  return {(px.u - k.cx) * z / k.fx, (px.v - k.cy) * z / k.fy, z};
}

CameraIntrinsics adjust_intrinsics_for_crop(const CameraIntrinsics& k, const CropTransform& crop) {
  if (!(crop.s > 0.0)) throw InvalidCrop("crop scale = " + std::to_string(crop.s));
  return {k.fx * crop.s, k.fy * crop.s, (k.cx - crop.x0) * crop.s, (k.cy - crop.y0) * crop.s};
}

Pixel2 crop_apply(const CropTransform& crop, const Pixel2& px) {
  if (!(crop.s > 0.0)) throw InvalidCrop("crop scale = " + std::to_string(crop.s));
  return {(px.u - crop.x0) * crop.s, (px.v - crop.y0) * crop.s};
}

Pixel2 crop_invert(const CropTransform& crop, const Pixel2& px) {
  if (!(crop.s > 0.0)) throw InvalidCrop("crop scale = " + std::to_string(crop.s));
  return {px.u / crop.s + crop.x0, px.v / crop.s + crop.y0};
}

}  // namespace poselift
