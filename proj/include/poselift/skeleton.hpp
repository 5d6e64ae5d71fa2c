#pragma once

#include <string>
#include <utility>
#include <vector>

#include "poselift/geometry.hpp"

namespace poselift {

struct JointSchema {
  std::string name;
  std::vector<std::string> joint_names;
  std::vector<int> parent;  // root's parent is itself
  int root_index = 0;
  int head_top_index = 0;
  int neck_index = 0;
  std::vector<std::pair<int, int>> left_right_pairs;

  int size() const { return static_cast<int>(joint_names.size()); }
  // Throws SchemaMismatch unless parents form a tree rooted at root_index.
  void validate() const;
};

// 16-joint skeleton: pelvis root, spine/neck/head column, arms, legs.
const JointSchema& h36m16();

enum class Frame { Absolute, RootRelative };

struct Pose2D {
  std::vector<Pixel2> joints;

  int size() const { return static_cast<int>(joints.size()); }
};

struct Pose3D {
  std::vector<Point3> joints;
  Frame frame = Frame::Absolute;

  int size() const { return static_cast<int>(joints.size()); }
};

// Translate so the root joint sits exactly at the origin. Idempotent.
Pose3D root_align(const Pose3D& p, const JointSchema& s);

// Euclidean child->parent edge lengths, root excluded, in joint-index order.
std::vector<double> bone_lengths(const Pose3D& p, const JointSchema& s);

// c -> 2c/crop_size - 1 per coordinate, and the exact inverse.
Pose2D normalize2d(const Pose2D& p, double crop_size);
Pose2D denormalize2d(const Pose2D& p, double crop_size);

// Divide a root-relative pose by scale_mm; FrameMismatch for absolute input.
Pose3D normalize3d(const Pose3D& p, double scale_mm);
Pose3D denormalize3d(const Pose3D& p, double scale_mm);

// Per-joint pinhole projection; NonPositiveDepth if any joint z <= 0.
Pose2D project_pose(const Pose3D& p, const CameraIntrinsics& k);

struct BBox {
  double u0 = 0.0, v0 = 0.0, u1 = 0.0, v1 = 0.0;

  double width() const { return u1 - u0; }
  double height() const { return v1 - v0; }
};

BBox bbox_of(const Pose2D& p);

// Square crop of side 1.2*max(bbox extent) centered on the bbox, resized to
// crop_size x crop_size. Returns the mapped pose and the transform used.
// Throws EmptyBBox unless the bbox has positive area.
std::pair<Pose2D, CropTransform> crop_pose_2d(const Pose2D& pose, const BBox& bbox,
                                              double crop_size = 256.0);

// Right-view ground truth: project each joint shifted by +dx along x.
// u_R = u_L + fx*dx/z, v_R = v_L.
Pose2D synthesize_right_view(const Pose3D& pose_abs, const CameraIntrinsics& k, double dx);

}  // namespace poselift
