#include "poselift/skeleton.hpp"

#include <algorithm>
#include <cmath>

namespace poselift {

void JointSchema::validate() const {
  const int n = size();
  if (n < 2) throw SchemaMismatch("schema " + name + ": needs at least 2 joints");
  if (static_cast<int>(parent.size()) != n)
    throw SchemaMismatch("schema " + name + ": parent table size mismatch");
  if (root_index < 0 || root_index >= n || parent[root_index] != root_index)
    throw SchemaMismatch("schema " + name + ": root must be its own parent");
  if (head_top_index == neck_index)
    throw SchemaMismatch("schema " + name + ": head_top and neck must differ");
  for (int j = 0; j < n; ++j) {
    // Walk to the root; a walk longer than n joints means a cycle.
    int cur = j;
    for (int steps = 0; cur != root_index; ++steps) {
      if (steps > n || parent[cur] < 0 || parent[cur] >= n)
        throw SchemaMismatch("schema " + name + ": joint " + std::to_string(j) +
                             " not connected to root");
      cur = parent[cur];
    }
  }
  for (const auto& [l, r] : left_right_pairs)
    if (l < 0 || l >= n || r < 0 || r >= n || l == r)
      throw SchemaMismatch("schema " + name + ": bad mirror pair");
}

const JointSchema& h36m16() {
  static const JointSchema schema = [] {
    JointSchema s;
    s.name = "h36m16";
    s.joint_names = {"pelvis",     "spine",   "neck",    "head_top", "l_shoulder", "l_elbow",
                     "l_wrist",    "r_shoulder", "r_elbow", "r_wrist", "l_hip",      "l_knee",
                     "l_ankle",    "r_hip",   "r_knee",  "r_ankle"};
    s.parent = {0, 0, 1, 2, 2, 4, 5, 2, 7, 8, 0, 10, 11, 0, 13, 14};
    s.root_index = 0;
    s.head_top_index = 3;
    s.neck_index = 2;
    s.left_right_pairs = {{4, 7}, {5, 8}, {6, 9}, {10, 13}, {11, 14}, {12, 15}};
    s.validate();
    return s;
  }();
  return schema;
}

Pose3D root_align(const Pose3D& p, const JointSchema& s) {
  if (p.size() != s.size())
    throw SchemaMismatch("root_align: pose has " + std::to_string(p.size()) + " joints, schema " +
                         s.name + " has " + std::to_string(s.size()));
  const Point3 root = p.joints[s.root_index];
  Pose3D out;
  out.frame = Frame::RootRelative;
  out.joints.reserve(p.joints.size());
  for (const Point3& j : p.joints) out.joints.push_back({j.x - root.x, j.y - root.y, j.z - root.z});
  out.joints[s.root_index] = {0.0, 0.0, 0.0};
  return out;
}

std::vector<double> bone_lengths(const Pose3D& p, const JointSchema& s) {
  if (p.size() != s.size()) throw SchemaMismatch("bone_lengths: joint count mismatch");
  std::vector<double> lengths;
  lengths.reserve(p.joints.size() - 1);
  for (int j = 0; j < p.size(); ++j) {
    if (j == s.root_index) continue;
    const Point3& a = p.joints[j];
    const Point3& b = p.joints[s.parent[j]];
    lengths.push_back(std::hypot(a.x - b.x, a.y - b.y, a.z - b.z));
  }
  return lengths;
}

Pose2D normalize2d(const Pose2D& p, double crop_size) {
  Pose2D out;
  out.joints.reserve(p.joints.size());
  for (const Pixel2& j : p.joints)
    out.joints.push_back({2.0 * j.u / crop_size - 1.0, 2.0 * j.v / crop_size - 1.0});
  return out;
}

Pose2D denormalize2d(const Pose2D& p, double crop_size) {
  Pose2D out;
  out.joints.reserve(p.joints.size());
  for (const Pixel2& j : p.joints)
    out.joints.push_back({(j.u + 1.0) * crop_size / 2.0, (j.v + 1.0) * crop_size / 2.0});
  return out;
}

Pose3D normalize3d(const Pose3D& p, double scale_mm) {
  if (p.frame != Frame::RootRelative)
    throw FrameMismatch("normalize3d: pose must be root-relative");
  Pose3D out;
  out.frame = Frame::RootRelative;
  out.joints.reserve(p.joints.size());
  for (const Point3& j : p.joints)
    out.joints.push_back({j.x / scale_mm, j.y / scale_mm, j.z / scale_mm});
  return out;
}

Pose3D denormalize3d(const Pose3D& p, double scale_mm) {
  if (p.frame != Frame::RootRelative)
    throw FrameMismatch("denormalize3d: pose must be root-relative");
  Pose3D out;
  out.frame = Frame::RootRelative;
  out.joints.reserve(p.joints.size());
  for (const Point3& j : p.joints)
    out.joints.push_back({j.x * scale_mm, j.y * scale_mm, j.z * scale_mm});
  return out;
}

Pose2D project_pose(const Pose3D& p, const CameraIntrinsics& k) {
  Pose2D out;
  out.joints.reserve(p.joints.size());
  for (const Point3& j : p.joints) out.joints.push_back(project(j, k));
  return out;
}

Pose2D synthesize_right_view(const Pose3D& pose_abs, const CameraIntrinsics& k, double dx) {
  Pose2D out;
  out.joints.reserve(pose_abs.joints.size());
  for (const Point3& j : pose_abs.joints) out.joints.push_back(project({j.x + dx, j.y, j.z}, k));
  return out;
}

BBox bbox_of(const Pose2D& p) {
  if (p.joints.empty()) throw EmptyBBox("bbox_of: empty pose");
  BBox b{p.joints[0].u, p.joints[0].v, p.joints[0].u, p.joints[0].v};
  for (const Pixel2& j : p.joints) {
    b.u0 = std::min(b.u0, j.u);
    b.v0 = std::min(b.v0, j.v);
    b.u1 = std::max(b.u1, j.u);
    b.v1 = std::max(b.v1, j.v);
  }
  return b;
}

std::pair<Pose2D, CropTransform> crop_pose_2d(const Pose2D& pose, const BBox& bbox,
                                              double crop_size) {
  if (!(bbox.width() > 0.0) || !(bbox.height() > 0.0))
    throw EmptyBBox("crop_pose_2d: bbox must have positive area");
  const double side = 1.2 * std::max(bbox.width(), bbox.height());
  const double cu = (bbox.u0 + bbox.u1) / 2.0;
  const double cv = (bbox.v0 + bbox.v1) / 2.0;
  CropTransform crop{cu - side / 2.0, cv - side / 2.0, crop_size / side};
  Pose2D out;
  out.joints.reserve(pose.joints.size());
  for (const Pixel2& j : pose.joints) out.joints.push_back(crop_apply(crop, j));
  return {out, crop};
}

}  // namespace poselift
