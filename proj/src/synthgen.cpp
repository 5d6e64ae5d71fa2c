#include "poselift/synthgen.hpp"

#include <cmath>

namespace poselift {

namespace {

struct BoneSpec {
  double dx, dy, dz;      // canonical direction, y points down in camera frame
  double len, lo, hi;     // default length and sampling range, mm
  double cone;            // default max swing, radians
};

// Indexed by child joint of the h36m16 schema; the root entry is unused.
const BoneSpec kBones[16] = {
    {0, 0, 0, 0, 0, 0, 0},                       // pelvis (root)
    {0.0, -1.0, 0.0, 250, 225, 275, 0.15},       // spine
    {0.0, -1.0, 0.0, 250, 225, 275, 0.15},       // neck
    {0.0, -1.0, 0.0, 180, 160, 200, 0.20},       // head_top
    {1.0, -0.12, 0.0, 180, 160, 200, 0.20},      // l_shoulder
    {0.25, 1.0, 0.0, 280, 250, 310, 0.80},       // l_elbow
    {0.10, 1.0, 0.0, 250, 220, 280, 0.90},       // l_wrist
    {-1.0, -0.12, 0.0, 180, 160, 200, 0.20},     // r_shoulder
    {-0.25, 1.0, 0.0, 280, 250, 310, 0.80},      // r_elbow
    {-0.10, 1.0, 0.0, 250, 220, 280, 0.90},      // r_wrist
    {1.0, 0.12, 0.0, 130, 115, 145, 0.15},       // l_hip
    {0.0, 1.0, 0.08, 440, 400, 480, 0.45},       // l_knee
    {0.0, 1.0, -0.08, 440, 400, 480, 0.45},      // l_ankle
    {-1.0, 0.12, 0.0, 130, 115, 145, 0.15},      // r_hip
    {0.0, 1.0, 0.08, 440, 400, 480, 0.45},       // r_knee
    {0.0, 1.0, -0.08, 440, 400, 480, 0.45},      // r_ankle
};

Point3 normalized(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  return {x / n, y / n, z / n};
}

// Rodrigues rotation of v around unit axis k by angle.
Point3 rotate(const Point3& v, const Point3& k, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double dot = k.x * v.x + k.y * v.y + k.z * v.z;
  const Point3 cross{k.y * v.z - k.z * v.y, k.z * v.x - k.x * v.z, k.x * v.y - k.y * v.x};
  return {v.x * c + cross.x * s + k.x * dot * (1.0 - c),
          v.y * c + cross.y * s + k.y * dot * (1.0 - c),
          v.z * c + cross.z * s + k.z * dot * (1.0 - c)};
}

Point3 random_axis(Rng& rng) {
  for (;;) {
    const double x = rng.normal();
    const double y = rng.normal();
    const double z = rng.normal();
    const double n = std::sqrt(x * x + y * y + z * z);
    if (n > 1e-6) return {x / n, y / n, z / n};
  }
}

// The right member of a mirror pair reuses the left member's length.
int mirror_source(const JointSchema& s, int joint) {
  for (const auto& [l, r] : s.left_right_pairs)
    if (r == joint) return l;
  return -1;
}

}  // namespace

void SynthConfig::validate() const {
  const int n = h36m16().size();
  if (static_cast<int>(bone_length_ranges.size()) != n)
    throw SchemaMismatch("synth config: bone_length_ranges must have one entry per joint");
  if (static_cast<int>(joint_angle_ranges.size()) != n)
    throw SchemaMismatch("synth config: joint_angle_ranges must have one entry per joint");
  for (int j = 0; j < n; ++j) {
    if (j == h36m16().root_index) continue;
    const auto& [lo, hi] = bone_length_ranges[j];
    if (!(lo > 0.0) || !(lo <= hi))
      throw SchemaMismatch("synth config: bad bone length range for joint " + std::to_string(j));
    if (joint_angle_ranges[j] < 0.0)
      throw SchemaMismatch("synth config: negative angle range for joint " + std::to_string(j));
  }
  if (!(root_depth_range.first > 0.0) || !(root_depth_range.first <= root_depth_range.second))
    throw SchemaMismatch("synth config: bad root depth range");
  if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0))
    throw SchemaMismatch("synth config: focal lengths must be positive");
  if (!(crop_size > 0.0)) throw SchemaMismatch("synth config: crop_size must be positive");
  if (retry_budget < 1) throw SchemaMismatch("synth config: retry budget must be >= 1");
}

SynthConfig default_synth_config(uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  const int n = h36m16().size();
  cfg.bone_length_ranges.resize(n);
  cfg.joint_angle_ranges.resize(n);
  for (int j = 0; j < n; ++j) {
    cfg.bone_length_ranges[j] = {kBones[j].lo, kBones[j].hi};
    cfg.joint_angle_ranges[j] = kBones[j].cone;
  }
  return cfg;
}

const Pose3D& canonical_rest_pose() {
  static const Pose3D pose = [] {
    const JointSchema& s = h36m16();
    Pose3D p;
    p.frame = Frame::RootRelative;
    p.joints.resize(s.size());
    p.joints[s.root_index] = {0.0, 0.0, 0.0};
    for (int j = 0; j < s.size(); ++j) {
      if (j == s.root_index) continue;
      const Point3 dir = normalized(kBones[j].dx, kBones[j].dy, kBones[j].dz);
      const Point3& base = p.joints[s.parent[j]];
      p.joints[j] = {base.x + dir.x * kBones[j].len, base.y + dir.y * kBones[j].len,
                     base.z + dir.z * kBones[j].len};
    }
    return p;
  }();
  return pose;
}

Pose3D sample_pose3(Rng& rng, const SynthConfig& cfg) {
  cfg.validate();
  const JointSchema& s = h36m16();
  const int n = s.size();
  for (int attempt = 0; attempt < cfg.retry_budget; ++attempt) {
    std::vector<double> lengths(n, 0.0);
    for (int j = 0; j < n; ++j) {
      if (j == s.root_index) continue;
      const int src = mirror_source(s, j);
      lengths[j] = src >= 0 ? lengths[src]
                            : rng.uniform(cfg.bone_length_ranges[j].first,
                                          cfg.bone_length_ranges[j].second);
    }

    Pose3D pose;
    pose.frame = Frame::Absolute;
    pose.joints.resize(n);
    const Point3 root{rng.uniform(cfg.root_x_range.first, cfg.root_x_range.second),
                      rng.uniform(cfg.root_y_range.first, cfg.root_y_range.second),
                      rng.uniform(cfg.root_depth_range.first, cfg.root_depth_range.second)};
    pose.joints[s.root_index] = root;
    for (int j = 0; j < n; ++j) {
      if (j == s.root_index) continue;
      const Point3 axis = random_axis(rng);
      const double angle = rng.uniform(0.0, cfg.joint_angle_ranges[j]);
      const Point3 dir = rotate(normalized(kBones[j].dx, kBones[j].dy, kBones[j].dz), axis, angle);
      const Point3& base = pose.joints[s.parent[j]];
      pose.joints[j] = {base.x + dir.x * lengths[j], base.y + dir.y * lengths[j],
                        base.z + dir.z * lengths[j]};
    }

    bool visible = true;
    for (const Point3& j : pose.joints) {
      if (!(j.z > 0.0)) {
        visible = false;
        break;
      }
      const Pixel2 px = project(j, cfg.intrinsics);
      if (px.u < 0.0 || px.u > 2.0 * cfg.intrinsics.cx || px.v < 0.0 ||
          px.v > 2.0 * cfg.intrinsics.cy) {
        visible = false;
        break;
      }
    }
    if (visible) return pose;
  }
  throw GenerationExhausted("sample_pose3: no visible pose in " +
                            std::to_string(cfg.retry_budget) + " attempts");
}

TrainingPair generate_pair(Rng& rng, const SynthConfig& cfg) {
  TrainingPair pair;
  pair.pose3d_abs = sample_pose3(rng, cfg);
  const Pose2D left_src = project_pose(pair.pose3d_abs, cfg.intrinsics);
  auto [left_crop, crop] = crop_pose_2d(left_src, bbox_of(left_src), cfg.crop_size);
  pair.left2d = std::move(left_crop);
  pair.crop = crop;
  pair.intrinsics = adjust_intrinsics_for_crop(cfg.intrinsics, crop);
  pair.right2d = synthesize_right_view(pair.pose3d_abs, pair.intrinsics, cfg.dx);
  pair.pose3d = root_align(pair.pose3d_abs, h36m16());
  return pair;
}

TrainingPair generate_pair_at(const SynthConfig& cfg, uint64_t index) {
  Rng rng(derive_seed(cfg.seed, index));
  return generate_pair(rng, cfg);
}

}  // namespace poselift
