#pragma once

#include <cstdint>
#include <vector>

#include "poselift/rng.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

struct SynthConfig {
  uint64_t seed = 0;
  // Per-bone (min,max) length in mm, indexed by child joint; root entry unused.
  std::vector<std::pair<double, double>> bone_length_ranges;
  // Per-joint max swing from the canonical bone direction, radians.
  std::vector<double> joint_angle_ranges;
  std::pair<double, double> root_depth_range = {2000.0, 6000.0};
  // Pelvis offset from the optical axis, mm.
  std::pair<double, double> root_x_range = {-300.0, 300.0};
  std::pair<double, double> root_y_range = {-150.0, 250.0};
  CameraIntrinsics intrinsics = {1150.0, 1150.0, 512.0, 512.0};
  double crop_size = 256.0;
  double dx = 500.0;  // stereo baseline shift along x, mm
  int retry_budget = 100;

  void validate() const;
};

// Defaults for the 16-joint schema: standing pose, mirrored limb ranges equal.
SynthConfig default_synth_config(uint64_t seed);

// The canonical standing pose the sampler perturbs, root-relative, mm.
const Pose3D& canonical_rest_pose();

struct TrainingPair {
  Pose2D left2d;               // crop coordinates
  Pose2D right2d;              // crop coordinates
  Pose3D pose3d;               // root-relative, mm
  Pose3D pose3d_abs;           // absolute camera coordinates, mm
  CameraIntrinsics intrinsics; // crop-adjusted
  CropTransform crop;          // source -> crop mapping actually used
};

// Kinematic-tree sample: bone lengths per config (mirrored pairs equal),
// directions perturbed inside per-joint cones, root placed in the configured
// box. Resamples until every source-frame projection lands on the sensor;
// GenerationExhausted after cfg.retry_budget attempts.
Pose3D sample_pose3(Rng& rng, const SynthConfig& cfg);

TrainingPair generate_pair(Rng& rng, const SynthConfig& cfg);

// Deterministic per-record generator: record i uses derive_seed(cfg.seed, i).
TrainingPair generate_pair_at(const SynthConfig& cfg, uint64_t index);

}  // namespace poselift
