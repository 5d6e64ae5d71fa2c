#pragma once

#include <vector>

#include "poselift/neuralnet.hpp"
#include "poselift/synthgen.hpp"

namespace poselift {

// Both lifting subnetworks are plain MlpModels; these wrappers pin the input
// layout: 2D poses normalized to [-1,1] in crop coordinates (u0,v0,u1,v1,...),
// 3D targets root-relative and divided by kLift3dScaleMm.
inline constexpr double kLiftCropSize = 256.0;
inline constexpr double kLift3dScaleMm = 1000.0;

struct LiftingHyper {
  int hidden_dim = 1024;
  int n_residual_blocks = 2;
  double dropout_rate = 0.5;
  double max_norm = 1.0;
  uint64_t init_seed = 0;
};

// Deterministic train/holdout split by record index: FNV-1a of (salt, index)
// mapped to [0,1), indices below `fraction` train.
struct IndexSplit {
  std::vector<size_t> train;
  std::vector<size_t> holdout;
};
IndexSplit split_by_index_hash(size_t count, double fraction = 0.9, uint64_t salt = 0);

// Left 2D -> right 2D regression (2N -> 2N), MSE on normalized coordinates.
MlpModel train_view_synthesis(const std::vector<TrainingPair>& pairs,
                              const std::vector<size_t>& train_idx, const JointSchema& schema,
                              const LiftingHyper& hyper, const TrainConfig& tc,
                              std::vector<double>* history = nullptr);

// Eval-mode forward on one normalized left pose.
Pose2D predict_right(const MlpModel& vm, const Pose2D& left_norm, const JointSchema& schema);

enum class ReconMode {
  TeacherForced,    // right input from ground truth
  SelfSynthesized,  // right input from the frozen view-synthesis network
  Monocular,        // left input only (ablation), 2N -> 3N
};

// Stereo (or monocular) 2D -> root-relative 3D (4N -> 3N / 2N -> 3N). The
// view model is only read, never trained.
MlpModel train_reconstruction(const std::vector<TrainingPair>& pairs,
                              const std::vector<size_t>& train_idx, const MlpModel* view_model,
                              const JointSchema& schema, const LiftingHyper& hyper,
                              const TrainConfig& tc, ReconMode mode,
                              std::vector<double>* history = nullptr);

// Full coarse prediction from crop-coordinate left 2D: normalize, synthesize
// the right view (skipped for monocular recon models), reconstruct,
// denormalize, and force the root to exactly zero.
Pose3D predict_coarse(const MlpModel& vm, const MlpModel& rm, const Pose2D& left_crop,
                      const JointSchema& schema);

// Mean held-out PCKh@0.5 of predicted right views against ground truth.
double eval_view_synthesis_pckh(const MlpModel& vm, const std::vector<TrainingPair>& pairs,
                                const std::vector<size_t>& idx, const JointSchema& schema);

// Mean held-out MPJPE (mm) of coarse predictions against ground-truth 3D.
double eval_recon_mpjpe(const MlpModel& vm, const MlpModel& rm,
                        const std::vector<TrainingPair>& pairs, const std::vector<size_t>& idx,
                        const JointSchema& schema);

}  // namespace poselift
