#pragma once

#include <string>
#include <vector>

#include "poselift/neuralnet.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

inline constexpr int kActionFrames = 25;
inline constexpr int kActionClasses = 5;

// A fixed-length motion clip: kActionFrames root-relative poses plus a class
// label (0 = wave, 1 = kick, 2 = stretch, 3 = punch, 4 = bow).
struct ActionSequence {
  std::vector<Pose3D> frames;
  int label = 0;
};

// MLP over flattened sequences: input 25*N*3 (meters), hiddens 512/256,
// softmax over n_classes outputs.
struct ActionModel {
  MlpModel mlp;
  int n_classes = 0;
  int n_frames = 0;
  int n_joints = 0;
};

const std::vector<std::string>& action_class_names();

// Deterministic synthetic motions: per class a sinusoidal trajectory on a
// class-specific joint subset, layered over the rest pose with per-sequence
// amplitude/phase variation and 8 mm coordinate noise. The punch and bow
// classes move along z only, so zeroing depth makes them indistinguishable.
std::vector<ActionSequence> gen_motion_dataset(uint64_t seed, size_t n_per_class);

// Returns a copy with every z coordinate forced to zero.
std::vector<ActionSequence> ablate_depth(const std::vector<ActionSequence>& seqs);

// Softmax cross-entropy training on flattened sequences. Requires at least
// two distinct labels (SingleClass) and consistent shapes (ShapeMismatch).
ActionModel train_action(const std::vector<ActionSequence>& seqs, const TrainConfig& tc);

// Rebuilds the wrapper metadata from a bare MLP (dims must factor as
// kActionFrames * N * 3 -> C).
ActionModel action_model_from_mlp(MlpModel mlp);

// Deterministic Eval forward; probabilities sum to 1 within 1e-9.
std::vector<double> classify(const ActionModel& m, const ActionSequence& seq);

// Fraction of sequences whose argmax class matches the label.
double action_accuracy(const ActionModel& m, const std::vector<ActionSequence>& seqs);

// JSONL storage: a header line with frame/joint counts, then one sequence
// per line.
void save_sequences(const std::string& path, const std::vector<ActionSequence>& seqs);
std::vector<ActionSequence> load_sequences(const std::string& path);

TrainConfig default_action_train_config(uint64_t seed);

}  // namespace poselift
