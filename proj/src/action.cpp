#include "poselift/action.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "poselift/errors.hpp"
#include "poselift/rng.hpp"
#include "poselift/synthgen.hpp"

namespace poselift {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct MotionSpec {
  const char* name;
  std::vector<int> joints;  // h36m16 indices
  double amplitude_mm;
  double freq;      // cycles per clip
  double phase0;    // radians
  bool depth_only;  // move along z instead of the image plane
};

const std::vector<MotionSpec>& motion_specs() {
  static const std::vector<MotionSpec> specs = {
      {"wave", {5, 6, 8, 9}, 180.0, 2.0, 0.0, false},
      {"kick", {11, 12, 14, 15}, 160.0, 1.0, 1.5707963267948966, false},
      {"stretch", {3, 4, 7}, 120.0, 3.0, 0.0, false},
      {"punch", {5, 6, 8, 9}, 200.0, 2.0, 0.0, true},
      {"bow", {1, 2, 3, 4, 7}, 150.0, 1.0, 0.0, true},
  };
  return specs;
}

ActionSequence gen_sequence(uint64_t seed, size_t index, int label) {
  const JointSchema& schema = h36m16();
  const MotionSpec& spec = motion_specs()[label];
  Rng rng(derive_seed(seed, index));
  const double amp = spec.amplitude_mm * rng.uniform(0.85, 1.15);
  const double jitter = rng.uniform(0.0, 0.4);

  ActionSequence seq;
  seq.label = label;
  seq.frames.reserve(kActionFrames);
  for (int t = 0; t < kActionFrames; ++t) {
    Pose3D frame = canonical_rest_pose();
    for (size_t k = 0; k < spec.joints.size(); ++k) {
      const double theta =
          kTwoPi * spec.freq * t / kActionFrames + spec.phase0 + jitter + 0.3 * double(k);
      const double off = amp * std::sin(theta);
      Point3& j = frame.joints[spec.joints[k]];
      if (spec.depth_only) {
        j.z += off;
      } else {
        j.x += off;
        j.y += 0.5 * amp * std::cos(theta);
      }
    }
    // Root stays exactly zero so the pose keeps its root-relative invariant.
    for (int j = 0; j < schema.size(); ++j) {
      if (j == schema.root_index) continue;
      frame.joints[j].x += 8.0 * rng.normal();
      frame.joints[j].y += 8.0 * rng.normal();
      frame.joints[j].z += 8.0 * rng.normal();
    }
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

int joint_count(const std::vector<ActionSequence>& seqs) {
  const int n = seqs.front().frames.empty() ? 0 : seqs.front().frames.front().size();
  for (const ActionSequence& seq : seqs) {
    if (int(seq.frames.size()) != kActionFrames)
      throw ShapeMismatch("sequence must have exactly " + std::to_string(kActionFrames) +
                          " frames");
    for (const Pose3D& f : seq.frames)
      if (f.size() != n) throw ShapeMismatch("inconsistent joint count across frames");
  }
  if (n == 0) throw ShapeMismatch("sequences have no joints");
  return n;
}

void flatten_into(const ActionSequence& seq, double* row) {
  size_t i = 0;
  for (const Pose3D& f : seq.frames)
    for (const Point3& j : f.joints) {
      row[i++] = j.x / 1000.0;
      row[i++] = j.y / 1000.0;
      row[i++] = j.z / 1000.0;
    }
}

}  // namespace

const std::vector<std::string>& action_class_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const MotionSpec& spec : motion_specs()) v.emplace_back(spec.name);
    return v;
  }();
  return names;
}

std::vector<ActionSequence> gen_motion_dataset(uint64_t seed, size_t n_per_class) {
  if (n_per_class < 1) throw EmptyDataset("gen_motion_dataset: n_per_class must be >= 1");
  std::vector<ActionSequence> seqs;
  seqs.reserve(n_per_class * kActionClasses);
  for (int c = 0; c < kActionClasses; ++c)
    for (size_t i = 0; i < n_per_class; ++i)
      seqs.push_back(gen_sequence(seed, size_t(c) * n_per_class + i, c));
  return seqs;
}

std::vector<ActionSequence> ablate_depth(const std::vector<ActionSequence>& seqs) {
  std::vector<ActionSequence> out = seqs;
  for (ActionSequence& seq : out)
    for (Pose3D& f : seq.frames)
      for (Point3& j : f.joints) j.z = 0.0;
  return out;
}

ActionModel train_action(const std::vector<ActionSequence>& seqs, const TrainConfig& tc) {
  if (seqs.empty()) throw EmptyDataset("train_action: no sequences");
  std::set<int> labels;
  int max_label = 0;
  for (const ActionSequence& seq : seqs) {
    if (seq.label < 0) throw ShapeMismatch("negative class label");
    labels.insert(seq.label);
    max_label = std::max(max_label, seq.label);
  }
  if (labels.size() < 2) throw SingleClass("train_action: need at least two classes");

  const int n_joints = joint_count(seqs);
  const int n_classes = max_label + 1;
  const int input_dim = kActionFrames * n_joints * 3;

  Matrix x(int(seqs.size()), input_dim);
  Matrix y(int(seqs.size()), n_classes);
  for (size_t i = 0; i < seqs.size(); ++i) {
    flatten_into(seqs[i], x.row(int(i)));
    y.at(int(i), seqs[i].label) = 1.0;
  }

  ActionModel m;
  m.mlp = make_plain_mlp(input_dim, {512, 256}, n_classes, 0.3, 1.0, tc.seed);
  m.n_classes = n_classes;
  m.n_frames = kActionFrames;
  m.n_joints = n_joints;
  train(m.mlp, x, y, tc, Loss::SoftmaxCrossEntropy);
  return m;
}

ActionModel action_model_from_mlp(MlpModel mlp) {
  ActionModel m;
  if (mlp.input_dim % (kActionFrames * 3) != 0)
    throw ShapeMismatch("model input dim does not factor as frames*joints*3");
  m.n_frames = kActionFrames;
  m.n_joints = mlp.input_dim / (kActionFrames * 3);
  m.n_classes = mlp.output_dim;
  m.mlp = std::move(mlp);
  return m;
}

std::vector<double> classify(const ActionModel& m, const ActionSequence& seq) {
  if (int(seq.frames.size()) != m.n_frames)
    throw ShapeMismatch("classify: expected " + std::to_string(m.n_frames) + " frames, got " +
                        std::to_string(seq.frames.size()));
  for (const Pose3D& f : seq.frames)
    if (f.size() != m.n_joints) throw ShapeMismatch("classify: joint count mismatch");
  Matrix x(1, m.mlp.input_dim);
  flatten_into(seq, x.row(0));
  const Matrix probs = softmax_rows(forward_eval(m.mlp, x));
  return {probs.data.begin(), probs.data.end()};
}

double action_accuracy(const ActionModel& m, const std::vector<ActionSequence>& seqs) {
  if (seqs.empty()) throw EmptyDataset("action_accuracy: no sequences");
  Matrix x(int(seqs.size()), m.mlp.input_dim);
  for (size_t i = 0; i < seqs.size(); ++i) {
    if (int(seqs[i].frames.size()) != m.n_frames)
      throw ShapeMismatch("action_accuracy: sequence shape mismatch");
    for (const Pose3D& f : seqs[i].frames)
      if (f.size() != m.n_joints) throw ShapeMismatch("action_accuracy: joint count mismatch");
    flatten_into(seqs[i], x.row(int(i)));
  }
  const Matrix logits = forward_eval(m.mlp, x);
  size_t correct = 0;
  for (size_t i = 0; i < seqs.size(); ++i) {
    const double* row = logits.data.data() + i * size_t(logits.cols);
    const int arg = int(std::max_element(row, row + logits.cols) - row);
    if (arg == seqs[i].label) ++correct;
  }
  return double(correct) / double(seqs.size());
}

void save_sequences(const std::string& path, const std::vector<ActionSequence>& seqs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const int n_joints = seqs.empty() ? 0 : joint_count(seqs);
  nlohmann::json header{{"format_version", 1},
                        {"n_frames", kActionFrames},
                        {"n_joints", n_joints},
                        {"schema", h36m16().name}};
  out << header.dump() << "\n";
  for (const ActionSequence& seq : seqs) {
    nlohmann::json frames = nlohmann::json::array();
    for (const Pose3D& f : seq.frames) {
      nlohmann::json pts = nlohmann::json::array();
      for (const Point3& j : f.joints) pts.push_back({j.x, j.y, j.z});
      frames.push_back(std::move(pts));
    }
    out << nlohmann::json{{"frames", std::move(frames)}, {"label", seq.label}}.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ActionSequence> load_sequences(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  size_t line_no = 0;
  auto parse_line = [&]() {
    try {
      return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
  };

  if (!std::getline(in, line)) throw ParseError(1, "missing sequence header");
  ++line_no;
  const nlohmann::json header = parse_line();
  if (!header.contains("n_frames") || header["n_frames"].get<int>() != kActionFrames)
    throw ParseError(1, "header n_frames must be " + std::to_string(kActionFrames));
  const int n_joints = header.value("n_joints", 0);

  std::vector<ActionSequence> seqs;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const nlohmann::json j = parse_line();
    if (!j.contains("frames") || !j["frames"].is_array() ||
        int(j["frames"].size()) != kActionFrames)
      throw ParseError(line_no, "sequence must carry exactly " +
                                    std::to_string(kActionFrames) + " frames");
    ActionSequence seq;
    seq.label = j.value("label", 0);
    for (const auto& frame : j["frames"]) {
      if (!frame.is_array() || (n_joints > 0 && int(frame.size()) != n_joints))
        throw ParseError(line_no, "frame joint count mismatch");
      Pose3D p;
      p.frame = Frame::RootRelative;
      for (const auto& pt : frame) {
        if (!pt.is_array() || pt.size() != 3)
          throw ParseError(line_no, "joints must be [x,y,z]");
        p.joints.push_back({pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>()});
      }
      seq.frames.push_back(std::move(p));
    }
    seqs.push_back(std::move(seq));
  }
  return seqs;
}

TrainConfig default_action_train_config(uint64_t seed) {
  TrainConfig tc;
  tc.epochs = 40;
  tc.seed = seed;
  return tc;
}

}  // namespace poselift
