#include "poselift/lifting.hpp"

#include <cstring>

#include "poselift/metrics.hpp"

namespace poselift {

namespace {

uint64_t fnv1a(const void* bytes, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void fill_pose2d_row(double* row, const Pose2D& pose) {
  for (size_t i = 0; i < pose.joints.size(); ++i) {
    row[2 * i] = pose.joints[i].u;
    row[2 * i + 1] = pose.joints[i].v;
  }
}

Pose2D pose2d_from_row(const double* row, int n) {
  Pose2D p;
  p.joints.resize(n);
  for (int i = 0; i < n; ++i) p.joints[i] = {row[2 * i], row[2 * i + 1]};
  return p;
}

Matrix left_inputs(const std::vector<TrainingPair>& pairs, const std::vector<size_t>& idx,
                   int n) {
  Matrix x(static_cast<int>(idx.size()), 2 * n);
  for (size_t r = 0; r < idx.size(); ++r)
    fill_pose2d_row(x.row(static_cast<int>(r)),
                    normalize2d(pairs[idx[r]].left2d, kLiftCropSize));
  return x;
}

void check_pairs(const std::vector<TrainingPair>& pairs, const std::vector<size_t>& train_idx,
                 const JointSchema& schema) {
  if (pairs.empty() || train_idx.empty()) throw EmptyDataset("lifting: no training pairs");
  for (const TrainingPair& p : pairs)
    if (p.left2d.size() != schema.size() || p.right2d.size() != schema.size() ||
        p.pose3d.size() != schema.size())
      throw SchemaMismatch("lifting: pair joint count does not match schema " + schema.name);
}

}  // namespace

IndexSplit split_by_index_hash(size_t count, double fraction, uint64_t salt) {
  IndexSplit split;
  for (size_t i = 0; i < count; ++i) {
    uint64_t payload[2] = {salt, static_cast<uint64_t>(i)};
    const uint64_t h = fnv1a(payload, sizeof(payload));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    (u < fraction ? split.train : split.holdout).push_back(i);
  }
  return split;
}

MlpModel train_view_synthesis(const std::vector<TrainingPair>& pairs,
                              const std::vector<size_t>& train_idx, const JointSchema& schema,
                              const LiftingHyper& hyper, const TrainConfig& tc,
                              std::vector<double>* history) {
  check_pairs(pairs, train_idx, schema);
  const int n = schema.size();
  MlpConfig mc;
  mc.input_dim = 2 * n;
  mc.output_dim = 2 * n;
  mc.hidden_dim = hyper.hidden_dim;
  mc.n_residual_blocks = hyper.n_residual_blocks;
  mc.dropout_rate = hyper.dropout_rate;
  mc.max_norm = hyper.max_norm;
  mc.seed = hyper.init_seed;
  MlpModel m = make_residual_mlp(mc);

  const Matrix x = left_inputs(pairs, train_idx, n);
  Matrix y(static_cast<int>(train_idx.size()), 2 * n);
  for (size_t r = 0; r < train_idx.size(); ++r)
    fill_pose2d_row(y.row(static_cast<int>(r)),
                    normalize2d(pairs[train_idx[r]].right2d, kLiftCropSize));
  const std::vector<double> hist = train(m, x, y, tc, Loss::Mse);
  if (history) *history = hist;
  return m;
}

Pose2D predict_right(const MlpModel& vm, const Pose2D& left_norm, const JointSchema& schema) {
  const int n = schema.size();
  if (left_norm.size() != n)
    throw SchemaMismatch("predict_right: pose does not match schema " + schema.name);
  if (vm.input_dim != 2 * n || vm.output_dim != 2 * n)
    throw SchemaMismatch("predict_right: model dims do not match schema " + schema.name);
  Matrix x(1, 2 * n);
  fill_pose2d_row(x.row(0), left_norm);
  const Matrix out = forward_eval(vm, x);
  return pose2d_from_row(out.row(0), n);
}

MlpModel train_reconstruction(const std::vector<TrainingPair>& pairs,
                              const std::vector<size_t>& train_idx, const MlpModel* view_model,
                              const JointSchema& schema, const LiftingHyper& hyper,
                              const TrainConfig& tc, ReconMode mode,
                              std::vector<double>* history) {
  check_pairs(pairs, train_idx, schema);
  const int n = schema.size();
  const bool stereo = mode != ReconMode::Monocular;
  if (stereo && view_model == nullptr)
    throw SchemaMismatch("train_reconstruction: stereo modes need a view model");

  MlpConfig mc;
  mc.input_dim = stereo ? 4 * n : 2 * n;
  mc.output_dim = 3 * n;
  mc.hidden_dim = hyper.hidden_dim;
  mc.n_residual_blocks = hyper.n_residual_blocks;
  mc.dropout_rate = hyper.dropout_rate;
  mc.max_norm = hyper.max_norm;
  mc.seed = hyper.init_seed;
  MlpModel m = make_residual_mlp(mc);

  Matrix x(static_cast<int>(train_idx.size()), mc.input_dim);
  for (size_t r = 0; r < train_idx.size(); ++r) {
    const TrainingPair& pair = pairs[train_idx[r]];
    double* row = x.row(static_cast<int>(r));
    const Pose2D left_norm = normalize2d(pair.left2d, kLiftCropSize);
    fill_pose2d_row(row, left_norm);
    if (!stereo) continue;
    // Fixed layout: left block then right block.
    const Pose2D right_norm = mode == ReconMode::TeacherForced
                                  ? normalize2d(pair.right2d, kLiftCropSize)
                                  : predict_right(*view_model, left_norm, schema);
    fill_pose2d_row(row + 2 * n, right_norm);
  }

  Matrix y(static_cast<int>(train_idx.size()), 3 * n);
  for (size_t r = 0; r < train_idx.size(); ++r) {
    const Pose3D target = normalize3d(pairs[train_idx[r]].pose3d, kLift3dScaleMm);
    double* row = y.row(static_cast<int>(r));
    for (int i = 0; i < n; ++i) {
      row[3 * i] = target.joints[i].x;
      row[3 * i + 1] = target.joints[i].y;
      row[3 * i + 2] = target.joints[i].z;
    }
  }

  const std::vector<double> hist = train(m, x, y, tc, Loss::Mse);
  if (history) *history = hist;
  return m;
}

Pose3D predict_coarse(const MlpModel& vm, const MlpModel& rm, const Pose2D& left_crop,
                      const JointSchema& schema) {
  const int n = schema.size();
  if (left_crop.size() != n)
    throw SchemaMismatch("predict_coarse: pose does not match schema " + schema.name);
  if (rm.output_dim != 3 * n)
    throw SchemaMismatch("predict_coarse: recon output does not match schema " + schema.name);
  const Pose2D left_norm = normalize2d(left_crop, kLiftCropSize);
  const bool stereo = rm.input_dim == 4 * n;
  if (!stereo && rm.input_dim != 2 * n)
    throw SchemaMismatch("predict_coarse: recon input does not match schema " + schema.name);

  Matrix x(1, rm.input_dim);
  fill_pose2d_row(x.row(0), left_norm);
  if (stereo) {
    const Pose2D right_norm = predict_right(vm, left_norm, schema);
    fill_pose2d_row(x.row(0) + 2 * n, right_norm);
  }
  const Matrix out = forward_eval(rm, x);

  Pose3D norm;
  norm.frame = Frame::RootRelative;
  norm.joints.resize(n);
  const double* row = out.row(0);
  for (int i = 0; i < n; ++i) norm.joints[i] = {row[3 * i], row[3 * i + 1], row[3 * i + 2]};
  Pose3D coarse = denormalize3d(norm, kLift3dScaleMm);
  return root_align(coarse, schema);
}

double eval_view_synthesis_pckh(const MlpModel& vm, const std::vector<TrainingPair>& pairs,
                                const std::vector<size_t>& idx, const JointSchema& schema) {
  if (idx.empty()) throw EmptyDataset("eval_view_synthesis_pckh: empty index set");
  double total = 0.0;
  for (const size_t i : idx) {
    const Pose2D pred_norm =
        predict_right(vm, normalize2d(pairs[i].left2d, kLiftCropSize), schema);
    const Pose2D pred = denormalize2d(pred_norm, kLiftCropSize);
    total += pckh(pred, pairs[i].right2d, schema);
  }
  return total / idx.size();
}

double eval_recon_mpjpe(const MlpModel& vm, const MlpModel& rm,
                        const std::vector<TrainingPair>& pairs, const std::vector<size_t>& idx,
                        const JointSchema& schema) {
  if (idx.empty()) throw EmptyDataset("eval_recon_mpjpe: empty index set");
  double total = 0.0;
  for (const size_t i : idx) {
    const Pose3D coarse = predict_coarse(vm, rm, pairs[i].left2d, schema);
    total += mpjpe_protocol1(coarse, pairs[i].pose3d, schema);
  }
  return total / idx.size();
}

}  // namespace poselift
