#pragma once

#include <cstdint>
#include <vector>

#include "poselift/rng.hpp"
#include "poselift/tensor.hpp"

namespace poselift {

struct MlpConfig {
  int input_dim = 0;
  int hidden_dim = 1024;
  int n_residual_blocks = 2;
  int output_dim = 0;
  double dropout_rate = 0.5;
  double max_norm = 1.0;
  uint64_t seed = 0;
};

struct TrainConfig {
  double lr0 = 1e-3;
  double lr_decay = 0.96;  // per epoch, lr_epoch = lr0 * decay^epoch
  double beta1 = 0.9;
  double beta2 = 0.99;
  double weight_decay = 1e-4;
  int batch_size = 64;
  int epochs = 0;
  uint64_t seed = 0;
};

enum class OpKind { Linear, BatchNorm, Relu, Dropout, SkipSave, SkipAdd };

struct Op {
  OpKind kind = OpKind::Relu;
  // Linear: w is out x in, b has out entries.
  Matrix w;
  Vector b;
  // BatchNorm over the feature dimension.
  Vector gamma, beta, run_mean, run_var;
  double rate = 0.0;  // dropout
  int width = 0;      // feature width after this op
};

// Sequential op-list network. The residual topology is expressed with
// SkipSave/SkipAdd markers so the same engine runs both the lifting trunks
// and plain classifier stacks.
struct MlpModel {
  int input_dim = 0;
  int output_dim = 0;
  double max_norm = 1.0;
  std::vector<Op> ops;
};

// Stem Linear -> BN -> ReLU -> Dropout, n residual blocks of
// [Linear -> BN -> ReLU -> Dropout] x2 with identity skip, Linear head.
// Weights Kaiming-normal (std = sqrt(2/fan_in)), biases zero, BN identity.
MlpModel make_residual_mlp(const MlpConfig& cfg);

// Plain Linear -> ReLU -> Dropout stack (no BN, no skips) for classifiers.
MlpModel make_plain_mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                        double dropout_rate, double max_norm, uint64_t seed);

struct OpCache {
  Matrix x_in;    // linear input
  Matrix xhat;    // BN normalized activations
  Vector inv_std; // BN 1/sqrt(var + eps)
  Matrix y;       // relu output
  std::vector<uint8_t> mask;  // dropout keep mask
  Matrix saved;   // skip-save copy
};

struct ForwardCache {
  std::vector<OpCache> per_op;
  int rows = 0;
};

struct Gradients {
  // Indexed by op; empty tensors for parameter-free ops.
  std::vector<Matrix> w;
  std::vector<Vector> b;
  std::vector<Vector> gamma;
  std::vector<Vector> beta;
};

// Deterministic inference path: running BN stats, no dropout.
Matrix forward_eval(const MlpModel& m, const Matrix& x);

// Training path: batch BN statistics, inverted dropout drawn from rng.
// Running stats are updated with momentum 0.1 unless update_running is false
// (finite-difference probes need a side-effect-free forward).
Matrix forward_train(MlpModel& m, const Matrix& x, Rng& rng, ForwardCache& cache,
                     bool update_running = true);

// Exact analytic gradients for the cached forward; returns dLoss/dInput.
Matrix backward(const MlpModel& m, const ForwardCache& cache, const Matrix& dout,
                Gradients& grads);

struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb, mgamma, vgamma, mbeta, vbeta;
  int t = 0;  // completed steps
};

// Classic Adam with L2 weight decay folded into the gradient and bias
// correction, then each linear weight row is projected back to max_norm.
void adam_step(MlpModel& m, const Gradients& grads, AdamState& state, double lr,
               const TrainConfig& tc);

enum class Loss { Mse, SoftmaxCrossEntropy };

// Loss value plus dLoss/dOut. MSE averages over all elements; cross-entropy
// expects one-hot targets and averages over rows.
double loss_and_grad(Loss loss, const Matrix& pred, const Matrix& target, Matrix& dout);

// Row-wise softmax probabilities.
Matrix softmax_rows(const Matrix& logits);

// Mini-batch training: per-epoch Fisher-Yates shuffle, exponential LR decay,
// per-epoch mean loss history. Deterministic given tc.seed.
std::vector<double> train(MlpModel& m, const Matrix& inputs, const Matrix& targets,
                          const TrainConfig& tc, Loss loss = Loss::Mse);

}  // namespace poselift
