#include "poselift/neuralnet.hpp"

#include <cmath>
#include <stdexcept>

#include "poselift/kernels.hpp"

namespace poselift {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

Op linear_op(int in, int out, double std_dev, Rng& rng) {
  Op op;
  op.kind = OpKind::Linear;
  op.w = Matrix(out, in);
  for (double& v : op.w.data) v = rng.normal() * std_dev;
  op.b.assign(out, 0.0);
  op.width = out;
  return op;
}

Op bn_op(int width) {
  Op op;
  op.kind = OpKind::BatchNorm;
  op.gamma.assign(width, 1.0);
  op.beta.assign(width, 0.0);
  op.run_mean.assign(width, 0.0);
  op.run_var.assign(width, 1.0);
  op.width = width;
  return op;
}

Op relu_op(int width) {
  Op op;
  op.kind = OpKind::Relu;
  op.width = width;
  return op;
}

Op dropout_op(int width, double rate) {
  Op op;
  op.kind = OpKind::Dropout;
  op.rate = rate;
  op.width = width;
  return op;
}

Op marker_op(OpKind kind, int width) {
  Op op;
  op.kind = kind;
  op.width = width;
  return op;
}

double kaiming_std(int fan_in) { return std::sqrt(2.0 / fan_in); }

}  // namespace

MlpModel make_residual_mlp(const MlpConfig& cfg) {
  if (cfg.input_dim < 1 || cfg.hidden_dim < 1 || cfg.output_dim < 1 ||
      cfg.n_residual_blocks < 0)
    throw ShapeMismatch("make_residual_mlp: dims must be >= 1");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
    throw ShapeMismatch("make_residual_mlp: dropout must be in [0,1)");
  if (!(cfg.max_norm > 0.0)) throw ShapeMismatch("make_residual_mlp: max_norm must be positive");

  Rng rng(cfg.seed);
  MlpModel m;
  m.input_dim = cfg.input_dim;
  m.output_dim = cfg.output_dim;
  m.max_norm = cfg.max_norm;
  const int h = cfg.hidden_dim;

  m.ops.push_back(linear_op(cfg.input_dim, h, kaiming_std(cfg.input_dim), rng));
  m.ops.push_back(bn_op(h));
  m.ops.push_back(relu_op(h));
  m.ops.push_back(dropout_op(h, cfg.dropout_rate));
  for (int b = 0; b < cfg.n_residual_blocks; ++b) {
    m.ops.push_back(marker_op(OpKind::SkipSave, h));
    for (int half = 0; half < 2; ++half) {
      m.ops.push_back(linear_op(h, h, kaiming_std(h), rng));
      m.ops.push_back(bn_op(h));
      m.ops.push_back(relu_op(h));
      m.ops.push_back(dropout_op(h, cfg.dropout_rate));
    }
    m.ops.push_back(marker_op(OpKind::SkipAdd, h));
  }
  m.ops.push_back(linear_op(h, cfg.output_dim, kaiming_std(h), rng));
  return m;
}

MlpModel make_plain_mlp(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                        double dropout_rate, double max_norm, uint64_t seed) {
  if (input_dim < 1 || output_dim < 1) throw ShapeMismatch("make_plain_mlp: dims must be >= 1");
  Rng rng(seed);
  MlpModel m;
  m.input_dim = input_dim;
  m.output_dim = output_dim;
  m.max_norm = max_norm;
  int cur = input_dim;
  for (int h : hidden_dims) {
    m.ops.push_back(linear_op(cur, h, kaiming_std(cur), rng));
    m.ops.push_back(relu_op(h));
    m.ops.push_back(dropout_op(h, dropout_rate));
    cur = h;
  }
  m.ops.push_back(linear_op(cur, output_dim, kaiming_std(cur), rng));
  return m;
}

namespace {

Matrix linear_forward(const Op& op, const Matrix& x) {
  const int out = static_cast<int>(op.b.size());
  Matrix y(x.rows, out);
  kernels::gemm_nt(x.data.data(), x.rows, x.cols, op.w.data.data(), out, y.data.data(), false);
  kernels::add_bias(y.data.data(), y.rows, y.cols, op.b.data());
  return y;
}

// Normalize with the given statistics; caches xhat/inv_std when asked.
Matrix bn_forward(const Op& op, const Matrix& x, const Vector& mean, const Vector& var,
                  OpCache* cache) {
  const int cols = x.cols;
  Matrix y(x.rows, cols);
  Vector inv_std(cols);
  for (int c = 0; c < cols; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + kBnEps);
  Matrix xhat(x.rows, cols);
  kernels::bn_apply(x.data.data(), x.rows, cols, mean.data(), inv_std.data(), op.gamma.data(),
                    op.beta.data(), xhat.data.data(), y.data.data());
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

}  // namespace

Matrix forward_eval(const MlpModel& m, const Matrix& x) {
  if (x.cols != m.input_dim)
    throw ShapeMismatch("forward_eval: input width " + std::to_string(x.cols) + ", expected " +
                        std::to_string(m.input_dim));
  Matrix cur = x;
  std::vector<Matrix> skip_stack;
  for (const Op& op : m.ops) {
    switch (op.kind) {
      case OpKind::Linear:
        cur = linear_forward(op, cur);
        break;
      case OpKind::BatchNorm:
        cur = bn_forward(op, cur, op.run_mean, op.run_var, nullptr);
        break;
      case OpKind::Relu: {
        Matrix y(cur.rows, cur.cols);
        kernels::relu_forward(cur.data.data(), y.data.data(), static_cast<int>(cur.size()));
        cur = std::move(y);
        break;
      }
      case OpKind::Dropout:
        break;  // identity at inference
      case OpKind::SkipSave:
        skip_stack.push_back(cur);
        break;
      case OpKind::SkipAdd: {
        const Matrix& saved = skip_stack.back();
        kernels::axpy(1.0, saved.data.data(), cur.data.data(), static_cast<int>(cur.size()));
        skip_stack.pop_back();
        break;
      }
    }
  }
  return cur;
}

Matrix forward_train(MlpModel& m, const Matrix& x, Rng& rng, ForwardCache& cache,
                     bool update_running) {
  if (x.cols != m.input_dim)
    throw ShapeMismatch("forward_train: input width " + std::to_string(x.cols) + ", expected " +
                        std::to_string(m.input_dim));
  cache.per_op.assign(m.ops.size(), OpCache{});
  cache.rows = x.rows;
  Matrix cur = x;
  std::vector<size_t> skip_stack;  // indices of SkipSave ops
  for (size_t i = 0; i < m.ops.size(); ++i) {
    Op& op = m.ops[i];
    OpCache& oc = cache.per_op[i];
    switch (op.kind) {
      case OpKind::Linear:
        oc.x_in = cur;
        cur = linear_forward(op, cur);
        break;
      case OpKind::BatchNorm: {
        Vector mean(cur.cols), var(cur.cols);
        kernels::colwise_mean_var(cur.data.data(), cur.rows, cur.cols, mean.data(), var.data());
        if (update_running) {
          // Running variance keeps the unbiased estimate, normalization the
          // biased one, matching the usual BN convention.
          const double unbias = cur.rows > 1 ? static_cast<double>(cur.rows) / (cur.rows - 1) : 1.0;
          for (int c = 0; c < cur.cols; ++c) {
            op.run_mean[c] = (1.0 - kBnMomentum) * op.run_mean[c] + kBnMomentum * mean[c];
            op.run_var[c] = (1.0 - kBnMomentum) * op.run_var[c] + kBnMomentum * var[c] * unbias;
          }
        }
        cur = bn_forward(op, cur, mean, var, &oc);
        break;
      }
      case OpKind::Relu: {
        Matrix y(cur.rows, cur.cols);
        kernels::relu_forward(cur.data.data(), y.data.data(), static_cast<int>(cur.size()));
        oc.y = y;
        cur = std::move(y);
        break;
      }
      case OpKind::Dropout: {
        if (op.rate == 0.0) break;
        const size_t n = cur.size();
        oc.mask.resize(n);
        for (size_t e = 0; e < n; ++e) oc.mask[e] = rng.uniform() >= op.rate ? 1 : 0;
        Matrix y(cur.rows, cur.cols);
        kernels::dropout_apply(cur.data.data(), oc.mask.data(), 1.0 / (1.0 - op.rate),
                               y.data.data(), static_cast<int>(n));
        cur = std::move(y);
        break;
      }
      case OpKind::SkipSave:
        oc.saved = cur;
        skip_stack.push_back(i);
        break;
      case OpKind::SkipAdd: {
        const Matrix& saved = cache.per_op[skip_stack.back()].saved;
        kernels::axpy(1.0, saved.data.data(), cur.data.data(), static_cast<int>(cur.size()));
        skip_stack.pop_back();
        break;
      }
    }
  }
  return cur;
}

Matrix backward(const MlpModel& m, const ForwardCache& cache, const Matrix& dout,
                Gradients& grads) {
  const size_t n_ops = m.ops.size();
  grads.w.assign(n_ops, Matrix());
  grads.b.assign(n_ops, Vector());
  grads.gamma.assign(n_ops, Vector());
  grads.beta.assign(n_ops, Vector());

  Matrix d = dout;
  std::vector<Matrix> skip_grads;
  for (size_t ri = n_ops; ri-- > 0;) {
    const Op& op = m.ops[ri];
    const OpCache& oc = cache.per_op[ri];
    switch (op.kind) {
      case OpKind::Linear: {
        const int out = static_cast<int>(op.b.size());
        const int in = op.w.cols;
        grads.w[ri] = Matrix(out, in);
        kernels::gemm_tn(d.data.data(), d.rows, out, oc.x_in.data.data(), in,
                         grads.w[ri].data.data(), false);
        grads.b[ri].assign(out, 0.0);
        kernels::colwise_sum(d.data.data(), d.rows, out, grads.b[ri].data());
        Matrix dx(d.rows, in);
        kernels::gemm_nn(d.data.data(), d.rows, out, op.w.data.data(), in, dx.data.data(), false);
        d = std::move(dx);
        break;
      }
      case OpKind::BatchNorm: {
        const int cols = d.cols;
        grads.beta[ri].assign(cols, 0.0);
        grads.gamma[ri].assign(cols, 0.0);
        kernels::colwise_sum(d.data.data(), d.rows, cols, grads.beta[ri].data());
        kernels::colwise_dot(d.data.data(), oc.xhat.data.data(), d.rows, cols,
                             grads.gamma[ri].data());
        Matrix dx(d.rows, cols);
        kernels::bn_backward_input(d.data.data(), oc.xhat.data.data(), d.rows, cols,
                                   op.gamma.data(), oc.inv_std.data(), grads.beta[ri].data(),
                                   grads.gamma[ri].data(), dx.data.data());
        d = std::move(dx);
        break;
      }
      case OpKind::Relu: {
        Matrix dx(d.rows, d.cols);
        kernels::relu_backward(d.data.data(), oc.y.data.data(), dx.data.data(),
                               static_cast<int>(d.size()));
        d = std::move(dx);
        break;
      }
      case OpKind::Dropout: {
        if (op.rate == 0.0) break;
        Matrix dx(d.rows, d.cols);
        kernels::dropout_apply(d.data.data(), oc.mask.data(), 1.0 / (1.0 - op.rate),
                               dx.data.data(), static_cast<int>(d.size()));
        d = std::move(dx);
        break;
      }
      case OpKind::SkipAdd:
        // Identity into both branches; stash a copy for the matching SkipSave.
        skip_grads.push_back(d);
        break;
      case OpKind::SkipSave: {
        const Matrix& from_skip = skip_grads.back();
        kernels::axpy(1.0, from_skip.data.data(), d.data.data(), static_cast<int>(d.size()));
        skip_grads.pop_back();
        break;
      }
    }
  }
  return d;
}

void adam_step(MlpModel& m, const Gradients& grads, AdamState& state, double lr,
               const TrainConfig& tc) {
  const size_t n_ops = m.ops.size();
  if (state.mw.empty()) {
    state.mw.assign(n_ops, Matrix());
    state.vw.assign(n_ops, Matrix());
    state.mb.assign(n_ops, Vector());
    state.vb.assign(n_ops, Vector());
    state.mgamma.assign(n_ops, Vector());
    state.vgamma.assign(n_ops, Vector());
    state.mbeta.assign(n_ops, Vector());
    state.vbeta.assign(n_ops, Vector());
  }
  state.t += 1;
  const double bias1 = 1.0 - std::pow(tc.beta1, state.t);
  const double bias2 = 1.0 - std::pow(tc.beta2, state.t);

  auto update = [&](double* w, const double* g, Vector& mv, Vector& vv, int n,
                    double weight_decay) {
    if (mv.empty()) {
      mv.assign(n, 0.0);
      vv.assign(n, 0.0);
    }
    kernels::adam_update(w, g, mv.data(), vv.data(), n, lr, tc.beta1, tc.beta2, 1e-8, bias1,
                         bias2, weight_decay);
  };

  for (size_t i = 0; i < n_ops; ++i) {
    Op& op = m.ops[i];
    if (op.kind == OpKind::Linear) {
      const int wn = static_cast<int>(op.w.size());
      if (state.mw[i].size() == 0) {
        state.mw[i] = Matrix(op.w.rows, op.w.cols);
        state.vw[i] = Matrix(op.w.rows, op.w.cols);
      }
      kernels::adam_update(op.w.data.data(), grads.w[i].data.data(), state.mw[i].data.data(),
                           state.vw[i].data.data(), wn, lr, tc.beta1, tc.beta2, 1e-8, bias1,
                           bias2, tc.weight_decay);
      update(op.b.data(), grads.b[i].data(), state.mb[i], state.vb[i],
             static_cast<int>(op.b.size()), tc.weight_decay);
      kernels::renorm_rows(op.w.data.data(), op.w.rows, op.w.cols, m.max_norm);
    } else if (op.kind == OpKind::BatchNorm) {
      update(op.gamma.data(), grads.gamma[i].data(), state.mgamma[i], state.vgamma[i],
             static_cast<int>(op.gamma.size()), tc.weight_decay);
      update(op.beta.data(), grads.beta[i].data(), state.mbeta[i], state.vbeta[i],
             static_cast<int>(op.beta.size()), tc.weight_decay);
    }
  }
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows, logits.cols);
  for (int r = 0; r < logits.rows; ++r) {
    const double* in = logits.row(r);
    double* out = p.row(r);
    double mx = in[0];
    for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, in[c]);
    double sum = 0.0;
    for (int c = 0; c < logits.cols; ++c) {
      out[c] = std::exp(in[c] - mx);
      sum += out[c];
    }
    for (int c = 0; c < logits.cols; ++c) out[c] /= sum;
  }
  return p;
}

double loss_and_grad(Loss loss, const Matrix& pred, const Matrix& target, Matrix& dout) {
  target.require_shape(pred.rows, pred.cols, "loss target");
  dout = Matrix(pred.rows, pred.cols);
  const int n = static_cast<int>(pred.size());
  if (loss == Loss::Mse) {
    double acc = 0.0;
    const double scale = 2.0 / n;
    for (int i = 0; i < n; ++i) {
      const double diff = pred.data[i] - target.data[i];
      acc += diff * diff;
      dout.data[i] = scale * diff;
    }
    return acc / n;
  }
  // Softmax cross-entropy with one-hot targets, averaged over rows.
  const Matrix p = softmax_rows(pred);
  double acc = 0.0;
  const double inv_rows = 1.0 / pred.rows;
  for (int i = 0; i < n; ++i) {
    if (target.data[i] > 0.0) acc -= target.data[i] * std::log(std::max(p.data[i], 1e-300));
    dout.data[i] = (p.data[i] - target.data[i]) * inv_rows;
  }
  return acc * inv_rows;
}

std::vector<double> train(MlpModel& m, const Matrix& inputs, const Matrix& targets,
                          const TrainConfig& tc, Loss loss) {
  if (inputs.rows == 0) throw EmptyDataset("train: no samples");
  if (targets.rows != inputs.rows) throw ShapeMismatch("train: inputs/targets row mismatch");
  if (inputs.cols != m.input_dim || targets.cols != m.output_dim)
    throw ShapeMismatch("train: width mismatch with model dims");

  AdamState state;
  Rng dropout_rng(derive_seed(tc.seed, 1));
  std::vector<double> history;
  history.reserve(tc.epochs);
  std::vector<size_t> order(inputs.rows);
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(tc.seed, 100 + static_cast<uint64_t>(epoch)));
    shuffle_indices(order, shuffle_rng);
    const double lr = tc.lr0 * std::pow(tc.lr_decay, epoch);

    double epoch_loss = 0.0;
    for (int start = 0; start < inputs.rows; start += tc.batch_size) {
      const int rows = std::min(tc.batch_size, inputs.rows - start);
      Matrix xb(rows, inputs.cols), yb(rows, targets.cols);
      for (int r = 0; r < rows; ++r) {
        const size_t src = order[start + r];
        std::copy_n(inputs.row(static_cast<int>(src)), inputs.cols, xb.row(r));
        std::copy_n(targets.row(static_cast<int>(src)), targets.cols, yb.row(r));
      }
      ForwardCache cache;
      const Matrix pred = forward_train(m, xb, dropout_rng, cache);
      Matrix dout;
      const double batch_loss = loss_and_grad(loss, pred, yb, dout);
      Gradients grads;
      backward(m, cache, dout, grads);
      adam_step(m, grads, state, lr, tc);
      epoch_loss += batch_loss * rows;
    }
    history.push_back(epoch_loss / inputs.rows);
  }
  return history;
}

}  // namespace poselift
