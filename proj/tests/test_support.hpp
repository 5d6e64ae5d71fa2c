#pragma once

// Shared helpers for the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "poselift/neuralnet.hpp"
#include "poselift/rng.hpp"
#include "poselift/synthgen.hpp"

namespace testsupport {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

inline std::vector<poselift::TrainingPair> make_corpus(uint64_t seed, size_t n,
                                                       double dx = 500.0) {
  poselift::SynthConfig cfg = poselift::default_synth_config(seed);
  cfg.dx = dx;
  std::vector<poselift::TrainingPair> pairs;
  pairs.reserve(n);
  for (size_t i = 0; i < n; ++i) pairs.push_back(poselift::generate_pair_at(cfg, i));
  return pairs;
}

// Central-difference check of every parameter gradient of a random residual
// network under MSE, dropout off, running stats frozen. Returns the largest
// relative error across parameters.
inline double gradcheck_max_rel_err(uint64_t seed) {
  using namespace poselift;
  Rng meta(seed);
  MlpConfig cfg;
  cfg.input_dim = 2 + int(meta.uniform_index(5));
  cfg.hidden_dim = 4 + int(meta.uniform_index(5));
  cfg.n_residual_blocks = 1 + int(meta.uniform_index(2));
  cfg.output_dim = 1 + int(meta.uniform_index(4));
  cfg.dropout_rate = 0.0;
  cfg.max_norm = 100.0;
  cfg.seed = meta.next_u64();
  MlpModel m = make_residual_mlp(cfg);

  const int rows = 2 + int(meta.uniform_index(4));
  Matrix x(rows, cfg.input_dim), target(rows, cfg.output_dim);
  for (double& v : x.data) v = meta.normal();
  for (double& v : target.data) v = meta.normal();

  Rng fwd_rng(1);  // unused: dropout rate is 0
  auto loss_at = [&]() {
    ForwardCache cache;
    const Matrix pred = forward_train(m, x, fwd_rng, cache, /*update_running=*/false);
    Matrix dout;
    return loss_and_grad(Loss::Mse, pred, target, dout);
  };

  ForwardCache cache;
  const Matrix pred = forward_train(m, x, fwd_rng, cache, /*update_running=*/false);
  Matrix dout;
  loss_and_grad(Loss::Mse, pred, target, dout);
  Gradients grads;
  backward(m, cache, dout, grads);

  const double h = 1e-5;
  double worst = 0.0;
  auto probe = [&](double* param, double analytic) {
    const double saved = *param;
    *param = saved + h;
    const double up = loss_at();
    *param = saved - h;
    const double down = loss_at();
    *param = saved;
    const double fd = (up - down) / (2.0 * h);
    const double rel =
        std::abs(analytic - fd) / std::max({1e-4, std::abs(analytic), std::abs(fd)});
    worst = std::max(worst, rel);
  };
  for (size_t i = 0; i < m.ops.size(); ++i) {
    Op& op = m.ops[i];
    if (op.kind == OpKind::Linear) {
      for (size_t k = 0; k < op.w.data.size(); ++k) probe(&op.w.data[k], grads.w[i].data[k]);
      for (size_t k = 0; k < op.b.size(); ++k) probe(&op.b[k], grads.b[i][k]);
    } else if (op.kind == OpKind::BatchNorm) {
      for (size_t k = 0; k < op.gamma.size(); ++k) probe(&op.gamma[k], grads.gamma[i][k]);
      for (size_t k = 0; k < op.beta.size(); ++k) probe(&op.beta[k], grads.beta[i][k]);
    }
  }
  return worst;
}

}  // namespace testsupport
