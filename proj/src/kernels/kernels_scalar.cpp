#include <cmath>
#include <cstring>
#include <vector>

#include "kernels_internal.hpp"

// Reference implementations. These define the semantics the AVX2 variants
// are tested against, so keep the arithmetic order explicit and boring.

namespace poselift::kernels::scalar {

namespace {
constexpr int kBlock = 32;  // row-block size for the L2-friendly GEMM loops
}

void gemm_nt(const double* a, int m, int k, const double* b, int n, double* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int j0 = 0; j0 < n; j0 += kBlock) {
    const int j1 = j0 + kBlock < n ? j0 + kBlock : n;
    for (int i = 0; i < m; ++i) {
      const double* ai = a + static_cast<size_t>(i) * k;
      double* ci = c + static_cast<size_t>(i) * n;
      for (int j = j0; j < j1; ++j) {
        const double* bj = b + static_cast<size_t>(j) * k;
        double acc = 0.0;
        for (int l = 0; l < k; ++l) acc += ai[l] * bj[l];
        ci[j] += acc;
      }
    }
  }
}

void gemm_nn(const double* a, int m, int k, const double* b, int n, double* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int l0 = 0; l0 < k; l0 += kBlock) {
    const int l1 = l0 + kBlock < k ? l0 + kBlock : k;
    for (int i = 0; i < m; ++i) {
      const double* ai = a + static_cast<size_t>(i) * k;
      double* ci = c + static_cast<size_t>(i) * n;
      for (int l = l0; l < l1; ++l) {
        const double w = ai[l];
        const double* bl = b + static_cast<size_t>(l) * n;
        for (int j = 0; j < n; ++j) ci[j] += w * bl[j];
      }
    }
  }
}

void gemm_tn(const double* a, int k, int m, const double* b, int n, double* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int i0 = 0; i0 < m; i0 += kBlock) {
    const int i1 = i0 + kBlock < m ? i0 + kBlock : m;
    for (int l = 0; l < k; ++l) {
      const double* al = a + static_cast<size_t>(l) * m;
      const double* bl = b + static_cast<size_t>(l) * n;
      for (int i = i0; i < i1; ++i) {
        const double w = al[i];
        double* ci = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) ci[j] += w * bl[j];
      }
    }
  }
}

double dot(const double* x, const double* y, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sumsq(const double* x, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void axpy(double a, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale(double a, double* x, int n) {
  for (int i = 0; i < n; ++i) x[i] = a * x[i];
}

void vsub(const double* x, const double* y, double* out, int n) {
  for (int i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void add_bias(double* ym, int rows, int cols, const double* bias) {
  for (int r = 0; r < rows; ++r) {
    double* yr = ym + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) yr[c] = yr[c] + bias[c];
  }
}

void relu_forward(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* dy, const double* y, double* dx, int n) {
  for (int i = 0; i < n; ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
}

void dropout_apply(const double* x, const uint8_t* keep, double inv_keep, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = keep[i] ? x[i] * inv_keep : 0.0;
}

void colwise_sum(const double* x, int rows, int cols, double* out) {
  std::memset(out, 0, sizeof(double) * static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) out[c] = out[c] + xr[c];
  }
}

void colwise_dot(const double* x, const double* y, int rows, int cols, double* out) {
  std::memset(out, 0, sizeof(double) * static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * cols;
    const double* yr = y + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) out[c] = out[c] + xr[c] * yr[c];
  }
}

void colwise_mean_var(const double* x, int rows, int cols, double* mean, double* var) {
  colwise_sum(x, rows, cols, mean);
  const double inv_rows = 1.0 / rows;
  for (int c = 0; c < cols; ++c) mean[c] = mean[c] * inv_rows;
  std::memset(var, 0, sizeof(double) * static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      const double d = xr[c] - mean[c];
      var[c] = var[c] + d * d;
    }
  }
  for (int c = 0; c < cols; ++c) var[c] = var[c] * inv_rows;
}

void bn_apply(const double* x, int rows, int cols, const double* mean, const double* inv_std,
              const double* gamma, const double* beta, double* xhat, double* y) {
  for (int r = 0; r < rows; ++r) {
    const size_t off = static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      const double t = (x[off + c] - mean[c]) * inv_std[c];
      xhat[off + c] = t;
      y[off + c] = t * gamma[c] + beta[c];
    }
  }
}

void bn_backward_input(const double* dy, const double* xhat, int rows, int cols,
                       const double* gamma, const double* inv_std, const double* sum_dy,
                       const double* sum_dyx, double* dx) {
  std::vector<double> k1(cols), a1(cols), a2(cols);
  const double inv_rows = 1.0 / rows;
  for (int c = 0; c < cols; ++c) {
    k1[c] = gamma[c] * inv_std[c];
    a1[c] = sum_dy[c] * inv_rows;
    a2[c] = sum_dyx[c] * inv_rows;
  }
  for (int r = 0; r < rows; ++r) {
    const size_t off = static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c)
      dx[off + c] = k1[c] * (dy[off + c] - a1[c] - xhat[off + c] * a2[c]);
  }
}

void adam_update(double* w, const double* g, double* m, double* v, int n, double lr, double beta1,
                 double beta2, double eps, double bias1, double bias2, double weight_decay) {
  const double om1 = 1.0 - beta1;
  const double om2 = 1.0 - beta2;
  for (int i = 0; i < n; ++i) {
    const double gi = g[i] + weight_decay * w[i];
    m[i] = beta1 * m[i] + om1 * gi;
    v[i] = beta2 * v[i] + om2 * (gi * gi);
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    w[i] = w[i] - (lr * mhat) / (std::sqrt(vhat) + eps);
  }
}

void renorm_rows(double* w, int rows, int cols, double max_norm) {
  for (int r = 0; r < rows; ++r) {
    double* wr = w + static_cast<size_t>(r) * cols;
    double ss = 0.0;
    for (int c = 0; c < cols; ++c) ss += wr[c] * wr[c];
    const double norm = std::sqrt(ss);
    if (norm > max_norm) {
      const double f = max_norm / norm;
      for (int c = 0; c < cols; ++c) wr[c] = wr[c] * f;
    }
  }
}

void scan_losses(const double* alpha, const double* beta, const double* r0, const double* s0,
                 int n, double t0, double step, int count, double* loss_buf) {
  for (int j = 0; j < count; ++j) {
    const double t = t0 + step * j;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e1 = r0[i] + alpha[i] * t;
      const double e2 = s0[i] + beta[i] * t;
      acc += e1 * e1 + e2 * e2;
    }
    loss_buf[j] = acc;
  }
}

}  // namespace poselift::kernels::scalar
