#include "kernels_internal.hpp"

#ifdef POSELIFT_X86

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <vector>

// AVX2 variants. Element-wise kernels stick to mul/add/sqrt/div so they stay
// bit-identical to the scalar reference (this file is built with
// -ffp-contract=off); only the GEMM family and the horizontal reductions use
// FMA and re-associated accumulators.

namespace poselift::kernels::avx2 {

namespace {

constexpr int kBlock = 32;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// dot(ai, bj0..bj3) in one sweep; k-tail handled by the caller.
inline void dot4(const double* ai, const double* b0, const double* b1, const double* b2,
                 const double* b3, int k, double* out) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  int l = 0;
  for (; l + 4 <= k; l += 4) {
    const __m256d av = _mm256_loadu_pd(ai + l);
    acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + l), acc0);
    acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + l), acc1);
    acc2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + l), acc2);
    acc3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + l), acc3);
  }
  double t0 = hsum(acc0), t1 = hsum(acc1), t2 = hsum(acc2), t3 = hsum(acc3);
  for (; l < k; ++l) {
    const double av = ai[l];
    t0 += av * b0[l];
    t1 += av * b1[l];
    t2 += av * b2[l];
    t3 += av * b3[l];
  }
  out[0] = t0;
  out[1] = t1;
  out[2] = t2;
  out[3] = t3;
}

inline double dot1(const double* x, const double* y, int k) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  int l = 0;
  for (; l + 8 <= k; l += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + l), _mm256_loadu_pd(y + l), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + l + 4), _mm256_loadu_pd(y + l + 4), acc1);
  }
  double t = hsum(_mm256_add_pd(acc0, acc1));
  for (; l < k; ++l) t += x[l] * y[l];
  return t;
}

// row += w * src, FMA version for the GEMM inner loops.
inline void fma_row(double w, const double* src, double* dst, int n) {
  const __m256d wv = _mm256_set1_pd(w);
  int j = 0;
  for (; j + 8 <= n; j += 8) {
    _mm256_storeu_pd(dst + j,
                     _mm256_fmadd_pd(wv, _mm256_loadu_pd(src + j), _mm256_loadu_pd(dst + j)));
    _mm256_storeu_pd(
        dst + j + 4,
        _mm256_fmadd_pd(wv, _mm256_loadu_pd(src + j + 4), _mm256_loadu_pd(dst + j + 4)));
  }
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(dst + j,
                     _mm256_fmadd_pd(wv, _mm256_loadu_pd(src + j), _mm256_loadu_pd(dst + j)));
  }
  for (; j < n; ++j) dst[j] += w * src[j];
}

}  // namespace

void gemm_nt(const double* a, int m, int k, const double* b, int n, double* c, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int j0 = 0; j0 < n; j0 += kBlock) {
    const int j1 = j0 + kBlock < n ? j0 + kBlock : n;
    for (int i = 0; i < m; ++i) {
      const double* ai = a + static_cast<size_t>(i) * k;
      double* ci = c + static_cast<size_t>(i) * n;
      int j = j0;
      for (; j + 4 <= j1; j += 4) {
        double out[4];
        dot4(ai, b + static_cast<size_t>(j) * k, b + static_cast<size_t>(j + 1) * k,
             b + static_cast<size_t>(j + 2) * k, b + static_cast<size_t>(j + 3) * k, k, out);
        ci[j] += out[0];
        ci[j + 1] += out[1];
        ci[j + 2] += out[2];
        ci[j + 3] += out[3];
      }
      for (; j < j1; ++j) ci[j] += dot1(ai, b + static_cast<size_t>(j) * k, k);
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
      for (int l = l0; l < l1; ++l) fma_row(ai[l], b + static_cast<size_t>(l) * n, ci, n);
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
      for (int i = i0; i < i1; ++i) fma_row(al[i], bl, c + static_cast<size_t>(i) * n, n);
    }
  }
}

double dot(const double* x, const double* y, int n) { return dot1(x, y, n); }

double sumsq(const double* x, int n) { return dot1(x, x, n); }

void axpy(double a, const double* x, double* y, int n) {
  const __m256d av = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale(double a, double* x, int n) {
  const __m256d av = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = a * x[i];
}

void vsub(const double* x, const double* y, double* out, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = x[i] - y[i];
}

void add_bias(double* ym, int rows, int cols, const double* bias) {
  for (int r = 0; r < rows; ++r) {
    double* yr = ym + static_cast<size_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(yr + c, _mm256_add_pd(_mm256_loadu_pd(yr + c), _mm256_loadu_pd(bias + c)));
    for (; c < cols; ++c) yr[c] = yr[c] + bias[c];
  }
}

void relu_forward(const double* x, double* y, int n) {
  const __m256d zero = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(y + i, _mm256_and_pd(xv, mask));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* dy, const double* y, double* dx, int n) {
  const __m256d zero = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(y + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dx + i, _mm256_and_pd(_mm256_loadu_pd(dy + i), mask));
  }
  for (; i < n; ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
}

void dropout_apply(const double* x, const uint8_t* keep, double inv_keep, double* y, int n) {
  const __m256d sv = _mm256_set1_pd(inv_keep);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_castsi256_pd(
        _mm256_setr_epi64x(keep[i] ? -1 : 0, keep[i + 1] ? -1 : 0, keep[i + 2] ? -1 : 0,
                           keep[i + 3] ? -1 : 0));
    const __m256d scaled = _mm256_mul_pd(_mm256_loadu_pd(x + i), sv);
    _mm256_storeu_pd(y + i, _mm256_and_pd(scaled, mask));
  }
  for (; i < n; ++i) y[i] = keep[i] ? x[i] * inv_keep : 0.0;
}

void colwise_sum(const double* x, int rows, int cols, double* out) {
  std::memset(out, 0, sizeof(double) * static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4)
      _mm256_storeu_pd(out + c, _mm256_add_pd(_mm256_loadu_pd(out + c), _mm256_loadu_pd(xr + c)));
    for (; c < cols; ++c) out[c] = out[c] + xr[c];
  }
}

void colwise_dot(const double* x, const double* y, int rows, int cols, double* out) {
  std::memset(out, 0, sizeof(double) * static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * cols;
    const double* yr = y + static_cast<size_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(xr + c), _mm256_loadu_pd(yr + c));
      _mm256_storeu_pd(out + c, _mm256_add_pd(_mm256_loadu_pd(out + c), prod));
    }
    for (; c < cols; ++c) out[c] = out[c] + xr[c] * yr[c];
  }
}

void colwise_mean_var(const double* x, int rows, int cols, double* mean, double* var) {
  colwise_sum(x, rows, cols, mean);
  const double inv_rows = 1.0 / rows;
  scale(inv_rows, mean, cols);
  std::memset(var, 0, sizeof(double) * static_cast<size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const double* xr = x + static_cast<size_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(xr + c), _mm256_loadu_pd(mean + c));
      _mm256_storeu_pd(var + c, _mm256_add_pd(_mm256_loadu_pd(var + c), _mm256_mul_pd(d, d)));
    }
    for (; c < cols; ++c) {
      const double d = xr[c] - mean[c];
      var[c] = var[c] + d * d;
    }
  }
  scale(inv_rows, var, cols);
}

void bn_apply(const double* x, int rows, int cols, const double* mean, const double* inv_std,
              const double* gamma, const double* beta, double* xhat, double* y) {
  for (int r = 0; r < rows; ++r) {
    const size_t off = static_cast<size_t>(r) * cols;
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d t = _mm256_mul_pd(
          _mm256_sub_pd(_mm256_loadu_pd(x + off + c), _mm256_loadu_pd(mean + c)),
          _mm256_loadu_pd(inv_std + c));
      _mm256_storeu_pd(xhat + off + c, t);
      _mm256_storeu_pd(y + off + c, _mm256_add_pd(_mm256_mul_pd(t, _mm256_loadu_pd(gamma + c)),
                                                  _mm256_loadu_pd(beta + c)));
    }
    for (; c < cols; ++c) {
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
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d inner = _mm256_sub_pd(
          _mm256_sub_pd(_mm256_loadu_pd(dy + off + c), _mm256_loadu_pd(a1.data() + c)),
          _mm256_mul_pd(_mm256_loadu_pd(xhat + off + c), _mm256_loadu_pd(a2.data() + c)));
      _mm256_storeu_pd(dx + off + c, _mm256_mul_pd(_mm256_loadu_pd(k1.data() + c), inner));
    }
    for (; c < cols; ++c)
      dx[off + c] = k1[c] * (dy[off + c] - a1[c] - xhat[off + c] * a2[c]);
  }
}

void adam_update(double* w, const double* g, double* m, double* v, int n, double lr, double beta1,
                 double beta2, double eps, double bias1, double bias2, double weight_decay) {
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d om1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d om2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d wd = _mm256_set1_pd(weight_decay);
  const __m256d lrv = _mm256_set1_pd(lr);
  const __m256d epsv = _mm256_set1_pd(eps);
  const __m256d ib1 = _mm256_set1_pd(bias1);
  const __m256d ib2 = _mm256_set1_pd(bias2);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d gi = _mm256_add_pd(_mm256_loadu_pd(g + i), _mm256_mul_pd(wd, wv));
    const __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(om1, gi));
    const __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(om2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_div_pd(mv, ib1);
    const __m256d vhat = _mm256_div_pd(vv, ib2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom);
    _mm256_storeu_pd(w + i, _mm256_sub_pd(wv, upd));
  }
  for (; i < n; ++i) {
    const double gi = g[i] + weight_decay * w[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
    v[i] = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
    const double mhat = m[i] / bias1;
    const double vhat = v[i] / bias2;
    w[i] = w[i] - (lr * mhat) / (std::sqrt(vhat) + eps);
  }
}

void renorm_rows(double* w, int rows, int cols, double max_norm) {
  // Serial sum keeps the factor bit-identical to the reference.
  for (int r = 0; r < rows; ++r) {
    double* wr = w + static_cast<size_t>(r) * cols;
    double ss = 0.0;
    for (int c = 0; c < cols; ++c) ss += wr[c] * wr[c];
    const double norm = std::sqrt(ss);
    if (norm > max_norm) scale(max_norm / norm, wr, cols);
  }
}

void scan_losses(const double* alpha, const double* beta, const double* r0, const double* s0,
                 int n, double t0, double step, int count, double* loss_buf) {
  // Lanes hold four consecutive candidates; each lane accumulates exactly the
  // scalar order, so the losses stay bit-identical to the reference.
  const __m256d ramp = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d stepv = _mm256_set1_pd(step);
  const __m256d t0v = _mm256_set1_pd(t0);
  int j = 0;
  for (; j + 4 <= count; j += 4) {
    const __m256d jv = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(j)), ramp);
    const __m256d t = _mm256_add_pd(t0v, _mm256_mul_pd(stepv, jv));
    __m256d acc = _mm256_setzero_pd();
    for (int i = 0; i < n; ++i) {
      const __m256d e1 = _mm256_add_pd(_mm256_set1_pd(r0[i]),
                                       _mm256_mul_pd(_mm256_set1_pd(alpha[i]), t));
      const __m256d e2 = _mm256_add_pd(_mm256_set1_pd(s0[i]),
                                       _mm256_mul_pd(_mm256_set1_pd(beta[i]), t));
      acc = _mm256_add_pd(acc, _mm256_add_pd(_mm256_mul_pd(e1, e1), _mm256_mul_pd(e2, e2)));
    }
    _mm256_storeu_pd(loss_buf + j, acc);
  }
  for (; j < count; ++j) {
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

}  // namespace poselift::kernels::avx2

#endif  // POSELIFT_X86
