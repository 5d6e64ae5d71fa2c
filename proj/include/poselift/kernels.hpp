#pragma once

#include <cstdint>

namespace poselift::kernels {

// Data-parallel inner loops used by the trainer, the depth search, and the
// batch evaluators. Every kernel exists as a scalar reference implementation
// and, on x86-64, an AVX2 variant. The backend is picked once at startup
// from CPUID and can be overridden (tests run both and compare).
//
// Numerical contract:
//  * element-wise kernels (relu, dropout, adam, bn_apply, bn_backward,
//    add_bias, vsub, scale) are bit-identical across backends;
//  * reduction kernels (dot, sumsq, gemm_*, colwise_*, scan) may differ by
//    accumulation order; equivalence tests bound the difference.

enum class Backend { Scalar, Avx2 };

// True when the running CPU can execute the AVX2 variants.
bool cpu_supports_avx2();

// Best backend for this CPU (Avx2 when supported, else Scalar).
Backend preferred_backend();

Backend active_backend();
void set_backend(Backend b);  // throws std::runtime_error if unsupported
const char* backend_name(Backend b);

// ---- BLAS-ish ----
// C (m x n) = A (m x k) * B^T, with B stored (n x k). accumulate adds into C.
void gemm_nt(const double* a, int m, int k, const double* b, int n, double* c, bool accumulate);
// C (m x n) = A (m x k) * B (k x n).
void gemm_nn(const double* a, int m, int k, const double* b, int n, double* c, bool accumulate);
// C (m x n) = A^T * B, with A stored (k x m) and B stored (k x n).
void gemm_tn(const double* a, int k, int m, const double* b, int n, double* c, bool accumulate);

double dot(const double* x, const double* y, int n);
double sumsq(const double* x, int n);
void axpy(double a, const double* x, double* y, int n);  // y += a*x
void scale(double a, double* x, int n);
void vsub(const double* x, const double* y, double* out, int n);  // out = x - y
void add_bias(double* ym, int rows, int cols, const double* bias);

// ---- Activations ----
void relu_forward(const double* x, double* y, int n);
// dx = dy where the forward output was positive; y is the forward output.
void relu_backward(const double* dy, const double* y, double* dx, int n);
// y = keep[i] ? x[i]*inv_keep : 0 (inverted dropout).
void dropout_apply(const double* x, const uint8_t* keep, double inv_keep, double* y, int n);

// ---- Batch normalization over a (rows x cols) activation block ----
void colwise_sum(const double* x, int rows, int cols, double* out);
// out[c] = sum_r x[r,c]*y[r,c]
void colwise_dot(const double* x, const double* y, int rows, int cols, double* out);
// Per-column mean and biased variance in one call.
void colwise_mean_var(const double* x, int rows, int cols, double* mean, double* var);
// xhat = (x-mean)*inv_std ; y = xhat*gamma + beta   (all per column)
void bn_apply(const double* x, int rows, int cols, const double* mean, const double* inv_std,
              const double* gamma, const double* beta, double* xhat, double* y);
// dx[r,c] = gamma[c]*inv_std[c]*(dy[r,c] - sum_dy[c]/rows - xhat[r,c]*sum_dyx[c]/rows)
void bn_backward_input(const double* dy, const double* xhat, int rows, int cols,
                       const double* gamma, const double* inv_std, const double* sum_dy,
                       const double* sum_dyx, double* dx);

// ---- Optimizer ----
// In-place Adam step with L2 decay folded into the gradient. bias1/bias2 are
// the 1-beta^t corrections for this step.
void adam_update(double* w, const double* g, double* m, double* v, int n, double lr, double beta1,
                 double beta2, double eps, double bias1, double bias2, double weight_decay);
// Rescale any row of W (rows x cols) whose L2 norm exceeds max_norm back to
// exactly max_norm.
void renorm_rows(double* w, int rows, int cols, double max_norm);

// ---- Depth-scan ----
struct ScanResult {
  int index;    // candidate index of the minimum (ties resolved to smallest)
  double loss;  // loss at that candidate
};
// Evaluates loss(t_j) = sum_i (r0[i]+alpha[i]*t_j)^2 + (s0[i]+beta[i]*t_j)^2
// over t_j = t0 + j*step for j in [0, count). loss_buf must hold `count`
// doubles. Candidates whose loss ties the minimum within `tie_eps` resolve
// to the smallest j.
ScanResult scan_quadratic_argmin(const double* alpha, const double* beta, const double* r0,
                                 const double* s0, int n, double t0, double step, int count,
                                 double* loss_buf, double tie_eps);

}  // namespace poselift::kernels
