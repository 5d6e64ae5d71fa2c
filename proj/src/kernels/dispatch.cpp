#include "poselift/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kernels_internal.hpp"

namespace poselift::kernels {

namespace {

Backend g_backend = preferred_backend();

}  // namespace

bool cpu_supports_avx2() {
#ifdef POSELIFT_X86
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend preferred_backend() { return cpu_supports_avx2() ? Backend::Avx2 : Backend::Scalar; }

Backend active_backend() { return g_backend; }

void set_backend(Backend backend) {
  if (backend == Backend::Avx2 && !cpu_supports_avx2())
    throw std::runtime_error("avx2 backend requested but not supported by this cpu");
  g_backend = backend;
}

const char* backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

#ifdef POSELIFT_X86
#define POSELIFT_DISPATCH(fn, ...)                         \
  do {                                                     \
    if (g_backend == Backend::Avx2) {                      \
      avx2::fn(__VA_ARGS__);                               \
      return;                                              \
    }                                                      \
    scalar::fn(__VA_ARGS__);                               \
  } while (0)
#define POSELIFT_DISPATCH_RET(fn, ...)                                                   \
  do {                                                                                   \
    if (g_backend == Backend::Avx2) return avx2::fn(__VA_ARGS__);                        \
    return scalar::fn(__VA_ARGS__);                                                      \
  } while (0)
#else
#define POSELIFT_DISPATCH(fn, ...)  \
  do {                              \
    scalar::fn(__VA_ARGS__);        \
  } while (0)
#define POSELIFT_DISPATCH_RET(fn, ...) \
  do {                                 \
    return scalar::fn(__VA_ARGS__);    \
  } while (0)
#endif

void gemm_nt(const double* a, int m, int k, const double* b, int n, double* c, bool accumulate) {
  POSELIFT_DISPATCH(gemm_nt, a, m, k, b, n, c, accumulate);
}

void gemm_nn(const double* a, int m, int k, const double* b, int n, double* c, bool accumulate) {
  POSELIFT_DISPATCH(gemm_nn, a, m, k, b, n, c, accumulate);
}

void gemm_tn(const double* a, int k, int m, const double* b, int n, double* c, bool accumulate) {
  POSELIFT_DISPATCH(gemm_tn, a, k, m, b, n, c, accumulate);
}

double dot(const double* x, const double* y, int n) { POSELIFT_DISPATCH_RET(dot, x, y, n); }

double sumsq(const double* x, int n) { POSELIFT_DISPATCH_RET(sumsq, x, n); }

void axpy(double a, const double* x, double* y, int n) { POSELIFT_DISPATCH(axpy, a, x, y, n); }

void scale(double a, double* x, int n) { POSELIFT_DISPATCH(scale, a, x, n); }

void vsub(const double* x, const double* y, double* out, int n) {
  POSELIFT_DISPATCH(vsub, x, y, out, n);
}

void add_bias(double* ym, int rows, int cols, const double* bias) {
  POSELIFT_DISPATCH(add_bias, ym, rows, cols, bias);
}

void relu_forward(const double* x, double* y, int n) { POSELIFT_DISPATCH(relu_forward, x, y, n); }

void relu_backward(const double* dy, const double* y, double* dx, int n) {
  POSELIFT_DISPATCH(relu_backward, dy, y, dx, n);
}

void dropout_apply(const double* x, const uint8_t* keep, double inv_keep, double* y, int n) {
  POSELIFT_DISPATCH(dropout_apply, x, keep, inv_keep, y, n);
}

void colwise_sum(const double* x, int rows, int cols, double* out) {
  POSELIFT_DISPATCH(colwise_sum, x, rows, cols, out);
}

void colwise_dot(const double* x, const double* y, int rows, int cols, double* out) {
  POSELIFT_DISPATCH(colwise_dot, x, y, rows, cols, out);
}

void colwise_mean_var(const double* x, int rows, int cols, double* mean, double* var) {
  POSELIFT_DISPATCH(colwise_mean_var, x, rows, cols, mean, var);
}

void bn_apply(const double* x, int rows, int cols, const double* mean, const double* inv_std,
              const double* gamma, const double* beta, double* xhat, double* y) {
  POSELIFT_DISPATCH(bn_apply, x, rows, cols, mean, inv_std, gamma, beta, xhat, y);
}

void bn_backward_input(const double* dy, const double* xhat, int rows, int cols,
                       const double* gamma, const double* inv_std, const double* sum_dy,
                       const double* sum_dyx, double* dx) {
  POSELIFT_DISPATCH(bn_backward_input, dy, xhat, rows, cols, gamma, inv_std, sum_dy, sum_dyx, dx);
}

void adam_update(double* w, const double* g, double* m, double* v, int n, double lr, double beta1,
                 double beta2, double eps, double bias1, double bias2, double weight_decay) {
  POSELIFT_DISPATCH(adam_update, w, g, m, v, n, lr, beta1, beta2, eps, bias1, bias2, weight_decay);
}

void renorm_rows(double* w, int rows, int cols, double max_norm) {
  POSELIFT_DISPATCH(renorm_rows, w, rows, cols, max_norm);
}

ScanResult scan_quadratic_argmin(const double* alpha, const double* beta, const double* r0,
                                 const double* s0, int n, double t0, double step, int count,
                                 double* loss_buf, double tie_eps) {
#ifdef POSELIFT_X86
  if (g_backend == Backend::Avx2)
    avx2::scan_losses(alpha, beta, r0, s0, n, t0, step, count, loss_buf);
  else
    scalar::scan_losses(alpha, beta, r0, s0, n, t0, step, count, loss_buf);
#else
  scalar::scan_losses(alpha, beta, r0, s0, n, t0, step, count, loss_buf);
#endif
  // Shared scalar argmin: the fill is bit-identical across backends, and a
  // two-pass sweep makes the tie rule (smallest index within tie_eps of the
  // minimum) independent of traversal tricks.
  double best = loss_buf[0];
  for (int j = 1; j < count; ++j)
    if (loss_buf[j] < best) best = loss_buf[j];
  for (int j = 0; j < count; ++j)
    if (loss_buf[j] <= best + tie_eps) return ScanResult{j, loss_buf[j]};
  return ScanResult{0, loss_buf[0]};
}

}  // namespace poselift::kernels

#undef POSELIFT_DISPATCH
#undef POSELIFT_DISPATCH_RET
