#pragma once

#include "poselift/kernels.hpp"

// Per-backend entry points. Signatures mirror the public API exactly; the
// dispatch layer forwards to one of these namespaces.

#define POSELIFT_KERNEL_DECLS                                                                    \
  void gemm_nt(const double* a, int m, int k, const double* b, int n, double* c,                 \
               bool accumulate);                                                                 \
  void gemm_nn(const double* a, int m, int k, const double* b, int n, double* c,                 \
               bool accumulate);                                                                 \
  void gemm_tn(const double* a, int k, int m, const double* b, int n, double* c,                 \
               bool accumulate);                                                                 \
  double dot(const double* x, const double* y, int n);                                           \
  double sumsq(const double* x, int n);                                                          \
  void axpy(double a, const double* x, double* y, int n);                                        \
  void scale(double a, double* x, int n);                                                        \
  void vsub(const double* x, const double* y, double* out, int n);                               \
  void add_bias(double* ym, int rows, int cols, const double* bias);                             \
  void relu_forward(const double* x, double* y, int n);                                          \
  void relu_backward(const double* dy, const double* y, double* dx, int n);                      \
  void dropout_apply(const double* x, const uint8_t* keep, double inv_keep, double* y, int n);   \
  void colwise_sum(const double* x, int rows, int cols, double* out);                            \
  void colwise_dot(const double* x, const double* y, int rows, int cols, double* out);           \
  void colwise_mean_var(const double* x, int rows, int cols, double* mean, double* var);         \
  void bn_apply(const double* x, int rows, int cols, const double* mean, const double* inv_std,  \
                const double* gamma, const double* beta, double* xhat, double* y);               \
  void bn_backward_input(const double* dy, const double* xhat, int rows, int cols,               \
                         const double* gamma, const double* inv_std, const double* sum_dy,       \
                         const double* sum_dyx, double* dx);                                     \
  void adam_update(double* w, const double* g, double* m, double* v, int n, double lr,           \
                   double beta1, double beta2, double eps, double bias1, double bias2,           \
                   double weight_decay);                                                         \
  void renorm_rows(double* w, int rows, int cols, double max_norm);                              \
  void scan_losses(const double* alpha, const double* beta, const double* r0, const double* s0,  \
                   int n, double t0, double step, int count, double* loss_buf);

namespace poselift::kernels::scalar {
POSELIFT_KERNEL_DECLS
}

#if defined(__x86_64__) || defined(_M_X64)
#define POSELIFT_X86 1
namespace poselift::kernels::avx2 {
POSELIFT_KERNEL_DECLS
}
#endif
