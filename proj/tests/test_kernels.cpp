// Backend equivalence: every kernel under Scalar vs Avx2. Element-wise
// kernels must agree bit for bit; reductions within tight tolerances of a
// naive oracle evaluated in the test.

#include <array>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <doctest.h>

#include "poselift/kernels.hpp"
#include "poselift/rng.hpp"

using namespace poselift;
namespace k = poselift::kernels;

namespace {

const std::vector<int> kSizes = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 64, 100, 257};

struct BackendGuard {
  k::Backend saved = k::active_backend();
  ~BackendGuard() { k::set_backend(saved); }
};

std::vector<double> randvec(Rng& rng, int n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Runs `fill` under both backends and requires bitwise-identical output.
template <typename Fill>
void check_bitwise(int out_n, Fill&& fill) {
  BackendGuard guard;
  k::set_backend(k::Backend::Scalar);
  std::vector<double> ref(out_n);
  fill(ref.data());
  if (!k::cpu_supports_avx2()) return;
  k::set_backend(k::Backend::Avx2);
  std::vector<double> got(out_n);
  fill(got.data());
  CHECK(bitwise_equal(ref, got));
}

}  // namespace

TEST_CASE("backend dispatch") {
  CHECK(std::string(k::backend_name(k::Backend::Scalar)) == "scalar");
  CHECK(std::string(k::backend_name(k::Backend::Avx2)) == "avx2");
  BackendGuard guard;
  k::set_backend(k::Backend::Scalar);
  CHECK(k::active_backend() == k::Backend::Scalar);
  if (k::cpu_supports_avx2()) {
    k::set_backend(k::Backend::Avx2);
    CHECK(k::active_backend() == k::Backend::Avx2);
  } else {
    CHECK_THROWS(k::set_backend(k::Backend::Avx2));
  }
}

TEST_CASE("element-wise kernels are bit-identical across backends") {
  Rng rng(21);
  for (int n : kSizes) {
    const auto x = randvec(rng, n), y = randvec(rng, n);

    check_bitwise(n, [&](double* out) { k::relu_forward(x.data(), out, n); });

    std::vector<double> relu_out(n);
    k::relu_forward(x.data(), relu_out.data(), n);
    check_bitwise(n, [&](double* out) { k::relu_backward(y.data(), relu_out.data(), out, n); });

    std::vector<uint8_t> keep(n);
    for (auto& m : keep) m = rng.uniform() < 0.6 ? 1 : 0;
    check_bitwise(n, [&](double* out) { k::dropout_apply(x.data(), keep.data(), 1.25, out, n); });

    check_bitwise(n, [&](double* out) { k::vsub(x.data(), y.data(), out, n); });

    check_bitwise(n, [&](double* out) {
      std::memcpy(out, y.data(), n * sizeof(double));
      k::axpy(0.37, x.data(), out, n);
    });
    check_bitwise(n, [&](double* out) {
      std::memcpy(out, x.data(), n * sizeof(double));
      k::scale(-1.83, out, n);
    });
  }
}

TEST_CASE("adam_update is bit-identical across backends") {
  Rng rng(22);
  for (int n : kSizes) {
    const auto w0 = randvec(rng, n), g = randvec(rng, n);
    const auto m0 = randvec(rng, n, 0.0, 0.1), v0 = randvec(rng, n, 0.0, 0.1);
    BackendGuard guard;
    auto run = [&](k::Backend b, std::vector<double>& w, std::vector<double>& m,
                   std::vector<double>& v) {
      k::set_backend(b);
      w = w0;
      m = m0;
      v = v0;
      k::adam_update(w.data(), g.data(), m.data(), v.data(), n, 1e-3, 0.9, 0.99, 1e-8, 0.1,
                     0.0199, 1e-4);
    };
    std::vector<double> ws, ms, vs;
    run(k::Backend::Scalar, ws, ms, vs);
    if (!k::cpu_supports_avx2()) continue;
    std::vector<double> wa, ma, va;
    run(k::Backend::Avx2, wa, ma, va);
    CHECK(bitwise_equal(ws, wa));
    CHECK(bitwise_equal(ms, ma));
    CHECK(bitwise_equal(vs, va));
  }
}

TEST_CASE("batchnorm kernels are bit-identical across backends") {
  Rng rng(23);
  for (int rows : {1, 2, 3, 5, 8, 17}) {
    for (int cols : {1, 3, 4, 8, 19, 64}) {
      const auto x = randvec(rng, rows * cols), dy = randvec(rng, rows * cols);
      const auto gamma = randvec(rng, cols, 0.5, 1.5), beta = randvec(rng, cols);
      const auto mean = randvec(rng, cols), inv_std = randvec(rng, cols, 0.7, 1.4);

      check_bitwise(cols, [&](double* out) { k::colwise_sum(x.data(), rows, cols, out); });
      check_bitwise(cols,
                    [&](double* out) { k::colwise_dot(x.data(), dy.data(), rows, cols, out); });
      check_bitwise(2 * cols, [&](double* out) {
        k::colwise_mean_var(x.data(), rows, cols, out, out + cols);
      });

      std::vector<double> xhat(rows * cols);
      check_bitwise(rows * cols, [&](double* out) {
        k::bn_apply(x.data(), rows, cols, mean.data(), inv_std.data(), gamma.data(), beta.data(),
                    xhat.data(), out);
      });

      std::vector<double> sum_dy(cols), sum_dyx(cols);
      k::colwise_sum(dy.data(), rows, cols, sum_dy.data());
      k::colwise_dot(dy.data(), xhat.data(), rows, cols, sum_dyx.data());
      check_bitwise(rows * cols, [&](double* out) {
        k::bn_backward_input(dy.data(), xhat.data(), rows, cols, gamma.data(), inv_std.data(),
                             sum_dy.data(), sum_dyx.data(), out);
      });

      check_bitwise(rows * cols, [&](double* out) {
        std::memcpy(out, x.data(), rows * cols * sizeof(double));
        k::add_bias(out, rows, cols, beta.data());
      });

      check_bitwise(rows * cols, [&](double* out) {
        std::memcpy(out, x.data(), rows * cols * sizeof(double));
        k::renorm_rows(out, rows, cols, 0.8);
      });
    }
  }
}

TEST_CASE("renorm_rows caps exactly the rows above the limit") {
  std::vector<double> w = {3.0, 4.0,    // norm 5 -> rescaled to 2
                           0.3, 0.4};   // norm 0.5 -> untouched
  k::renorm_rows(w.data(), 2, 2, 2.0);
  CHECK(w[0] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(w[2] == 0.3);
  CHECK(w[3] == 0.4);
  CHECK(std::sqrt(w[0] * w[0] + w[1] * w[1]) <= 2.0 + 1e-9);
}

namespace {

void naive_gemm_nt(const double* a, int m, int kk, const double* b, int n, double* c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < kk; ++l) acc += a[i * kk + l] * b[j * kk + l];
      c[i * n + j] = acc;
    }
}

void naive_gemm_nn(const double* a, int m, int kk, const double* b, int n, double* c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < kk; ++l) acc += a[i * kk + l] * b[l * n + j];
      c[i * n + j] = acc;
    }
}

void naive_gemm_tn(const double* a, int kk, int m, const double* b, int n, double* c) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < kk; ++l) acc += a[l * m + i] * b[l * n + j];
      c[i * n + j] = acc;
    }
}

void check_close(const std::vector<double>& got, const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    const double tol = 1e-10 + 1e-12 * std::abs(want[i]);
    CHECK(std::abs(got[i] - want[i]) <= tol);
  }
}

}  // namespace

TEST_CASE("gemm variants match the naive oracle on both backends") {
  Rng rng(24);
  BackendGuard guard;
  for (const auto& [m, kk, n] : std::vector<std::array<int, 3>>{
           {1, 1, 1}, {2, 3, 4}, {5, 8, 3}, {7, 17, 9}, {16, 16, 16}, {13, 64, 21},
           {64, 33, 48}}) {
    const auto a = randvec(rng, m * kk), bt = randvec(rng, n * kk);
    const auto b = randvec(rng, kk * n), at = randvec(rng, kk * m);

    std::vector<double> want(m * n), got(m * n);
    for (k::Backend backend : {k::Backend::Scalar, k::Backend::Avx2}) {
      if (backend == k::Backend::Avx2 && !k::cpu_supports_avx2()) continue;
      k::set_backend(backend);

      naive_gemm_nt(a.data(), m, kk, bt.data(), n, want.data());
      k::gemm_nt(a.data(), m, kk, bt.data(), n, got.data(), false);
      check_close(got, want);
      // accumulate adds on top of the existing values
      k::gemm_nt(a.data(), m, kk, bt.data(), n, got.data(), true);
      for (double& wv : want) wv *= 2.0;
      check_close(got, want);

      naive_gemm_nn(a.data(), m, kk, b.data(), n, want.data());
      k::gemm_nn(a.data(), m, kk, b.data(), n, got.data(), false);
      check_close(got, want);

      naive_gemm_tn(at.data(), kk, m, b.data(), n, want.data());
      k::gemm_tn(at.data(), kk, m, b.data(), n, got.data(), false);
      check_close(got, want);
    }
  }
}

TEST_CASE("dot and sumsq match the oracle on both backends") {
  Rng rng(25);
  BackendGuard guard;
  for (int n : kSizes) {
    const auto x = randvec(rng, n), y = randvec(rng, n);
    double want_dot = 0.0, want_ss = 0.0;
    for (int i = 0; i < n; ++i) {
      want_dot += x[i] * y[i];
      want_ss += x[i] * x[i];
    }
    for (k::Backend backend : {k::Backend::Scalar, k::Backend::Avx2}) {
      if (backend == k::Backend::Avx2 && !k::cpu_supports_avx2()) continue;
      k::set_backend(backend);
      CHECK(std::abs(k::dot(x.data(), y.data(), n) - want_dot) <= 1e-10);
      CHECK(std::abs(k::sumsq(x.data(), n) - want_ss) <= 1e-10);
    }
  }
}

TEST_CASE("scan_quadratic_argmin agrees bitwise across backends") {
  Rng rng(26);
  BackendGuard guard;
  for (int n : {1, 2, 5, 16}) {
    for (int count : {1, 2, 3, 4, 5, 9, 100, 1003}) {
      const auto alpha = randvec(rng, n), beta = randvec(rng, n);
      const auto r0 = randvec(rng, n, -50.0, 50.0), s0 = randvec(rng, n, -50.0, 50.0);
      const double t0 = rng.uniform(0.0, 10.0), step = rng.uniform(0.5, 2.0);

      k::set_backend(k::Backend::Scalar);
      std::vector<double> loss_s(count);
      const k::ScanResult rs = k::scan_quadratic_argmin(alpha.data(), beta.data(), r0.data(),
                                                        s0.data(), n, t0, step, count,
                                                        loss_s.data(), 1e-12);
      // Oracle: evaluate the quadratic directly.
      for (int j = 0; j < count; ++j) {
        const double t = t0 + step * j;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const double e1 = r0[i] + alpha[i] * t;
          const double e2 = s0[i] + beta[i] * t;
          acc += e1 * e1 + e2 * e2;
        }
        CHECK(std::abs(loss_s[j] - acc) <= 1e-9 * (1.0 + acc));
        CHECK(loss_s[rs.index] <= loss_s[j] + 1e-12);
      }

      if (!k::cpu_supports_avx2()) continue;
      k::set_backend(k::Backend::Avx2);
      std::vector<double> loss_a(count);
      const k::ScanResult ra = k::scan_quadratic_argmin(alpha.data(), beta.data(), r0.data(),
                                                        s0.data(), n, t0, step, count,
                                                        loss_a.data(), 1e-12);
      CHECK(bitwise_equal(loss_s, loss_a));
      CHECK(rs.index == ra.index);
      CHECK(rs.loss == ra.loss);
    }
  }
}

TEST_CASE("scan ties resolve to the smallest candidate") {
  // Single ray, loss = (t - 2.5)^2: candidates 2 and 3 tie exactly.
  const double alpha = 1.0, beta = 0.0, r0 = -2.5, s0 = 0.0;
  std::vector<double> buf(6);
  const k::ScanResult r =
      k::scan_quadratic_argmin(&alpha, &beta, &r0, &s0, 1, 0.0, 1.0, 6, buf.data(), 1e-12);
  CHECK(buf[2] == buf[3]);
  CHECK(r.index == 2);
}
