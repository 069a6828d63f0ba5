#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "doctest.h"
#include "mimolab/kernels.hpp"
#include "mimolab/parallel.hpp"

using namespace mimolab;
namespace kd = mimolab::kern::detail;

namespace {

std::vector<double> random_vec(size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(gen);
    return v;
}

// Naive triple loop kept independent of the shipped scalar backend.
void gemm_naive(bool ta, bool tb, int m, int n, int k, double alpha,
                const double* a, int lda, const double* b, int ldb,
                double beta, double* c, int ldc) {
    auto A = [&](int i, int kk) { return ta ? a[kk * lda + i] : a[i * lda + kk]; };
    auto B = [&](int kk, int j) { return tb ? b[j * ldb + kk] : b[kk * ldb + j]; };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int kk = 0; kk < k; ++kk) s += A(i, kk) * B(kk, j);
            c[i * ldc + j] = beta * c[i * ldc + j] + alpha * s;
        }
}

std::vector<kern::Backend> available_backends() {
    std::vector<kern::Backend> b{kern::Backend::kScalar};
    if (kd::cpu_has_avx2()) b.push_back(kern::Backend::kAvx2);
    if (kd::cpu_has_avx512()) b.push_back(kern::Backend::kAvx512);
    return b;
}

struct BackendRestore {
    kern::Backend saved = kern::active_backend();
    ~BackendRestore() { kern::set_backend(saved); }
};

}  // namespace

TEST_CASE("dgemm matches naive reference on every backend") {
    BackendRestore restore;
    std::mt19937_64 gen(7);
    struct Shape { int m, n, k; bool ta, tb; double alpha, beta; };
    std::vector<Shape> shapes = {
        {1, 1, 1, false, false, 1.0, 0.0},
        {5, 3, 7, false, false, 1.0, 0.0},
        {17, 19, 23, false, true, 2.0, 0.5},
        {64, 64, 64, false, false, 1.0, 0.0},
        {33, 130, 70, true, false, -1.5, 1.0},
        {97, 23, 300, true, true, 1.0, 0.0},
        {128, 4, 1024, false, true, 1.0, 0.0},
        {6, 16, 2, false, false, 1.0, 0.0},
        {200, 257, 31, false, false, 0.7, 0.3},
    };
    for (const auto& s : shapes) {
        const int am = s.ta ? s.k : s.m, an = s.ta ? s.m : s.k;
        const int bm = s.tb ? s.n : s.k, bn = s.tb ? s.k : s.n;
        auto a = random_vec(static_cast<size_t>(am) * an, gen());
        auto b = random_vec(static_cast<size_t>(bm) * bn, gen());
        auto c0 = random_vec(static_cast<size_t>(s.m) * s.n, gen());
        auto want = c0;
        gemm_naive(s.ta, s.tb, s.m, s.n, s.k, s.alpha, a.data(), an, b.data(),
                   bn, s.beta, want.data(), s.n);
        for (auto backend : available_backends()) {
            REQUIRE(kern::set_backend(backend));
            auto got = c0;
            kern::dgemm(s.ta, s.tb, s.m, s.n, s.k, s.alpha, a.data(), an,
                        b.data(), bn, s.beta, got.data(), s.n);
            double worst = 0.0;
            for (size_t i = 0; i < got.size(); ++i)
                worst = std::max(worst, std::abs(got[i] - want[i]));
            CAPTURE(static_cast<int>(backend));
            CAPTURE(s.m);
            CAPTURE(s.n);
            CAPTURE(s.k);
            CHECK(worst < 1e-10 * (1.0 + s.k));
        }
    }
}

TEST_CASE("dgemm_mt is bitwise identical to single-threaded dgemm") {
    BackendRestore restore;
    const int m = 301, n = 257, k = 129;
    auto a = random_vec(static_cast<size_t>(m) * k, 1);
    auto b = random_vec(static_cast<size_t>(k) * n, 2);
    for (auto backend : available_backends()) {
        REQUIRE(kern::set_backend(backend));
        std::vector<double> c1(static_cast<size_t>(m) * n, 0.0);
        std::vector<double> c2 = c1;
        kern::dgemm(false, false, m, n, k, 1.0, a.data(), k, b.data(), n, 0.0,
                    c1.data(), n);
        set_global_workers(2);
        kern::dgemm_mt(false, false, m, n, k, 1.0, a.data(), k, b.data(), n,
                       0.0, c2.data(), n);
        CHECK(std::memcmp(c1.data(), c2.data(), c1.size() * 8) == 0);
        set_global_workers(0);
    }
}

TEST_CASE("vector kernels agree across backends") {
    BackendRestore restore;
    const size_t n = 1037;
    auto x = random_vec(n, 11);
    auto y = random_vec(n, 12);
    for (auto backend : available_backends()) {
        REQUIRE(kern::set_backend(backend));
        std::vector<double> r(n), g(n);
        kern::relu(x.data(), r.data(), n);
        kern::relu_grad(x.data(), y.data(), g.data(), n);
        for (size_t i = 0; i < n; ++i) {
            CHECK(r[i] == (x[i] > 0 ? x[i] : 0.0));
            CHECK(g[i] == (x[i] > 0 ? y[i] : 0.0));
        }
        const double ss = kern::sum_sq(x.data(), n);
        double ss_ref = 0;
        for (size_t i = 0; i < n; ++i) ss_ref += x[i] * x[i];
        CHECK(ss == doctest::Approx(ss_ref).epsilon(1e-13));
        const double d = kern::dot(x.data(), y.data(), n);
        double d_ref = 0;
        for (size_t i = 0; i < n; ++i) d_ref += x[i] * y[i];
        CHECK(d == doctest::Approx(d_ref).epsilon(1e-12));

        auto z = y;
        kern::axpy(0.37, x.data(), z.data(), n);
        for (size_t i = 0; i < n; ++i)
            CHECK(z[i] == doctest::Approx(y[i] + 0.37 * x[i]).epsilon(1e-14));
    }
}

TEST_CASE("add_bias and col_sums") {
    BackendRestore restore;
    const int rows = 13, cols = 37;
    auto x = random_vec(static_cast<size_t>(rows) * cols, 21);
    auto b = random_vec(cols, 22);
    for (auto backend : available_backends()) {
        REQUIRE(kern::set_backend(backend));
        auto xx = x;
        kern::add_bias(xx.data(), b.data(), rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int j = 0; j < cols; ++j)
                CHECK(xx[r * cols + j] == doctest::Approx(x[r * cols + j] + b[j]));
        std::vector<double> sums(cols, 0.0);
        kern::col_sums(x.data(), rows, cols, sums.data());
        for (int j = 0; j < cols; ++j) {
            double want = 0;
            for (int r = 0; r < rows; ++r) want += x[r * cols + j];
            CHECK(sums[j] == doctest::Approx(want).epsilon(1e-13));
        }
    }
}

TEST_CASE("argmin_sqdist finds the closest row with low-index ties") {
    BackendRestore restore;
    for (auto backend : available_backends()) {
        REQUIRE(kern::set_backend(backend));
        for (int d : {1, 2, 4, 7, 8, 12}) {
            auto pts = random_vec(static_cast<size_t>(64) * d, 31 + d);
            auto y = random_vec(d, 77 + d);
            double best = 0;
            const int got =
                kern::argmin_sqdist(y.data(), pts.data(), 64, d, 1.3, &best);
            int want = 0;
            double bv = 1e300;
            for (int p = 0; p < 64; ++p) {
                double s = 0;
                for (int j = 0; j < d; ++j) {
                    const double diff = y[j] - 1.3 * pts[p * d + j];
                    s += diff * diff;
                }
                if (s < bv) {
                    bv = s;
                    want = p;
                }
            }
            CHECK(got == want);
            CHECK(best == doctest::Approx(bv).epsilon(1e-12));
        }
        // Exact duplicate rows: the lower index must win.
        std::vector<double> pts = {2.0, 2.0, 1.0, 1.0, 1.0, 1.0};
        std::vector<double> y = {1.0, 1.0};
        CHECK(kern::argmin_sqdist(y.data(), pts.data(), 3, 2, 1.0, nullptr) == 1);
    }
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
    const int rows = 8, cols = 17;
    auto x = random_vec(static_cast<size_t>(rows) * cols, 5);
    auto shifted = x;
    for (int r = 0; r < rows; ++r)
        for (int j = 0; j < cols; ++j) shifted[r * cols + j] += 123.456;
    kern::softmax_rows(x.data(), rows, cols);
    kern::softmax_rows(shifted.data(), rows, cols);
    for (int r = 0; r < rows; ++r) {
        double s = 0;
        for (int j = 0; j < cols; ++j) s += x[r * cols + j];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        for (int j = 0; j < cols; ++j)
            CHECK(x[r * cols + j] ==
                  doctest::Approx(shifted[r * cols + j]).epsilon(1e-9));
    }
}

// Not an assertion; prints sustained GFLOP/s per backend so performance
// regressions in the microkernel are visible in test logs.
TEST_CASE("dgemm throughput report") {
    BackendRestore restore;
    const int m = 1280, n = 1024, k = 1024;
    auto a = random_vec(static_cast<size_t>(m) * k, 41);
    auto b = random_vec(static_cast<size_t>(k) * n, 42);
    std::vector<double> c(static_cast<size_t>(m) * n);
    for (auto backend : available_backends()) {
        REQUIRE(kern::set_backend(backend));
        for (int threads : {1, 2}) {
            set_global_workers(threads);
            const int reps = backend == kern::Backend::kScalar ? 1 : 4;
            kern::dgemm_mt(false, false, m, n, k, 1.0, a.data(), k, b.data(),
                           n, 0.0, c.data(), n);  // warm up
            auto t0 = std::chrono::steady_clock::now();
            for (int r = 0; r < reps; ++r)
                kern::dgemm_mt(false, false, m, n, k, 1.0, a.data(), k,
                               b.data(), n, 0.0, c.data(), n);
            auto t1 = std::chrono::steady_clock::now();
            const double sec =
                std::chrono::duration<double>(t1 - t0).count() / reps;
            const double gflops = 2.0 * m * n * k / sec / 1e9;
            std::printf("[bench] dgemm %dx%dx%d backend=%s threads=%d: %.1f GFLOP/s\n",
                        m, n, k, kern::backend_name(), threads, gflops);
        }
        set_global_workers(0);
    }
}
