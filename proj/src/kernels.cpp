#include "mimolab/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "mimolab/parallel.hpp"

namespace mimolab::kern {

namespace detail {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool cpu_has_avx512() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx512f") &&
           __builtin_cpu_supports("avx512dq") &&
           __builtin_cpu_supports("avx512vl");
#else
    return false;
#endif
}

namespace {

Backend pick_default() {
    if (const char* env = std::getenv("MIMOLAB_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2())
            return Backend::kAvx2;
        if (std::strcmp(env, "avx512") == 0 && cpu_has_avx512())
            return Backend::kAvx512;
    }
    // AVX2 is preferred over AVX-512: on the deployment parts the 512-bit
    // units are double-pumped and the measured GEMM throughput is lower.
    // MIMOLAB_KERNELS=avx512 opts in where wide units are genuinely faster.
    if (cpu_has_avx2()) return Backend::kAvx2;
    if (cpu_has_avx512()) return Backend::kAvx512;
    return Backend::kScalar;
}

struct Active {
    Backend backend;
    KernelTable table;
    Active() { select(pick_default()); }
    void select(Backend b) {
        backend = b;
        switch (b) {
            case Backend::kAvx512: table = avx512_table(); break;
            case Backend::kAvx2: table = avx2_table(); break;
            default: table = scalar_table(); break;
        }
    }
};

Active& active() {
    static Active a;
    return a;
}

}  // namespace

const KernelTable& active_table() { return active().table; }

}  // namespace detail

Backend active_backend() { return detail::active().backend; }

const char* backend_name() {
    switch (active_backend()) {
        case Backend::kAvx512: return "avx512";
        case Backend::kAvx2: return "avx2";
        default: return "scalar";
    }
}

bool set_backend(Backend b) {
    if (b == Backend::kAvx2 && !detail::cpu_has_avx2()) return false;
    if (b == Backend::kAvx512 && !detail::cpu_has_avx512()) return false;
    detail::active().select(b);
    return true;
}

void dgemm(bool ta, bool tb, int m, int n, int k, double alpha,
           const double* a, int lda, const double* b, int ldb, double beta,
           double* c, int ldc) {
    detail::active().table.dgemm_rows(ta, tb, m, n, k, alpha, a, lda, b, ldb,
                                      beta, c, ldc, 0, m);
}

void dgemm_mt(bool ta, bool tb, int m, int n, int k, double alpha,
              const double* a, int lda, const double* b, int ldb, double beta,
              double* c, int ldc) {
    ThreadPool& pool = global_pool();
    const double work = static_cast<double>(m) * n * k;
    if (pool.size() <= 1 || work < 2e5 || m < 2) {
        dgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
        return;
    }
    // Row chunks rounded to the widest microkernel height so no block
    // straddles a chunk boundary.
    const int grain = 8;
    int chunk = (m + static_cast<int>(pool.size()) - 1) /
                static_cast<int>(pool.size());
    chunk = (chunk + grain - 1) / grain * grain;
    const int nchunks = (m + chunk - 1) / chunk;
    const detail::KernelTable& t = detail::active().table;
    pool.run(static_cast<size_t>(nchunks), [&](size_t ci) {
        const int r0 = static_cast<int>(ci) * chunk;
        const int r1 = r0 + chunk < m ? r0 + chunk : m;
        t.dgemm_rows(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc, r0,
                     r1);
    });
}

void relu(const double* x, double* y, size_t n) {
    detail::active().table.relu(x, y, n);
}
void relu_grad(const double* x, const double* dy, double* dx, size_t n) {
    detail::active().table.relu_grad(x, dy, dx, n);
}
void add_bias(double* x, const double* b, int rows, int cols) {
    detail::active().table.add_bias(x, b, rows, cols);
}
void col_sums(const double* x, int rows, int cols, double* b) {
    detail::active().table.col_sums(x, rows, cols, b);
}
double sum_sq(const double* x, size_t n) {
    return detail::active().table.sum_sq(x, n);
}
double dot(const double* x, const double* y, size_t n) {
    return detail::active().table.dot(x, y, n);
}
void axpy(double a, const double* x, double* y, size_t n) {
    detail::active().table.axpy(a, x, y, n);
}
void scal(double a, double* x, size_t n) {
    detail::active().table.scal(a, x, n);
}
int argmin_sqdist(const double* y, const double* pts, int npts, int d,
                  double scale, double* best) {
    return detail::active().table.argmin_sqdist(y, pts, npts, d, scale, best);
}

void softmax_rows(double* x, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* xr = x + static_cast<size_t>(r) * cols;
        double mx = xr[0];
        for (int j = 1; j < cols; ++j) mx = xr[j] > mx ? xr[j] : mx;
        double s = 0.0;
        for (int j = 0; j < cols; ++j) {
            xr[j] = std::exp(xr[j] - mx);
            s += xr[j];
        }
        const double inv = 1.0 / s;
        for (int j = 0; j < cols; ++j) xr[j] *= inv;
    }
}

}  // namespace mimolab::kern
