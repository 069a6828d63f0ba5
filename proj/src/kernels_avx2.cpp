// AVX2/FMA backend. Compiled with -mavx2 -mfma in its own TU; entered only
// when cpuid reports support, so no other TU may call these symbols
// directly. GEMM uses a 6x8 f64 microkernel over packed A/B panels with
// KC/MC cache blocking.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstring>
#include <limits>
#include <vector>

#include "mimolab/kernels.hpp"

namespace mimolab::kern::detail {
namespace {

constexpr int MR = 6;
constexpr int NR = 8;  // two ymm lanes
constexpr int KC = 256;
constexpr int MC = 96;

inline double at(const double* p, int ld, bool trans, int i, int j) {
    return trans ? p[static_cast<size_t>(j) * ld + i]
                 : p[static_cast<size_t>(i) * ld + j];
}

// acc = sum_k Ap[k, 0:MR] * Bp[k, 0:NR]; Ap is k-major with stride MR,
// Bp k-major with stride NR.
__attribute__((target("avx2,fma"))) inline void micro_6x8(
    int kc, const double* ap, const double* bp, __m256d acc[MR][2]) {
    for (int r = 0; r < MR; ++r) {
        acc[r][0] = _mm256_setzero_pd();
        acc[r][1] = _mm256_setzero_pd();
    }
    for (int kk = 0; kk < kc; ++kk) {
        const __m256d b0 = _mm256_loadu_pd(bp + kk * NR);
        const __m256d b1 = _mm256_loadu_pd(bp + kk * NR + 4);
        const double* arow = ap + kk * MR;
        for (int r = 0; r < MR; ++r) {
            const __m256d av = _mm256_set1_pd(arow[r]);
            acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
            acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
        }
    }
}

__attribute__((target("avx2,fma"))) void dgemm_rows_avx2(
    bool ta, bool tb, int m, int n, int k, double alpha, const double* a,
    int lda, const double* b, int ldb, double beta, double* c, int ldc,
    int r0, int r1) {
    (void)m;
    if (r1 <= r0 || n <= 0) return;
    if (k <= 0) {
        for (int i = r0; i < r1; ++i) {
            double* cr = c + static_cast<size_t>(i) * ldc;
            if (beta == 0.0)
                std::memset(cr, 0, sizeof(double) * n);
            else
                for (int j = 0; j < n; ++j) cr[j] *= beta;
        }
        return;
    }

    const int njb = (n + NR - 1) / NR;
    std::vector<double> bp(static_cast<size_t>(njb) * KC * NR);
    std::vector<double> apanel(static_cast<size_t>(MC) * KC);
    const __m256d valpha = _mm256_set1_pd(alpha);

    for (int k0 = 0; k0 < k; k0 += KC) {
        const int kc = k < k0 + KC ? k - k0 : KC;
        const bool first = k0 == 0;

        for (int jb = 0; jb < njb; ++jb) {
            double* dst = bp.data() + static_cast<size_t>(jb) * kc * NR;
            const int nr = n - jb * NR < NR ? n - jb * NR : NR;
            for (int kk = 0; kk < kc; ++kk) {
                for (int jj = 0; jj < nr; ++jj)
                    dst[kk * NR + jj] = at(b, ldb, tb, k0 + kk, jb * NR + jj);
                for (int jj = nr; jj < NR; ++jj) dst[kk * NR + jj] = 0.0;
            }
        }

        for (int i0 = r0; i0 < r1; i0 += MC) {
            const int mc = r1 - i0 < MC ? r1 - i0 : MC;
            const int npan = (mc + MR - 1) / MR;
            for (int p = 0; p < npan; ++p) {
                double* dst = apanel.data() + static_cast<size_t>(p) * MR * kc;
                const int mr = mc - p * MR < MR ? mc - p * MR : MR;
                for (int kk = 0; kk < kc; ++kk) {
                    for (int r = 0; r < mr; ++r)
                        dst[kk * MR + r] =
                            at(a, lda, ta, i0 + p * MR + r, k0 + kk);
                    for (int r = mr; r < MR; ++r) dst[kk * MR + r] = 0.0;
                }
            }

            for (int p = 0; p < npan; ++p) {
                const int mr = mc - p * MR < MR ? mc - p * MR : MR;
                const double* ap =
                    apanel.data() + static_cast<size_t>(p) * MR * kc;
                for (int jb = 0; jb < njb; ++jb) {
                    const int nr = n - jb * NR < NR ? n - jb * NR : NR;
                    __m256d acc[MR][2];
                    micro_6x8(kc, ap,
                              bp.data() + static_cast<size_t>(jb) * kc * NR,
                              acc);
                    double* cblk = c +
                                   static_cast<size_t>(i0 + p * MR) * ldc +
                                   jb * NR;
                    if (mr == MR && nr == NR) {
                        for (int r = 0; r < MR; ++r) {
                            double* cr = cblk + static_cast<size_t>(r) * ldc;
                            __m256d c0, c1;
                            if (first && beta == 0.0) {
                                c0 = _mm256_mul_pd(valpha, acc[r][0]);
                                c1 = _mm256_mul_pd(valpha, acc[r][1]);
                            } else {
                                c0 = _mm256_loadu_pd(cr);
                                c1 = _mm256_loadu_pd(cr + 4);
                                if (first && beta != 1.0) {
                                    const __m256d vb = _mm256_set1_pd(beta);
                                    c0 = _mm256_mul_pd(c0, vb);
                                    c1 = _mm256_mul_pd(c1, vb);
                                }
                                c0 = _mm256_fmadd_pd(valpha, acc[r][0], c0);
                                c1 = _mm256_fmadd_pd(valpha, acc[r][1], c1);
                            }
                            _mm256_storeu_pd(cr, c0);
                            _mm256_storeu_pd(cr + 4, c1);
                        }
                    } else {
                        double spill[MR * NR];
                        for (int r = 0; r < MR; ++r) {
                            _mm256_storeu_pd(spill + r * NR, acc[r][0]);
                            _mm256_storeu_pd(spill + r * NR + 4, acc[r][1]);
                        }
                        for (int r = 0; r < mr; ++r) {
                            double* cr = cblk + static_cast<size_t>(r) * ldc;
                            for (int jj = 0; jj < nr; ++jj) {
                                const double v = alpha * spill[r * NR + jj];
                                if (first && beta == 0.0)
                                    cr[jj] = v;
                                else if (first)
                                    cr[jj] = beta * cr[jj] + v;
                                else
                                    cr[jj] += v;
                            }
                        }
                    }
                }
            }
        }
    }
}

__attribute__((target("avx2"))) void relu_avx2(const double* x, double* y,
                                               size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

__attribute__((target("avx2"))) void relu_grad_avx2(const double* x,
                                                    const double* dy,
                                                    double* dx, size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask =
            _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(dx + i,
                         _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

__attribute__((target("avx2"))) void add_bias_avx2(double* x, const double* b,
                                                   int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* xr = x + static_cast<size_t>(r) * cols;
        int j = 0;
        for (; j + 4 <= cols; j += 4)
            _mm256_storeu_pd(
                xr + j,
                _mm256_add_pd(_mm256_loadu_pd(xr + j), _mm256_loadu_pd(b + j)));
        for (; j < cols; ++j) xr[j] += b[j];
    }
}

__attribute__((target("avx2"))) void col_sums_avx2(const double* x, int rows,
                                                   int cols, double* b) {
    for (int r = 0; r < rows; ++r) {
        const double* xr = x + static_cast<size_t>(r) * cols;
        int j = 0;
        for (; j + 4 <= cols; j += 4)
            _mm256_storeu_pd(
                b + j,
                _mm256_add_pd(_mm256_loadu_pd(b + j), _mm256_loadu_pd(xr + j)));
        for (; j < cols; ++j) b[j] += xr[j];
    }
}

// Lane-wise partial sums then an in-order horizontal reduce; lane layout is
// fixed so the result does not depend on n's remainder handling.
__attribute__((target("avx2,fma"))) double sum_sq_avx2(const double* x,
                                                       size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double s = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

__attribute__((target("avx2,fma"))) double dot_avx2(const double* x,
                                                    const double* y,
                                                    size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                              acc);
    double lanes[4];
    _mm256_storeu_pd(lanes, acc);
    double s = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

__attribute__((target("avx2,fma"))) void axpy_avx2(double a, const double* x,
                                                   double* y, size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(
            y + i,
            _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2"))) void scal_avx2(double a, double* x, size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

__attribute__((target("avx2,fma"))) int argmin_sqdist_avx2(
    const double* y, const double* pts, int npts, int d, double scale,
    double* best) {
    const __m256d vs = _mm256_set1_pd(scale);
    int arg = 0;
    double bv = std::numeric_limits<double>::infinity();
    for (int p = 0; p < npts; ++p) {
        const double* row = pts + static_cast<size_t>(p) * d;
        __m256d acc = _mm256_setzero_pd();
        int j = 0;
        for (; j + 4 <= d; j += 4) {
            const __m256d diff = _mm256_sub_pd(
                _mm256_loadu_pd(y + j),
                _mm256_mul_pd(vs, _mm256_loadu_pd(row + j)));
            acc = _mm256_fmadd_pd(diff, diff, acc);
        }
        double lanes[4];
        _mm256_storeu_pd(lanes, acc);
        double s = ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
        for (; j < d; ++j) {
            const double diff = y[j] - scale * row[j];
            s += diff * diff;
        }
        if (s < bv) {
            bv = s;
            arg = p;
        }
    }
    if (best) *best = bv;
    return arg;
}

}  // namespace

KernelTable avx2_table() {
    KernelTable t;
    t.dgemm_rows = dgemm_rows_avx2;
    t.relu = relu_avx2;
    t.relu_grad = relu_grad_avx2;
    t.add_bias = add_bias_avx2;
    t.col_sums = col_sums_avx2;
    t.sum_sq = sum_sq_avx2;
    t.dot = dot_avx2;
    t.axpy = axpy_avx2;
    t.scal = scal_avx2;
    t.argmin_sqdist = argmin_sqdist_avx2;
    return t;
}

}  // namespace mimolab::kern::detail

#else

#include "mimolab/kernels.hpp"

namespace mimolab::kern::detail {
KernelTable avx2_table() { return scalar_table(); }
}  // namespace mimolab::kern::detail

#endif
