// AVX-512 backend (F/DQ/VL). Same structure as the AVX2 backend with a
// wider 8x16 f64 microkernel and masked tails on the vector epilogues.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstring>
#include <limits>
#include <vector>

#include "mimolab/kernels.hpp"

namespace mimolab::kern::detail {
namespace {

constexpr int MR = 8;
constexpr int NR = 16;  // two zmm lanes
constexpr int KC = 256;
constexpr int MC = 96;

inline double at(const double* p, int ld, bool trans, int i, int j) {
    return trans ? p[static_cast<size_t>(j) * ld + i]
                 : p[static_cast<size_t>(i) * ld + j];
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) inline void micro_8x16(
    int kc, const double* ap, const double* bp, __m512d acc[MR][2]) {
    for (int r = 0; r < MR; ++r) {
        acc[r][0] = _mm512_setzero_pd();
        acc[r][1] = _mm512_setzero_pd();
    }
    for (int kk = 0; kk < kc; ++kk) {
        const __m512d b0 = _mm512_loadu_pd(bp + kk * NR);
        const __m512d b1 = _mm512_loadu_pd(bp + kk * NR + 8);
        const double* arow = ap + kk * MR;
        for (int r = 0; r < MR; ++r) {
            const __m512d av = _mm512_set1_pd(arow[r]);
            acc[r][0] = _mm512_fmadd_pd(av, b0, acc[r][0]);
            acc[r][1] = _mm512_fmadd_pd(av, b1, acc[r][1]);
        }
    }
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) void dgemm_rows_avx512(
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
                    __m512d acc[MR][2];
                    micro_8x16(kc, ap,
                               bp.data() + static_cast<size_t>(jb) * kc * NR,
                               acc);
                    double* cblk = c +
                                   static_cast<size_t>(i0 + p * MR) * ldc +
                                   jb * NR;
                    const __m512d valpha = _mm512_set1_pd(alpha);
                    for (int r = 0; r < mr; ++r) {
                        double* cr = cblk + static_cast<size_t>(r) * ldc;
                        const int n0 = nr < 8 ? nr : 8;
                        const int n1 = nr - n0;
                        const __mmask8 m0 = static_cast<__mmask8>(
                            (1u << n0) - 1u);
                        const __mmask8 m1 = static_cast<__mmask8>(
                            n1 > 0 ? (1u << n1) - 1u : 0u);
                        __m512d c0, c1;
                        if (first && beta == 0.0) {
                            c0 = _mm512_mul_pd(valpha, acc[r][0]);
                            c1 = _mm512_mul_pd(valpha, acc[r][1]);
                        } else {
                            c0 = _mm512_maskz_loadu_pd(m0, cr);
                            c1 = m1 ? _mm512_maskz_loadu_pd(m1, cr + 8)
                                    : _mm512_setzero_pd();
                            if (first && beta != 1.0) {
                                const __m512d vb = _mm512_set1_pd(beta);
                                c0 = _mm512_mul_pd(c0, vb);
                                c1 = _mm512_mul_pd(c1, vb);
                            }
                            c0 = _mm512_fmadd_pd(valpha, acc[r][0], c0);
                            c1 = _mm512_fmadd_pd(valpha, acc[r][1], c1);
                        }
                        _mm512_mask_storeu_pd(cr, m0, c0);
                        if (m1) _mm512_mask_storeu_pd(cr + 8, m1, c1);
                    }
                }
            }
        }
    }
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) void relu_avx512(
    const double* x, double* y, size_t n) {
    const __m512d zero = _mm512_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_max_pd(_mm512_loadu_pd(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) void relu_grad_avx512(
    const double* x, const double* dy, double* dx, size_t n) {
    const __m512d zero = _mm512_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __mmask8 gt =
            _mm512_cmp_pd_mask(_mm512_loadu_pd(x + i), zero, _CMP_GT_OQ);
        _mm512_storeu_pd(dx + i,
                         _mm512_maskz_mov_pd(gt, _mm512_loadu_pd(dy + i)));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) void add_bias_avx512(
    double* x, const double* b, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* xr = x + static_cast<size_t>(r) * cols;
        int j = 0;
        for (; j + 8 <= cols; j += 8)
            _mm512_storeu_pd(
                xr + j,
                _mm512_add_pd(_mm512_loadu_pd(xr + j), _mm512_loadu_pd(b + j)));
        for (; j < cols; ++j) xr[j] += b[j];
    }
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) void col_sums_avx512(
    const double* x, int rows, int cols, double* b) {
    for (int r = 0; r < rows; ++r) {
        const double* xr = x + static_cast<size_t>(r) * cols;
        int j = 0;
        for (; j + 8 <= cols; j += 8)
            _mm512_storeu_pd(
                b + j,
                _mm512_add_pd(_mm512_loadu_pd(b + j), _mm512_loadu_pd(xr + j)));
        for (; j < cols; ++j) b[j] += xr[j];
    }
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) double sum_sq_avx512(
    const double* x, size_t n) {
    __m512d acc = _mm512_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m512d v = _mm512_loadu_pd(x + i);
        acc = _mm512_fmadd_pd(v, v, acc);
    }
    double s = _mm512_reduce_add_pd(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) double dot_avx512(
    const double* x, const double* y, size_t n) {
    __m512d acc = _mm512_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        acc = _mm512_fmadd_pd(_mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i),
                              acc);
    double s = _mm512_reduce_add_pd(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) void axpy_avx512(
    double a, const double* x, double* y, size_t n) {
    const __m512d va = _mm512_set1_pd(a);
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(
            y + i,
            _mm512_fmadd_pd(va, _mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) void scal_avx512(
    double a, double* x, size_t n) {
    const __m512d va = _mm512_set1_pd(a);
    size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(x + i, _mm512_mul_pd(va, _mm512_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

__attribute__((target("avx512f,avx512dq,avx512vl"))) int argmin_sqdist_avx512(
    const double* y, const double* pts, int npts, int d, double scale,
    double* best) {
    const __m512d vs = _mm512_set1_pd(scale);
    int arg = 0;
    double bv = std::numeric_limits<double>::infinity();
    for (int p = 0; p < npts; ++p) {
        const double* row = pts + static_cast<size_t>(p) * d;
        __m512d acc = _mm512_setzero_pd();
        int j = 0;
        for (; j + 8 <= d; j += 8) {
            const __m512d diff = _mm512_sub_pd(
                _mm512_loadu_pd(y + j),
                _mm512_mul_pd(vs, _mm512_loadu_pd(row + j)));
            acc = _mm512_fmadd_pd(diff, diff, acc);
        }
        double s = _mm512_reduce_add_pd(acc);
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

KernelTable avx512_table() {
    KernelTable t;
    t.dgemm_rows = dgemm_rows_avx512;
    t.relu = relu_avx512;
    t.relu_grad = relu_grad_avx512;
    t.add_bias = add_bias_avx512;
    t.col_sums = col_sums_avx512;
    t.sum_sq = sum_sq_avx512;
    t.dot = dot_avx512;
    t.axpy = axpy_avx512;
    t.scal = scal_avx512;
    t.argmin_sqdist = argmin_sqdist_avx512;
    return t;
}

}  // namespace mimolab::kern::detail

#else

#include "mimolab/kernels.hpp"

namespace mimolab::kern::detail {
KernelTable avx512_table() { return scalar_table(); }
}  // namespace mimolab::kern::detail

#endif
