#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "mimolab/kernels.hpp"

// Reference backend. Plain loops, no intrinsics; the accumulation order
// (ascending k per C entry) matches the SIMD backends so cross-backend
// differences stay within FMA rounding.

namespace mimolab::kern::detail {
namespace {

inline double at(const double* p, int ld, bool trans, int i, int j) {
    return trans ? p[static_cast<size_t>(j) * ld + i]
                 : p[static_cast<size_t>(i) * ld + j];
}

void dgemm_rows_scalar(bool ta, bool tb, int m, int n, int k, double alpha,
                       const double* a, int lda, const double* b, int ldb,
                       double beta, double* c, int ldc, int r0, int r1) {
    (void)m;
    // Pack the operand rows of op(B) once; column walks of a transposed B
    // are otherwise quadratically slow for the sizes used in training.
    std::vector<double> brow(static_cast<size_t>(k) * n);
    for (int kk = 0; kk < k; ++kk)
        for (int j = 0; j < n; ++j)
            brow[static_cast<size_t>(kk) * n + j] = at(b, ldb, tb, kk, j);

    std::vector<double> acc(n);
    for (int i = r0; i < r1; ++i) {
        std::memset(acc.data(), 0, sizeof(double) * n);
        for (int kk = 0; kk < k; ++kk) {
            const double av = at(a, lda, ta, i, kk);
            const double* br = &brow[static_cast<size_t>(kk) * n];
            for (int j = 0; j < n; ++j) acc[j] += av * br[j];
        }
        double* cr = c + static_cast<size_t>(i) * ldc;
        if (beta == 0.0) {
            for (int j = 0; j < n; ++j) cr[j] = alpha * acc[j];
        } else {
            for (int j = 0; j < n; ++j) cr[j] = beta * cr[j] + alpha * acc[j];
        }
    }
}

void relu_scalar(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad_scalar(const double* x, const double* dy, double* dx,
                      size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void add_bias_scalar(double* x, const double* b, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* xr = x + static_cast<size_t>(r) * cols;
        for (int j = 0; j < cols; ++j) xr[j] += b[j];
    }
}

void col_sums_scalar(const double* x, int rows, int cols, double* b) {
    for (int r = 0; r < rows; ++r) {
        const double* xr = x + static_cast<size_t>(r) * cols;
        for (int j = 0; j < cols; ++j) b[j] += xr[j];
    }
}

double sum_sq_scalar(const double* x, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double dot_scalar(const double* x, const double* y, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] *= a;
}

int argmin_sqdist_scalar(const double* y, const double* pts, int npts, int d,
                         double scale, double* best) {
    int arg = 0;
    double bv = std::numeric_limits<double>::infinity();
    for (int p = 0; p < npts; ++p) {
        const double* row = pts + static_cast<size_t>(p) * d;
        double s = 0.0;
        for (int j = 0; j < d; ++j) {
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

KernelTable scalar_table() {
    KernelTable t;
    t.dgemm_rows = dgemm_rows_scalar;
    t.relu = relu_scalar;
    t.relu_grad = relu_grad_scalar;
    t.add_bias = add_bias_scalar;
    t.col_sums = col_sums_scalar;
    t.sum_sq = sum_sq_scalar;
    t.dot = dot_scalar;
    t.axpy = axpy_scalar;
    t.scal = scal_scalar;
    t.argmin_sqdist = argmin_sqdist_scalar;
    return t;
}

}  // namespace mimolab::kern::detail
