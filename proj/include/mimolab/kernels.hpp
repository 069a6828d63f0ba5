#pragma once

#include <cstddef>
#include <cstdint>

namespace mimolab::kern {

// Inner-loop arithmetic kernels. Every kernel has a scalar reference
// implementation plus SIMD variants (AVX2/FMA and AVX-512 on x86-64)
// selected once at startup from cpuid. The environment variable
// MIMOLAB_KERNELS=scalar|avx2|avx512 overrides the selection, which the
// equivalence tests use to compare backends on identical inputs.

enum class Backend { kScalar = 0, kAvx2 = 1, kAvx512 = 2 };

Backend active_backend();
const char* backend_name();
// Returns false if the requested backend is unsupported on this CPU.
bool set_backend(Backend b);

// C = alpha * op(A) * op(B) + beta * C, row-major, op = optional transpose.
// op(A) is m x k, op(B) is k x n. lda/ldb are leading dimensions of the
// stored (untransposed) arrays. Single-threaded.
void dgemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
           const double* a, int lda, const double* b, int ldb, double beta,
           double* c, int ldc);

// Same contract, row blocks of C split over the global thread pool. The
// k-accumulation order per C entry is fixed, so results are identical for
// any worker count.
void dgemm_mt(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
              const double* a, int lda, const double* b, int ldb, double beta,
              double* c, int ldc);

void relu(const double* x, double* y, size_t n);
// dx = dy where x > 0, else 0.
void relu_grad(const double* x, const double* dy, double* dx, size_t n);
// x[r, :] += b for each of `rows` rows.
void add_bias(double* x, const double* b, int rows, int cols);
// b[j] += sum_r x[r, j]  (column reduction used for bias gradients).
void col_sums(const double* x, int rows, int cols, double* b);
double sum_sq(const double* x, size_t n);
double dot(const double* x, const double* y, size_t n);
// y += a * x
void axpy(double a, const double* x, double* y, size_t n);
void scal(double a, double* x, size_t n);

// Index of the candidate row p minimizing ||y - scale * pts[p, :]||^2 over
// npts rows of width d; ties resolve to the lowest index. The minimal
// squared distance is written to *best if non-null.
int argmin_sqdist(const double* y, const double* pts, int npts, int d,
                  double scale, double* best);

// In-place row-wise softmax with max-shift; each row sums to 1.
void softmax_rows(double* x, int rows, int cols);

namespace detail {
struct KernelTable {
    // Computes rows [r0, r1) of C for the dgemm contract above.
    void (*dgemm_rows)(bool, bool, int, int, int, double, const double*, int,
                       const double*, int, double, double*, int, int, int);
    void (*relu)(const double*, double*, size_t);
    void (*relu_grad)(const double*, const double*, double*, size_t);
    void (*add_bias)(double*, const double*, int, int);
    void (*col_sums)(const double*, int, int, double*);
    double (*sum_sq)(const double*, size_t);
    double (*dot)(const double*, const double*, size_t);
    void (*axpy)(double, const double*, double*, size_t);
    void (*scal)(double, double*, size_t);
    int (*argmin_sqdist)(const double*, const double*, int, int, double,
                         double*);
};
KernelTable scalar_table();
KernelTable avx2_table();    // valid only if cpu_has_avx2()
KernelTable avx512_table();  // valid only if cpu_has_avx512()
bool cpu_has_avx2();
bool cpu_has_avx512();
const KernelTable& active_table();
}  // namespace detail

}  // namespace mimolab::kern
