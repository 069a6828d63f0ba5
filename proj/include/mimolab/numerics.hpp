#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace mimolab {

using Complex = std::complex<double>;

// Dense real matrix, row-major. Thin wrapper over a flat buffer so the
// kernels can operate on .data() directly.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return v[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }
    double* data() { return v.data(); }
    const double* data() const { return v.data(); }
    double* row(int i) { return v.data() + static_cast<size_t>(i) * cols; }
    const double* row(int i) const { return v.data() + static_cast<size_t>(i) * cols; }
    size_t size() const { return v.size(); }

    static Mat identity(int n);
};

// C = op(A) * op(B), threaded through the kernel backend.
Mat matmul(const Mat& a, bool trans_a, const Mat& b, bool trans_b);

// Dense complex matrix, row-major.
struct CMat {
    int rows = 0;
    int cols = 0;
    std::vector<Complex> v;

    CMat() = default;
    CMat(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c) {}

    Complex& operator()(int i, int j) { return v[static_cast<size_t>(i) * cols + j]; }
    Complex operator()(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }

    static CMat identity(int n);
    CMat adjoint() const;
    CMat operator*(const CMat& rhs) const;
    CMat operator-(const CMat& rhs) const;
    CMat& operator*=(Complex s);
    double frobenius() const;
    double max_abs() const;
    bool finite() const;
};

struct SvdDecomposition {
    CMat u;                     // rows x rank
    std::vector<double> sigma;  // descending, strictly positive
    CMat v;                     // cols x rank
    int rank() const { return static_cast<int>(sigma.size()); }
};

// Thin SVD of a small (<= 4 x 4) complex matrix. Shapes with min dimension
// <= 2 use the closed-form eigendecomposition of the 2x2 Gram matrix; the
// 3..4 case falls back to one-sided Jacobi. Singular values below
// 1e-12 * sigma_max are truncated. The phase of each V column is fixed so
// its first nonzero entry is real nonnegative, which makes decompositions
// of equal inputs identical.
SvdDecomposition svd_small(const CMat& h);

// n x n identity except rows/cols i, j (1-based, i < j):
// (i,i)=(j,j)=cos t, (i,j)=-sin t, (j,i)=sin t.
Mat givens(int n, int i, int j, double theta);

// Counter-based generator (Philox4x32-10). A stream is addressed by
// (seed, stream id); equal addresses reproduce the exact sample sequence
// and distinct stream ids give statistically independent streams, which is
// what makes sharded Monte Carlo runs reproducible. A stream must be owned
// by a single thread at a time.
class RngStream {
public:
    RngStream(uint64_t seed, uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

    uint64_t next_u64();
    // [0, 1), 53-bit resolution.
    double uniform();
    // Standard normal via Box-Muller; consumes uniforms in pairs and caches
    // the second variate.
    double normal();
    // CN(0, variance): real and imaginary parts each N(0, variance/2).
    Complex cnormal(double variance);
    // Uniform integer in [0, n).
    uint64_t below(uint64_t n);

    // Independent child stream for shard `tag`; mixes the tag into the
    // stream id so shard families never collide.
    RngStream substream(uint64_t tag) const;

private:
    void refill();

    uint64_t seed_ = 0;
    uint64_t stream_ = 0;
    uint64_t block_ = 0;
    uint32_t out_[4] = {0, 0, 0, 0};
    int avail_ = 0;  // u32 lanes left in out_
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// rows x cols matrix of i.i.d. CN(0, variance) entries.
CMat sample_complex_gaussian(int rows, int cols, double variance,
                             RngStream& rng);

}  // namespace mimolab
