#include "mimolab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mimolab/kernels.hpp"

namespace mimolab {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat matmul(const Mat& a, bool ta, const Mat& b, bool tb) {
    const int m = ta ? a.cols : a.rows;
    const int k = ta ? a.rows : a.cols;
    const int kb = tb ? b.cols : b.rows;
    const int n = tb ? b.rows : b.cols;
    if (k != kb) throw std::invalid_argument("matmul: inner dimensions differ");
    Mat c(m, n);
    kern::dgemm_mt(ta, tb, m, n, k, 1.0, a.data(), a.cols, b.data(), b.cols,
                   0.0, c.data(), n);
    return c;
}

CMat CMat::identity(int n) {
    CMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMat CMat::adjoint() const {
    CMat r(cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMat CMat::operator*(const CMat& rhs) const {
    if (cols != rhs.rows)
        throw std::invalid_argument("CMat multiply: inner dimensions differ");
    CMat r(rows, rhs.cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) {
            const Complex a = (*this)(i, k);
            for (int j = 0; j < rhs.cols; ++j) r(i, j) += a * rhs(k, j);
        }
    return r;
}

CMat CMat::operator-(const CMat& rhs) const {
    if (rows != rhs.rows || cols != rhs.cols)
        throw std::invalid_argument("CMat subtract: shape mismatch");
    CMat r(rows, cols);
    for (size_t i = 0; i < v.size(); ++i) r.v[i] = v[i] - rhs.v[i];
    return r;
}

CMat& CMat::operator*=(Complex s) {
    for (auto& x : v) x *= s;
    return *this;
}

double CMat::frobenius() const {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

double CMat::max_abs() const {
    double s = 0.0;
    for (const auto& x : v) s = std::max(s, std::abs(x));
    return s;
}

bool CMat::finite() const {
    for (const auto& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

namespace {

constexpr double kRankTol = 1e-12;

// Rotates each kept (u_i, v_i) pair by a common phase so the first nonzero
// entry of v_i is real nonnegative; the product u_i sigma_i v_i^H is
// unchanged.
void fix_phases(CMat& u, CMat& v) {
    for (int j = 0; j < v.cols; ++j) {
        Complex pivot = 0.0;
        for (int i = 0; i < v.rows; ++i) {
            if (std::abs(v(i, j)) > 1e-14) {
                pivot = v(i, j);
                break;
            }
        }
        if (pivot == 0.0) continue;
        const Complex phase = std::conj(pivot) / std::abs(pivot);
        for (int i = 0; i < v.rows; ++i) v(i, j) *= phase;
        for (int i = 0; i < u.rows; ++i) u(i, j) *= phase;
    }
}

// One-sided Jacobi for the 3..4-column shapes the closed form does not
// cover; the 2x2 path every scenario uses stays closed-form.
SvdDecomposition svd_jacobi(const CMat& h) {
    const int m = h.rows, n = h.cols;
    CMat w = h;
    CMat vm = CMat::identity(n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double worst = 0.0;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0;
                Complex gamma = 0.0;
                for (int i = 0; i < m; ++i) {
                    alpha += std::norm(w(i, p));
                    beta += std::norm(w(i, q));
                    gamma += std::conj(w(i, p)) * w(i, q);
                }
                const double scale = std::sqrt(alpha * beta);
                if (scale <= 0.0 || std::abs(gamma) <= 1e-15 * scale) continue;
                worst = std::max(worst, std::abs(gamma) / scale);
                // Align the pair phase, then a real Jacobi rotation zeroes
                // the off-diagonal Gram entry.
                const Complex phase = gamma / std::abs(gamma);
                const double tau = (beta - alpha) / (2.0 * std::abs(gamma));
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int i = 0; i < m; ++i) {
                    const Complex wp = w(i, p), wq = w(i, q) * std::conj(phase);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = (s * wp + c * wq) * phase;
                }
                for (int i = 0; i < n; ++i) {
                    const Complex vp = vm(i, p), vq = vm(i, q) * std::conj(phase);
                    vm(i, p) = c * vp - s * vq;
                    vm(i, q) = (s * vp + c * vq) * phase;
                }
            }
        }
        if (worst < 1e-14) break;
    }
    std::vector<int> order(n);
    std::vector<double> norms(n);
    for (int j = 0; j < n; ++j) {
        double a = 0.0;
        for (int i = 0; i < m; ++i) a += std::norm(w(i, j));
        norms[j] = std::sqrt(a);
        order[j] = j;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return norms[a] > norms[b]; });
    const double smax = norms[order[0]];
    int rank = 0;
    while (rank < n && norms[order[rank]] > kRankTol * smax) ++rank;
    SvdDecomposition out;
    out.u = CMat(m, rank);
    out.v = CMat(n, rank);
    out.sigma.resize(rank);
    for (int r = 0; r < rank; ++r) {
        const int j = order[r];
        out.sigma[r] = norms[j];
        for (int i = 0; i < m; ++i) out.u(i, r) = w(i, j) / norms[j];
        for (int i = 0; i < n; ++i) out.v(i, r) = vm(i, j);
    }
    fix_phases(out.u, out.v);
    return out;
}

// rows >= cols and cols <= 2: closed form via the eigendecomposition of the
// 2x2 Gram matrix H^H H.
SvdDecomposition svd_tall(const CMat& h) {
    const int m = h.rows, n = h.cols;
    SvdDecomposition out;
    if (n == 1) {
        double g = 0.0;
        for (int i = 0; i < m; ++i) g += std::norm(h(i, 0));
        const double s = std::sqrt(g);
        out.sigma = {s};
        out.v = CMat(1, 1);
        out.v(0, 0) = 1.0;
        out.u = CMat(m, 1);
        for (int i = 0; i < m; ++i) out.u(i, 0) = h(i, 0) / s;
        fix_phases(out.u, out.v);
        return out;
    }

    double a = 0.0, c = 0.0;
    Complex b = 0.0;
    for (int i = 0; i < m; ++i) {
        a += std::norm(h(i, 0));
        c += std::norm(h(i, 1));
        b += std::conj(h(i, 0)) * h(i, 1);
    }
    const double disc =
        std::sqrt(std::max(0.0, (a - c) * (a - c) + 4.0 * std::norm(b)));
    const double l1 = 0.5 * (a + c + disc);
    const double l2 = std::max(0.0, 0.5 * (a + c - disc));

    Complex v1[2];
    if (std::abs(b) > 1e-15 * std::max(a, c)) {
        // Two algebraically equivalent eigenvector forms; take the better
        // conditioned one.
        const double n1 = std::norm(b) + (l1 - a) * (l1 - a);
        const double n2 = (l1 - c) * (l1 - c) + std::norm(b);
        if (n1 >= n2) {
            v1[0] = b;
            v1[1] = l1 - a;
        } else {
            v1[0] = l1 - c;
            v1[1] = std::conj(b);
        }
        const double nn = std::sqrt(std::norm(v1[0]) + std::norm(v1[1]));
        v1[0] /= nn;
        v1[1] /= nn;
    } else if (a >= c) {
        v1[0] = 1.0;
        v1[1] = 0.0;
    } else {
        v1[0] = 0.0;
        v1[1] = 1.0;
    }
    // Orthonormal complement in C^2.
    const Complex v2[2] = {-std::conj(v1[1]), std::conj(v1[0])};

    const double s1 = std::sqrt(l1);
    const double s2 = std::sqrt(l2);
    const int rank = s2 > kRankTol * s1 ? 2 : 1;

    out.sigma.assign({s1, s2});
    out.sigma.resize(rank);
    out.v = CMat(2, rank);
    out.v(0, 0) = v1[0];
    out.v(1, 0) = v1[1];
    if (rank == 2) {
        out.v(0, 1) = v2[0];
        out.v(1, 1) = v2[1];
    }
    out.u = CMat(m, rank);
    for (int r = 0; r < rank; ++r) {
        for (int i = 0; i < m; ++i) {
            out.u(i, r) =
                (h(i, 0) * out.v(0, r) + h(i, 1) * out.v(1, r)) / out.sigma[r];
        }
    }
    fix_phases(out.u, out.v);
    return out;
}

}  // namespace

SvdDecomposition svd_small(const CMat& h) {
    if (h.rows < 1 || h.cols < 1 || h.rows > 4 || h.cols > 4)
        throw std::invalid_argument("svd_small: dimensions must be 1..4");
    if (h.max_abs() == 0.0)
        throw std::domain_error("svd_small: rank-zero (all-zero) matrix");

    SvdDecomposition out;
    if (h.cols <= 2 && h.rows >= h.cols) {
        out = svd_tall(h);
    } else if (h.rows <= 2) {
        // H = U S V^H  <=>  H^H = V S U^H.
        SvdDecomposition t = svd_tall(h.adjoint());
        out.u = std::move(t.v);
        out.v = std::move(t.u);
        out.sigma = std::move(t.sigma);
        fix_phases(out.u, out.v);
    } else {
        out = svd_jacobi(h);
    }
    if (!out.u.finite() || !out.v.finite())
        throw std::runtime_error("svd_small: non-finite result");
    return out;
}

Mat givens(int n, int i, int j, double theta) {
    if (i < 1 || j < 1 || i >= j || j > n)
        throw std::out_of_range("givens: need 1 <= i < j <= n");
    Mat g = Mat::identity(n);
    const double c = std::cos(theta), s = std::sin(theta);
    g(i - 1, i - 1) = c;
    g(j - 1, j - 1) = c;
    g(i - 1, j - 1) = -s;
    g(j - 1, i - 1) = s;
    return g;
}

namespace {

inline void philox_round(uint32_t c[4], uint32_t k0, uint32_t k1) {
    const uint64_t p0 = 0xD2511F53ull * c[0];
    const uint64_t p1 = 0xCD9E8D57ull * c[2];
    const uint32_t n0 = static_cast<uint32_t>(p1 >> 32) ^ c[1] ^ k0;
    const uint32_t n1 = static_cast<uint32_t>(p1);
    const uint32_t n2 = static_cast<uint32_t>(p0 >> 32) ^ c[3] ^ k1;
    const uint32_t n3 = static_cast<uint32_t>(p0);
    c[0] = n0;
    c[1] = n1;
    c[2] = n2;
    c[3] = n3;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

void RngStream::refill() {
    uint32_t c[4] = {static_cast<uint32_t>(block_),
                     static_cast<uint32_t>(block_ >> 32),
                     static_cast<uint32_t>(stream_),
                     static_cast<uint32_t>(stream_ >> 32)};
    uint32_t k0 = static_cast<uint32_t>(seed_);
    uint32_t k1 = static_cast<uint32_t>(seed_ >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k0, k1);
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    out_[0] = c[0];
    out_[1] = c[1];
    out_[2] = c[2];
    out_[3] = c[3];
    avail_ = 4;
    ++block_;
}

uint64_t RngStream::next_u64() {
    if (avail_ < 2) refill();
    const uint64_t lo = out_[4 - avail_];
    const uint64_t hi = out_[4 - avail_ + 1];
    avail_ -= 2;
    return lo | (hi << 32);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] keeps the log finite; no rejection, so the consumption
    // pattern per variate is fixed.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

Complex RngStream::cnormal(double variance) {
    if (variance < 0.0) throw std::domain_error("cnormal: negative variance");
    if (variance == 0.0) return {0.0, 0.0};
    const double s = std::sqrt(variance * 0.5);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

uint64_t RngStream::below(uint64_t n) {
    // Multiply-shift range map; bias ~ n / 2^64 is irrelevant for the
    // n <= 2^16 used here.
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<uint64_t>(wide >> 64);
}

RngStream RngStream::substream(uint64_t tag) const {
    return RngStream(seed_, splitmix64(stream_ ^ splitmix64(tag)));
}

CMat sample_complex_gaussian(int rows, int cols, double variance,
                             RngStream& rng) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("sample_complex_gaussian: bad shape");
    if (variance < 0.0)
        throw std::domain_error("sample_complex_gaussian: negative variance");
    CMat m(rows, cols);
    for (auto& x : m.v) x = rng.cnormal(variance);
    return m;
}

}  // namespace mimolab
