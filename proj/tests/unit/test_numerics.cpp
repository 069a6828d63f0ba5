#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "mimolab/numerics.hpp"

using namespace mimolab;

namespace {

// Independent 2x2 eigenvalue oracle: roots of the characteristic polynomial
// of the Gram matrix H^H H, via the trace/determinant quadratic.
void gram_eigs(const CMat& h, double& l1, double& l2) {
    double a = 0, c = 0;
    Complex b = 0;
    for (int i = 0; i < h.rows; ++i) {
        a += std::norm(h(i, 0));
        c += std::norm(h(i, 1));
        b += std::conj(h(i, 0)) * h(i, 1);
    }
    const double tr = a + c;
    const double det = a * c - std::norm(b);
    const double root = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    l1 = 0.5 * (tr + root);
    l2 = 0.5 * (tr - root);
}

double unitary_defect(const CMat& m) {
    const CMat g = m.adjoint() * m;
    return (g - CMat::identity(g.rows)).frobenius();
}

double reconstruct_err(const CMat& h, const SvdDecomposition& s) {
    CMat us = s.u;
    for (int j = 0; j < us.cols; ++j)
        for (int i = 0; i < us.rows; ++i) us(i, j) *= s.sigma[j];
    return (us * s.v.adjoint() - h).frobenius();
}

// Determinant by Gaussian elimination with partial pivoting.
double det_real(Mat a) {
    const int n = a.rows;
    double d = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            d = -d;
        }
        if (a(k, k) == 0.0) return 0.0;
        d *= a(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return d;
}

}  // namespace

TEST_CASE("svd of identity and diagonal matrices") {
    CMat id = CMat::identity(2);
    auto s = svd_small(id);
    REQUIRE(s.rank() == 2);
    CHECK(s.sigma[0] == doctest::Approx(1.0));
    CHECK(s.sigma[1] == doctest::Approx(1.0));
    CHECK((s.u - id).frobenius() < 1e-12);
    CHECK((s.v - id).frobenius() < 1e-12);

    CMat d(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    auto sd = svd_small(d);
    REQUIRE(sd.rank() == 2);
    CHECK(sd.sigma[0] == doctest::Approx(3.0));
    CHECK(sd.sigma[1] == doctest::Approx(1.0));
}

TEST_CASE("svd of 1000 random complex 2x2 matrices vs eigenvalue oracle") {
    RngStream rng(42, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const CMat h = sample_complex_gaussian(2, 2, 1.0, rng);
        const auto s = svd_small(h);
        CHECK(reconstruct_err(h, s) <= 1e-10 * (1.0 + h.frobenius()));
        CHECK(unitary_defect(s.u) < 1e-10);
        CHECK(unitary_defect(s.v) < 1e-10);
        double l1, l2;
        gram_eigs(h, l1, l2);
        REQUIRE(s.rank() == 2);
        CHECK(s.sigma[0] == doctest::Approx(std::sqrt(l1)).epsilon(1e-9));
        CHECK(s.sigma[1] == doctest::Approx(std::sqrt(l2)).epsilon(1e-9));
        CHECK(s.sigma[0] >= s.sigma[1]);
        CHECK(s.sigma[1] > 0.0);
        // Phase convention: first nonzero entry of each V column is real
        // and nonnegative, so equal inputs decompose identically.
        for (int j = 0; j < s.v.cols; ++j) {
            CHECK(std::abs(s.v(0, j).imag()) < 1e-10);
            CHECK(s.v(0, j).real() >= -1e-12);
        }
    }
}

TEST_CASE("svd handles rectangular and rank-deficient shapes") {
    RngStream rng(7, 1);
    for (auto [r, c] : {std::pair{1, 2}, {2, 1}, {1, 1}, {2, 4}, {4, 2}}) {
        const CMat h = sample_complex_gaussian(r, c, 1.0, rng);
        const auto s = svd_small(h);
        CHECK(reconstruct_err(h, s) <= 1e-10 * (1.0 + h.frobenius()));
        CHECK(unitary_defect(s.u) < 1e-10);
        CHECK(unitary_defect(s.v) < 1e-10);
        CHECK(s.rank() <= std::min(r, c));
    }

    // Rank-1 outer product: second singular value must truncate.
    CMat h(2, 2);
    h(0, 0) = {1.0, 0.5};
    h(0, 1) = {-0.3, 0.2};
    h(1, 0) = h(0, 0) * Complex{2.0, 0.0};
    h(1, 1) = h(0, 1) * Complex{2.0, 0.0};
    const auto s = svd_small(h);
    CHECK(s.rank() == 1);
    CHECK(reconstruct_err(h, s) <= 1e-10 * h.frobenius());

    CHECK_THROWS_AS(svd_small(CMat(2, 2)), std::domain_error);
}

TEST_CASE("svd jacobi path for 3- and 4-column inputs") {
    RngStream rng(11, 3);
    for (auto [r, c] : {std::pair{3, 3}, {4, 4}, {4, 3}, {3, 4}}) {
        const CMat h = sample_complex_gaussian(r, c, 1.0, rng);
        const auto s = svd_small(h);
        CHECK(reconstruct_err(h, s) <= 1e-10 * (1.0 + h.frobenius()));
        CHECK(unitary_defect(s.u) < 1e-10);
        CHECK(unitary_defect(s.v) < 1e-10);
        for (int i = 1; i < s.rank(); ++i) CHECK(s.sigma[i - 1] >= s.sigma[i]);
    }
}

TEST_CASE("givens rotations") {
    const Mat g0 = givens(3, 1, 3, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(g0(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

    const Mat q = givens(2, 1, 2, std::numbers::pi / 2);
    CHECK(q(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(q(0, 1) == doctest::Approx(-1.0));
    CHECK(q(1, 0) == doctest::Approx(1.0));
    CHECK(q(1, 1) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(givens(3, 2, 2, 0.1), std::out_of_range);
    CHECK_THROWS_AS(givens(3, 3, 1, 0.1), std::out_of_range);

    // Product of all n(n-1)/2 factors stays orthogonal with det +1.
    RngStream rng(5, 9);
    const int n = 8;
    Mat r = Mat::identity(n);
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            r = matmul(r, false, givens(n, i, j, rng.uniform() * 2 * std::numbers::pi), false);
    const Mat rtr = matmul(r, true, r, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            CHECK(std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
    CHECK(det_real(r) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rng determinism and stream independence") {
    RngStream a(123, 7), b(123, 7);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

    // Same address twice gives bit-identical gaussian matrices.
    RngStream r1(99, 4), r2(99, 4);
    const CMat m1 = sample_complex_gaussian(3, 3, 1.0, r1);
    const CMat m2 = sample_complex_gaussian(3, 3, 1.0, r2);
    for (size_t i = 0; i < m1.v.size(); ++i) CHECK(m1.v[i] == m2.v[i]);

    // Distinct stream ids: empirical correlation below 0.01 over 1e6 pairs.
    RngStream s0(2024, 0), s1(2024, 1);
    const int n = 1000000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = s0.normal();
        const double y = s1.normal();
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    CHECK(std::abs(cov / std::sqrt(vx * vy)) < 0.01);
}

TEST_CASE("complex gaussian moments") {
    RngStream rng(31, 2);
    const CMat z = sample_complex_gaussian(1000, 1000, 1.0, rng);
    double p = 0.0;
    for (const auto& x : z.v) p += std::norm(x);
    p /= static_cast<double>(z.v.size());
    CHECK(p > 0.99);
    CHECK(p < 1.01);

    RngStream rng2(31, 3);
    const CMat zero = sample_complex_gaussian(4, 4, 0.0, rng2);
    CHECK(zero.max_abs() == 0.0);

    CHECK_THROWS_AS(sample_complex_gaussian(2, 2, -1.0, rng2),
                    std::domain_error);
}

TEST_CASE("substreams are reproducible and distinct") {
    RngStream base(17, 100);
    RngStream c1 = base.substream(5);
    RngStream c2 = base.substream(5);
    RngStream c3 = base.substream(6);
    const uint64_t a = c1.next_u64();
    CHECK(a == c2.next_u64());
    CHECK(a != c3.next_u64());
}
