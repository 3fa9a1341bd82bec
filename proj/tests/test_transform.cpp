#include <doctest.h>

#include <cmath>

#include "bhtlab/spectral_field.hpp"
#include "bhtlab/transform.hpp"

using namespace bhtlab;

namespace {
// O(n^4) direct truncated convolution; the independent oracle for the
// transform-based product.
SpectralField brute_force_product(const SpectralField& a, const SpectralField& b) {
    SpectralField out(a.lat);
    const int h = a.lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            Complex acc(0, 0);
            for (int j2 = -h; j2 <= h; ++j2)
                for (int j1 = -h; j1 <= h; ++j1) {
                    const int m1 = k1 - j1, m2 = k2 - j2;
                    if (m1 < -h || m1 > h || m2 < -h || m2 > h) continue;
                    acc += a.at(m1, m2) * b.at(j1, j2);
                }
            out.at(k1, k2) = acc;
        }
    return out;
}
}  // namespace

TEST_CASE("grid evaluation convention: single cosine mode") {
    Lattice lat(16);
    SpectralField f(lat);
    f.set_pair(2, 0, Complex(0.5, 0.0));  // cos(2 x1)
    TransformEngine engine(lat);
    Eigen::MatrixXcd grid;
    engine.to_grid(f, grid);
    const int p = engine.pad();
    // value at grid point m is cos(2 * 2pi m / p)
    for (int m : {0, 1, 5, p / 2}) {
        const double x = 2.0 * M_PI * double(m) / double(p);
        CHECK(grid(m, 0).real() == doctest::Approx(std::cos(2.0 * x)).epsilon(1e-12));
        CHECK(std::abs(grid(m, 0).imag()) < 1e-13);
    }
    // round trip
    SpectralField back(lat);
    engine.to_coeffs(grid, back);
    CHECK((back.c - f.c).abs().maxCoeff() < 1e-14);
}

TEST_CASE("product of single modes is the delta convolution") {
    Lattice lat(16);
    SpectralField a(lat), b(lat);
    a.set_pair(1, 2, Complex(0.7, 0.1));
    b.set_pair(3, -1, Complex(-0.2, 0.4));
    SpectralField p = dealiased_product(a, b);
    // contributions at (4,1) from a(1,2)b(3,-1), and at (2,-3) from a(-1,-2)b(3,-1)
    const Complex c41 = Complex(0.7, 0.1) * Complex(-0.2, 0.4);
    const Complex c2m3 = std::conj(Complex(0.7, 0.1)) * Complex(-0.2, 0.4);
    CHECK(std::abs(p.at(4, 1) - c41) < 1e-14);
    CHECK(std::abs(p.at(2, -3) - c2m3) < 1e-14);
    CHECK(std::abs(p.at(-4, -1) - std::conj(c41)) < 1e-14);
    CHECK(std::abs(p.at(5, 5)) < 1e-15);  // off-support leakage is transform round-off
}

TEST_CASE("dealiased product matches the direct convolution oracle") {
    Lattice lat(16);
    SpectralField a = random_field(lat, 101);
    SpectralField b = random_field(lat, 102);
    SpectralField fast = dealiased_product(a, b);
    SpectralField slow = brute_force_product(a, b);
    const double scale = slow.c.abs().maxCoeff();
    CHECK((fast.c - slow.c).abs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("product of real fields is hermitian") {
    Lattice lat(24);
    SpectralField a = random_field(lat, 55);
    SpectralField b = random_field(lat, 56);
    SpectralField p = dealiased_product(a, b);
    CHECK(max_hermitian_defect(p) == 0.0);
    CHECK_THROWS(dealiased_product(a, random_field(Lattice(16), 1)));
}

TEST_CASE("advection: zero velocity and skew symmetry") {
    Lattice lat(32);
    VectorField zero(lat);
    SpectralField f = random_field(lat, 8);
    CHECK(norm_l2(advect(zero, f)) == 0.0);

    VectorField u = random_divfree_field(lat, 9);
    SpectralField af = advect(u, f);
    const double skew = std::abs(inner_l2(af, f));
    CHECK(skew <= 1e-10 * norm_l2(u) * norm_h1(f) * norm_l2(f));
}

TEST_CASE("advection of single modes matches the wedge formula") {
    Lattice lat(16);
    // u from a single stream mode m: u_m = i c mperp, divergence-free
    const int m1 = 2, m2 = 1;
    const Complex c(0.3, -0.6);
    VectorField u(lat);
    u.x.set_pair(m1, m2, Complex(0, 1) * c * double(-m2));
    u.y.set_pair(m1, m2, Complex(0, 1) * c * double(m1));
    SpectralField f(lat);
    const int j1 = 1, j2 = -3;
    const Complex fj(0.5, 0.25);
    f.set_pair(j1, j2, fj);

    SpectralField af = advect(u, f);
    // coefficient at k = m + j: i (u_m . j) f_j = i * i c (mperp . j) f_j,
    // and mperp . j = m1 j2 - m2 j1 (the wedge m ^ j)
    const double wedge = double(m1) * j2 - double(m2) * j1;
    const Complex expect_sum = Complex(0, 1) * (Complex(0, 1) * c * wedge) * fj;
    CHECK(std::abs(af.at(m1 + j1, m2 + j2) - expect_sum) < 1e-13);
    // cross term at m - j uses conj(f_j): i (u_m . (-j)) conj(f_j)
    const Complex expect_diff = Complex(0, 1) * (Complex(0, 1) * c * (-wedge)) * std::conj(fj);
    CHECK(std::abs(af.at(m1 - j1, m2 - j2) - expect_diff) < 1e-13);
}

TEST_CASE("advection operator reuse matches the one-shot helper") {
    Lattice lat(24);
    VectorField u = random_divfree_field(lat, 77);
    TransformEngine engine(lat);
    AdvectionOperator op(u, engine);
    SpectralField f = random_field(lat, 78);
    SpectralField a = op.apply(f);
    SpectralField b = advect(u, f);
    CHECK((a.c - b.c).abs().maxCoeff() < 1e-14 * b.c.abs().maxCoeff());
}

TEST_CASE("realness of synthesized fields on the grid") {
    Lattice lat(32);
    SpectralField f = random_field(lat, 12);
    CHECK(max_imag_on_grid(f) < 1e-12 * norm_l2(f));
}

TEST_CASE("dealiasing holds across mixed-radix paddings") {
    // lattice sizes whose padded transforms hit radix-2, radix-3 and mixed
    // paths; skew symmetry requires the convolution to be exact
    for (int n : {16, 20, 24, 40}) {
        Lattice lat(n);
        VectorField u = random_divfree_field(lat, 900 + n);
        SpectralField f = random_field(lat, 901 + n);
        const double skew = std::abs(inner_l2(advect(u, f), f));
        CHECK(skew <= 1e-10 * norm_l2(u) * norm_h1(f) * norm_l2(f));
        SpectralField fast = dealiased_product(random_field(lat, 902 + n), f);
        SpectralField slow = brute_force_product(random_field(lat, 902 + n), f);
        CHECK((fast.c - slow.c).abs().maxCoeff() < 1e-12 * slow.c.abs().maxCoeff());
    }
}

TEST_CASE("fft friendly sizes") {
    CHECK(fft_friendly_size(5) <= 6);
    CHECK(fft_friendly_size(97) == 108);
    CHECK(fft_friendly_size(192) == 192);
    for (int lo : {7, 33, 100, 191, 300}) {
        const int p = fft_friendly_size(lo);
        CHECK(p >= lo);
        int q = p;
        while (q % 2 == 0) q /= 2;
        while (q % 3 == 0) q /= 3;
        CHECK(q == 1);
    }
}
