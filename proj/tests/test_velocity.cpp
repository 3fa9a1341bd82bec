#include <doctest.h>

#include <cmath>
#include <complex>

#include "bhtlab/transform.hpp"
#include "bhtlab/velocity.hpp"

using namespace bhtlab;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TEST_CASE("phase sampling is deterministic and order-free") {
    Lattice lat(32);
    RandomPhaseField a = sample_phases(123, lat);
    RandomPhaseField b = sample_phases(123, lat);
    CHECK((a.zeta - b.zeta).abs().maxCoeff() == 0.0);
    RandomPhaseField c = sample_phases(124, lat);
    CHECK((a.zeta - c.zeta).abs().maxCoeff() > 0.0);
    // value respects the reality pairing
    CHECK(a.value(-3, -2) == std::conj(a.value(3, 2)));
    CHECK(std::abs(std::abs(a.value(5, 1)) - 1.0) < 1e-15);
}

TEST_CASE("frozen low modes agree across seeds") {
    Lattice lat(32);
    RandomPhaseField a = sample_phases(1, lat, 8.0);
    RandomPhaseField b = sample_phases(2, lat, 8.0);
    const int h = lat.half;
    for (int k2 = 0; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (!(k2 > 0 || k1 > 0)) continue;
            const double kk = double(k1) * k1 + double(k2) * k2;
            if (kk < 64.0)
                CHECK(a.phase(k1, k2) == b.phase(k1, k2));
            else
                CHECK(a.phase(k1, k2) != b.phase(k1, k2));
        }
}

TEST_CASE("phases decorrelate across modes (monte carlo)") {
    // empirical E X_j conj(X_k) over 10^4 seeds for fixed j != k
    const int trials = 10000;
    Complex acc(0, 0);
    for (int s = 0; s < trials; ++s) {
        const double zj = mode_phase(std::uint64_t(s) + 1, 3, 1);
        const double zk = mode_phase(std::uint64_t(s) + 1, -2, 5);
        acc += std::polar(1.0, zj - zk);
    }
    CHECK(std::abs(acc) / double(trials) <= 5.0 / std::sqrt(double(trials)));
}

TEST_CASE("velocity modes: divergence-free with exact power") {
    Lattice lat(48);
    VelocityParams p = VelocityParams::steep(1.3, -2.5);
    RandomPhaseField phases = sample_phases(5, lat);
    VectorField u = build_velocity(p, phases);
    CHECK(max_divergence(u) <= 1e-13 * p.amplitude);  // k . kperp = 0 up to 1 ulp
    const int h = lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const double kk = double(k1) * k1 + double(k2) * k2;
            const double pw = std::norm(u.x.at(k1, k2)) + std::norm(u.y.at(k1, k2));
            CHECK(pw == doctest::Approx(1.3 * 1.3 * std::pow(kk, -2.5)).epsilon(1e-12));
        }
    // direction along kperp = (-2, 1) at k = (1, 2): ux = -2 uy
    const Complex ux = u.x.at(1, 2), uy = u.y.at(1, 2);
    CHECK(std::abs(ux + 2.0 * uy) < 1e-14);
}

TEST_CASE("kraichnan family: cutoff support and validation") {
    Lattice lat(64);
    VelocityParams p = VelocityParams::kraichnan(1.0, 16);
    RandomPhaseField phases = sample_phases(6, lat);
    VectorField u = build_velocity(p, phases);
    const int h = lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const double kk = double(k1) * k1 + double(k2) * k2;
            if (kk >= 256.0) {
                CHECK(u.x.at(k1, k2) == Complex(0, 0));
                CHECK(u.y.at(k1, k2) == Complex(0, 0));
            }
        }
    VelocityParams bad = VelocityParams::kraichnan(1.0, 32);  // kappa_max = 21
    CHECK_THROWS(bad.validate(lat));
    CHECK_THROWS(VelocityParams::steep(1.0, -2.0).validate(lat));
}

TEST_CASE("iteration-depth exponent") {
    CHECK(VelocityParams::steep(1.0, -2.5).m_beta() == 4);
    CHECK(VelocityParams::kraichnan(1.0, 16).m_beta() == 3);
    CHECK(VelocityParams::steep(1.0, -2.2).m_beta() == 4);
}

TEST_CASE("analytic norms match the built field to round-off") {
    Lattice lat(48);
    VelocityParams p = VelocityParams::steep(0.8, -2.6);
    VelocityAnalysis va(p, lat);
    VectorField u = build_velocity(p, sample_phases(77, lat));
    CHECK(norm_l2(u) == doctest::Approx(va.l2_exact()).epsilon(1e-13));
    CHECK(norm_h1(u) == doctest::Approx(va.h1_exact()).epsilon(1e-13));
    CHECK(norm_l1_fourier(u) == doctest::Approx(va.l1_fourier_exact()).epsilon(1e-13));
    CHECK(norm_l2(project(u, 9.0, kInf)) == doctest::Approx(va.l2_tail(9.0)).epsilon(1e-13));
    // spectrum is deterministic: another seed gives the same norms
    VectorField u2 = build_velocity(p, sample_phases(78, lat));
    CHECK(norm_l2(u2) == doctest::Approx(norm_l2(u)).epsilon(1e-14));
}

TEST_CASE("kraichnan closed-form continuum value") {
    Lattice lat(128);
    VelocityParams p = VelocityParams::kraichnan(1.0, 32);
    VelocityAnalysis va(p, lat);
    const double expect = std::sqrt(kTwoPi * kTwoPi * kTwoPi * (1.0 - 1.0 / (32.0 * 32.0)) / 2.0);
    CHECK(va.l2_continuum() == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("steep tail against the continuum prediction") {
    Lattice lat(96);
    VelocityParams p = VelocityParams::steep(1.0, -2.5);
    VelocityAnalysis va(p, lat);
    // away from |k| = 1 the lattice sum tracks the radial integral closely;
    // near the origin it does not, so compare tails, not tail fractions
    for (double kap : {8.0, 12.0, 16.0}) {
        const double r = va.l2_tail(kap) / va.l2_tail_continuum(kap);
        CHECK(r > 0.9);
        CHECK(r < 1.1);
    }
}

TEST_CASE("coefficient sum identity for the cutoff family") {
    Lattice lat(64);
    VelocityParams p = VelocityParams::kraichnan(0.7, 16);
    VelocityAnalysis va(p, lat);
    VectorField u = build_velocity(p, sample_phases(3, lat));
    // ||u_hat||_1 = ||grad u||_2^2 / (4 pi^2 U), exact on the lattice
    const double lhs = norm_l1_fourier(u);
    const double rhs = norm_h1(u) * norm_h1(u) / (kTwoPi * kTwoPi * 0.7);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(va.l1_fourier_exact() == doctest::Approx(lhs).epsilon(1e-13));
}

TEST_CASE("frozen ensembles share the whole low velocity band") {
    Lattice lat(48);
    VelocityParams p = VelocityParams::kraichnan(1.0, 12);
    VectorField u1 = build_velocity(p, sample_phases(101, lat, 8.0));
    VectorField u2 = build_velocity(p, sample_phases(202, lat, 8.0));
    VectorField lo1 = project(u1, 1.0, 8.0);
    VectorField lo2 = project(u2, 1.0, 8.0);
    CHECK((lo1.x.c - lo2.x.c).abs().maxCoeff() == 0.0);
    CHECK((lo1.y.c - lo2.y.c).abs().maxCoeff() == 0.0);
    // and the far bands differ
    CHECK((u1.x.c - u2.x.c).abs().maxCoeff() > 0.0);
}

TEST_CASE("realness of the synthesized velocity") {
    Lattice lat(48);
    VectorField u = build_velocity(VelocityParams::steep(1.0, -2.5), sample_phases(11, lat));
    CHECK(max_imag_on_grid(u.x) <= 1e-12 * norm_l2(u));
    CHECK(max_imag_on_grid(u.y) <= 1e-12 * norm_l2(u));
}
