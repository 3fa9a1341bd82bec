#include "bhtlab/spectral_field.hpp"

#include <cmath>
#include <stdexcept>

namespace bhtlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double sq(double x) { return x * x; }

// splitmix64 finalizer; used only by the test-field generators below.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
}  // namespace

void project_inplace(SpectralField& f, double kappa_lo, double kappa_hi) {
    if (!(kappa_lo < kappa_hi)) throw std::invalid_argument("project: kappa_lo must be < kappa_hi");
    const int h = f.lat.half;
    const double lo2 = kappa_lo * kappa_lo;
    const bool unbounded = !(kappa_hi < kInf);
    const double hi2 = unbounded ? 0.0 : kappa_hi * kappa_hi;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const double kk = double(k1) * k1 + double(k2) * k2;
            if (kk < lo2 || (!unbounded && kk >= hi2)) f.at(k1, k2) = Complex(0, 0);
        }
    f.zero_mean();
}

SpectralField project(const SpectralField& f, double kappa_lo, double kappa_hi) {
    SpectralField out = f;
    project_inplace(out, kappa_lo, kappa_hi);
    return out;
}

VectorField project(const VectorField& u, double kappa_lo, double kappa_hi) {
    VectorField out = u;
    project_inplace(out.x, kappa_lo, kappa_hi);
    project_inplace(out.y, kappa_lo, kappa_hi);
    return out;
}

SpectralField fractional_laplacian(const SpectralField& f, double s) {
    SpectralField out(f.lat);
    const int h = f.lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const double kk = double(k1) * k1 + double(k2) * k2;
            out.at(k1, k2) = f.at(k1, k2) * std::pow(kk, 0.5 * s);
        }
    return out;
}

SpectralField poisson_solve(const SpectralField& f) {
    SpectralField out(f.lat);
    const int h = f.lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const double kk = double(k1) * k1 + double(k2) * k2;
            out.at(k1, k2) = f.at(k1, k2) / kk;
        }
    return out;
}

VectorField gradient(const SpectralField& f) {
    VectorField g(f.lat);
    const int h = f.lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const Complex v = f.at(k1, k2);
            g.x.at(k1, k2) = Complex(0, 1) * double(k1) * v;
            g.y.at(k1, k2) = Complex(0, 1) * double(k2) * v;
        }
    return g;
}

void enforce_hermitian(SpectralField& f) {
    const int h = f.lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (k2 < 0 || (k2 == 0 && k1 < 0)) continue;  // handle each pair once
            Complex a = f.at(k1, k2);
            Complex b = f.at(-k1, -k2);
            Complex v = 0.5 * (a + std::conj(b));
            f.at(k1, k2) = v;
            f.at(-k1, -k2) = std::conj(v);
        }
    f.zero_mean();
}

double max_hermitian_defect(const SpectralField& f) {
    const int h = f.lat.half;
    double d = 0.0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            d = std::max(d, std::abs(f.at(k1, k2) - std::conj(f.at(-k1, -k2))));
    return d;
}

double inner_l2(const SpectralField& f, const SpectralField& g) {
    if (f.lat != g.lat) throw std::invalid_argument("inner_l2: lattice mismatch");
    return kTwoPi * kTwoPi * (f.c * g.c.conjugate()).real().sum();
}

double inner_h1(const SpectralField& f, const SpectralField& g) {
    if (f.lat != g.lat) throw std::invalid_argument("inner_h1: lattice mismatch");
    const int h = f.lat.half;
    double acc = 0.0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const double kk = double(k1) * k1 + double(k2) * k2;
            acc += kk * (f.at(k1, k2) * std::conj(g.at(k1, k2))).real();
        }
    return kTwoPi * kTwoPi * acc;
}

namespace {
double weighted_coeff_sum(const SpectralField& f, int pow2w) {
    const int h = f.lat.half;
    double acc = 0.0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const double kk = double(k1) * k1 + double(k2) * k2;
            double w = 1.0;
            for (int i = 0; i < pow2w; ++i) w *= kk;
            acc += w * std::norm(f.at(k1, k2));
        }
    return acc;
}
}  // namespace

double norm_l2(const SpectralField& f) { return kTwoPi * std::sqrt(weighted_coeff_sum(f, 0)); }
double norm_h1(const SpectralField& f) { return kTwoPi * std::sqrt(weighted_coeff_sum(f, 1)); }
double norm_h2(const SpectralField& f) { return kTwoPi * std::sqrt(weighted_coeff_sum(f, 2)); }

double norm_l1_fourier(const SpectralField& f) { return f.c.abs().sum(); }

double grad_l1_fourier(const SpectralField& f) {
    const int h = f.lat.half;
    double acc = 0.0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            acc += std::sqrt(double(k1) * k1 + double(k2) * k2) * std::abs(f.at(k1, k2));
    return acc;
}

double norm_l2(const VectorField& u) {
    return std::sqrt(sq(norm_l2(u.x)) + sq(norm_l2(u.y)));
}

double norm_h1(const VectorField& u) {
    return std::sqrt(sq(norm_h1(u.x)) + sq(norm_h1(u.y)));
}

double norm_l1_fourier(const VectorField& u) {
    return (u.x.c.abs2() + u.y.c.abs2()).sqrt().sum();
}

double max_divergence(const VectorField& u) {
    const int h = u.lat().half;
    double d = 0.0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            d = std::max(d, std::abs(double(k1) * u.x.at(k1, k2) + double(k2) * u.y.at(k1, k2)));
    return d;
}

double support_radius(const SpectralField& f) {
    const int h = f.lat.half;
    long best = 0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            if (f.at(k1, k2) != Complex(0, 0))
                best = std::max(best, long(k1) * k1 + long(k2) * k2);
    return std::sqrt(double(best));
}

double support_radius(const VectorField& u) {
    return std::max(support_radius(u.x), support_radius(u.y));
}

double ShellSpectrum::tail(int kappa) const {
    double acc = 0.0;
    for (int k = std::max(kappa, 1); k <= kappa_max(); ++k) acc += sum[k];
    return acc;
}

ShellSpectrum shell_spectrum(const SpectralField& f, int weight) {
    if (weight < 0) throw std::invalid_argument("shell_spectrum: weight must be >= 0");
    ShellSpectrum s;
    s.weight = weight;
    const int kmax = f.lat.kappa_max;
    s.count.assign(kmax + 1, 0);
    s.sum.assign(kmax + 1, 0.0);
    const int h = f.lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const long kk = long(k1) * k1 + long(k2) * k2;
            if (kk == 0) continue;
            // shell kappa holds kappa <= |k| < kappa+1, i.e. kappa = floor(|k|)
            const int shell = static_cast<int>(std::sqrt(double(kk)));
            if (shell > kmax) continue;
            double w = 1.0;
            for (int i = 0; i < weight; ++i) w *= double(kk);
            s.count[shell] += 1;
            s.sum[shell] += w * std::norm(f.at(k1, k2));
        }
    return s;
}

std::vector<long> shell_mode_counts(const Lattice& lat) {
    std::vector<long> counts(lat.kappa_max + 1, 0);
    const int h = lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const long kk = long(k1) * k1 + long(k2) * k2;
            if (kk == 0) continue;
            const int shell = static_cast<int>(std::sqrt(double(kk)));
            if (shell <= lat.kappa_max) counts[shell] += 1;
        }
    return counts;
}

SpectralField random_field(const Lattice& lat, std::uint64_t seed, double kappa_hi) {
    SpectralField f(lat);
    const int h = lat.half;
    const double hi2 = (kappa_hi > 0.0) ? kappa_hi * kappa_hi : kInf;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (!(k2 > 0 || (k2 == 0 && k1 > 0))) continue;  // half lattice
            const double kk = double(k1) * k1 + double(k2) * k2;
            if (kk >= hi2) continue;
            std::uint64_t a = mix64(seed ^ mix64((std::uint64_t(std::uint32_t(k1)) << 32) | std::uint32_t(k2)));
            std::uint64_t b = mix64(a);
            double re = double(a >> 11) * 0x1p-52 - 1.0;
            double im = double(b >> 11) * 0x1p-52 - 1.0;
            f.set_pair(k1, k2, Complex(re, im));
        }
    return f;
}

VectorField random_divfree_field(const Lattice& lat, std::uint64_t seed, double kappa_hi) {
    // u = perp-gradient of a random stream function: u = (-d2 psi, d1 psi)
    SpectralField psi = random_field(lat, seed, kappa_hi);
    VectorField g = gradient(psi);
    VectorField u(lat);
    u.x.c = -g.y.c;
    u.y.c = g.x.c;
    return u;
}

SpectralField add(const SpectralField& a, const SpectralField& b) {
    if (a.lat != b.lat) throw std::invalid_argument("add: lattice mismatch");
    SpectralField out = a;
    out.c += b.c;
    return out;
}

SpectralField sub(const SpectralField& a, const SpectralField& b) {
    if (a.lat != b.lat) throw std::invalid_argument("sub: lattice mismatch");
    SpectralField out = a;
    out.c -= b.c;
    return out;
}

VectorField add(const VectorField& a, const VectorField& b) {
    VectorField out = a;
    out.x.c += b.x.c;
    out.y.c += b.y.c;
    return out;
}

}  // namespace bhtlab
