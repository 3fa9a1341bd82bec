#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <vector>

#include "bhtlab/lattice.hpp"

namespace bhtlab {

using Complex = std::complex<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Scalar field on the torus, stored as the full redundant grid of Fourier
/// coefficients c(k) for |k1|,|k2| <= half. Real-valued fields keep the
/// Hermitian invariant c(-k) = conj(c(k)); the k = 0 slot is always zero.
struct SpectralField {
    Lattice lat;
    Eigen::ArrayXXcd c;  ///< c(k1+half, k2+half)

    SpectralField() = default;
    explicit SpectralField(const Lattice& l) : lat(l), c(Eigen::ArrayXXcd::Zero(l.extent(), l.extent())) {}

    Complex& at(int k1, int k2) { return c(k1 + lat.half, k2 + lat.half); }
    const Complex& at(int k1, int k2) const { return c(k1 + lat.half, k2 + lat.half); }

    /// Set the Hermitian pair c(k) = v, c(-k) = conj(v).
    void set_pair(int k1, int k2, Complex v) {
        at(k1, k2) = v;
        at(-k1, -k2) = std::conj(v);
    }

    void zero_mean() { at(0, 0) = Complex(0.0, 0.0); }
};

/// Two-component field (velocities, gradients). Components share one lattice.
struct VectorField {
    SpectralField x, y;

    VectorField() = default;
    explicit VectorField(const Lattice& l) : x(l), y(l) {}
    const Lattice& lat() const { return x.lat; }
};

// ---------------------------------------------------------------------------
// Spectral multipliers and projections
// ---------------------------------------------------------------------------

/// Band projection: retains modes with kappa_lo <= |k| < kappa_hi (closed
/// below, open above), zeroes the rest. Idempotent. Throws on kappa_lo >= kappa_hi.
SpectralField project(const SpectralField& f, double kappa_lo, double kappa_hi);
void project_inplace(SpectralField& f, double kappa_lo, double kappa_hi);

/// c(k) *= |k|^s. The zero mode is absent by construction.
SpectralField fractional_laplacian(const SpectralField& f, double s);

/// Solves -lap(x) = f on the lattice: c(k) / |k|^2.
SpectralField poisson_solve(const SpectralField& f);

/// Component j carries i*k_j*c(k).
VectorField gradient(const SpectralField& f);

/// Restore the Hermitian invariant exactly (averages k and conj(-k) entries)
/// and re-zero the mean. Cheap; used after transform round trips.
void enforce_hermitian(SpectralField& f);

double max_hermitian_defect(const SpectralField& f);

// ---------------------------------------------------------------------------
// Inner products and coefficient norms
// ---------------------------------------------------------------------------

/// L2 inner product (f, g) = (2pi)^2 sum_k f_k conj(g_k); real part returned
/// (imaginary part vanishes for Hermitian fields).
double inner_l2(const SpectralField& f, const SpectralField& g);

/// H1 (gradient) inner product: (2pi)^2 sum |k|^2 f_k conj(g_k), real part.
double inner_h1(const SpectralField& f, const SpectralField& g);

double norm_l2(const SpectralField& f);       ///< ||f||_2 = 2pi ||c||_2
double norm_h1(const SpectralField& f);       ///< ||grad f||_2
double norm_h2(const SpectralField& f);       ///< ||lap f||_2
double norm_l1_fourier(const SpectralField& f);   ///< sum_k |c(k)|; majorant for ||f||_inf
double grad_l1_fourier(const SpectralField& f);   ///< sum_k |k||c(k)|; majorant for ||grad f||_inf

double norm_l2(const VectorField& u);
double norm_h1(const VectorField& u);
double norm_l1_fourier(const VectorField& u);     ///< sum_k of the Euclidean modulus of (ux_k, uy_k)

/// Largest |k . u_k| over retained modes (0 for divergence-free fields).
double max_divergence(const VectorField& u);

/// Radius of the smallest origin-centred disc containing every nonzero mode
/// (0 for the zero field). Products of band-limited fields are supported
/// inside the sum of the factors' radii.
double support_radius(const SpectralField& f);
double support_radius(const VectorField& u);

// ---------------------------------------------------------------------------
// Shell spectra
// ---------------------------------------------------------------------------

/// Per-integer-shell sums of |k|^{2w} |c(k)|^2 over kappa <= |k| < kappa+1,
/// for shells 1..kappa_max. Pure coefficient sums: multiply by (2pi)^2 for
/// L2-normed quantities.
struct ShellSpectrum {
    int weight = 0;
    std::vector<long> count;   ///< index 1..kappa_max (index 0 unused)
    std::vector<double> sum;

    int kappa_max() const { return static_cast<int>(sum.size()) - 1; }
    /// Cumulative sum over shells kappa..kappa_max.
    double tail(int kappa) const;
};

ShellSpectrum shell_spectrum(const SpectralField& f, int weight);

/// Shell mode counts alone; depends only on the lattice.
std::vector<long> shell_mode_counts(const Lattice& lat);

// ---------------------------------------------------------------------------
// Field construction helpers
// ---------------------------------------------------------------------------

/// Deterministic pseudo-random real field with unit-variance coefficients on
/// shells 1..kappa_hi, Hermitian by construction. Test/diagnostic helper.
SpectralField random_field(const Lattice& lat, std::uint64_t seed, double kappa_hi = 0.0);

/// Divergence-free random field built from a random stream function.
VectorField random_divfree_field(const Lattice& lat, std::uint64_t seed, double kappa_hi = 0.0);

SpectralField add(const SpectralField& a, const SpectralField& b);
SpectralField sub(const SpectralField& a, const SpectralField& b);
VectorField add(const VectorField& a, const VectorField& b);
VectorField project(const VectorField& u, double kappa_lo, double kappa_hi);

}  // namespace bhtlab
