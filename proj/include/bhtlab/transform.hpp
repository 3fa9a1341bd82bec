#pragma once

#include <Eigen/Dense>
#include <memory>

#include "bhtlab/spectral_field.hpp"

namespace bhtlab {

/// In-place 2D complex transforms on a fixed square grid. One instance per
/// thread; plans and scratch are not shareable.
class Fft2D {
public:
    explicit Fft2D(int n);
    ~Fft2D();
    Fft2D(Fft2D&&) noexcept;
    Fft2D& operator=(Fft2D&&) noexcept;

    int size() const { return n_; }

    /// Unnormalized forward DFT: out_k = sum_m a_m exp(-i 2pi k.m / n).
    void fwd(Eigen::MatrixXcd& a);
    /// Unnormalized inverse DFT: out_m = sum_k a_k exp(+i 2pi k.m / n).
    void inv(Eigen::MatrixXcd& a);

private:
    struct Impl;
    int n_ = 0;
    std::unique_ptr<Impl> impl_;
};

/// Zero-padded transform engine for one lattice. The padded grid has
/// pad >= 3*half + 1 points per axis, so truncated products of retained
/// modes come back alias-free (exact Galerkin convolution).
class TransformEngine {
public:
    explicit TransformEngine(const Lattice& lat);

    const Lattice& lattice() const { return lat_; }
    int pad() const { return pad_; }

    /// Collocation values of the field on the padded grid (x_m = 2pi m / pad).
    void to_grid(const SpectralField& f, Eigen::MatrixXcd& grid);
    /// Truncate grid values back to retained coefficients.
    void to_coeffs(const Eigen::MatrixXcd& grid, SpectralField& f);

    /// Exact truncated convolution: coefficients of the pointwise product a*b
    /// restricted to the lattice.
    SpectralField product(const SpectralField& a, const SpectralField& b);

    /// u . grad(f), dealiased; u is transformed on every call.
    SpectralField advect(const VectorField& u, const SpectralField& f);

private:
    Lattice lat_;
    int pad_ = 0;
    Fft2D fft_;
    Eigen::MatrixXcd buf_a_, buf_b_;
    friend class AdvectionOperator;
};

/// Advection by a fixed velocity: caches the collocation grids of u so each
/// apply() costs three transforms. Owns per-instance scratch.
class AdvectionOperator {
public:
    AdvectionOperator(const VectorField& u, TransformEngine& engine);

    /// out = (u . grad f) truncated to the lattice; Hermitian re-enforced.
    void apply(const SpectralField& f, SpectralField& out);
    SpectralField apply(const SpectralField& f);

private:
    TransformEngine* engine_;
    Eigen::MatrixXcd ux_grid_, uy_grid_;
    Eigen::MatrixXcd work_, work2_;
    SpectralField df_;
};

/// Supremum-norm family evaluated on a 2x oversampled collocation grid. The
/// grid maximum is a lower bound for the true supremum; inequality checks
/// that need an upper bound should use the l1_fourier majorants instead.
struct FieldNorms {
    double l2 = 0;
    double h1 = 0;
    double h2 = 0;
    double l1_fourier = 0;
    double linf = 0;   ///< grid max of |f|
    double w1inf = 0;  ///< grid max of |grad f| (Euclidean)
};

FieldNorms norms(const SpectralField& f);

/// Grid max of |f| on a factor-times oversampled grid.
double sup_on_grid(const SpectralField& f, int factor = 2);
/// Grid max of the Euclidean modulus of a vector field.
double sup_on_grid(const VectorField& u, int factor = 2);
/// Max imaginary part left on the collocation grid (realness diagnostic).
double max_imag_on_grid(const SpectralField& f, int factor = 1);

/// Convenience one-shot wrappers (allocate their own engine; fine outside
/// hot loops).
SpectralField dealiased_product(const SpectralField& a, const SpectralField& b);
SpectralField advect(const VectorField& u, const SpectralField& f);

/// Smallest transform size >= lo with only factors 2 and 3.
int fft_friendly_size(int lo);

}  // namespace bhtlab
