#pragma once

#include "bhtlab/random_phase.hpp"
#include "bhtlab/spectral_field.hpp"

namespace bhtlab {

/// Random divergence-free velocity u = iU sum |k|^{beta-1} kperp X_k exp(ik.x).
/// Two families: a steep spectrum (beta < -2, all retained modes) and the
/// marginal beta = -2 case with an ultraviolet cutoff at kappa_eta
/// (the Kraichnan k^-3 energy-spectrum analogue).
struct VelocityParams {
    enum class Family { steep, kraichnan };

    Family family = Family::kraichnan;
    double amplitude = 1.0;  ///< U
    double beta = -2.0;      ///< spectral slope; fixed at -2 for kraichnan
    int kappa_eta = 0;       ///< cutoff shell (kraichnan only)

    static VelocityParams steep(double amplitude, double beta);
    static VelocityParams kraichnan(double amplitude, int kappa_eta);

    /// Iteration-depth exponent ceil(-2 beta - 1): 3 for the cutoff family,
    /// 4 at beta = -2.5.
    int m_beta() const;

    void validate(const Lattice& lat) const;  ///< throws on invalid combinations
};

/// Deterministic per-mode power |u_k|^2 = U^2 |k|^{2 beta} on the support
/// (zero beyond the cutoff / off the lattice).
double velocity_mode_power(const VelocityParams& p, const Lattice& lat, int k1, int k2);

/// Synthesize the velocity: u_k = iU |k|^{beta-1} kperp X_k, kperp = (-k2, k1).
VectorField build_velocity(const VelocityParams& p, const RandomPhaseField& phases);

/// Closed-form norms by direct lattice summation (deterministic: |u_k| does
/// not depend on the phases) plus the continuum approximations used for
/// scaling comparisons.
class VelocityAnalysis {
public:
    VelocityAnalysis(const VelocityParams& p, const Lattice& lat) : p_(p), lat_(lat) {}

    double l2_exact() const;                 ///< ||u||_2
    double l2_tail(double kappa) const;      ///< ||u^{>kappa}||_2
    double h1_exact() const;                 ///< ||grad u||_2
    double l1_fourier_exact() const;         ///< sum_k |u_k|
    double l2_continuum() const;             ///< radial-integral approximation of ||u||_2
    double l2_tail_continuum(double kappa) const;

private:
    VelocityParams p_;
    Lattice lat_;
};

}  // namespace bhtlab
