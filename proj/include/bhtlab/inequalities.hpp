#pragma once

#include <string>
#include <vector>

#include "bhtlab/transform.hpp"
#include "bhtlab/velocity.hpp"

namespace bhtlab {

// ---------------------------------------------------------------------------
// Log-polynomial tail ladder
// ---------------------------------------------------------------------------

/// L_m(kappa, r) = log^m k + (m/r) log^{m-1} k + ... + m!/r^m, the closed form
/// of r kappa^r * integral_kappa^inf k^{-r-1} log^m k dk.
double log_ladder(double kappa, double r, int m);

/// Independent quadrature of integral_kappa^inf k^{-r-1} log^m k dk
/// (adaptive Simpson after an exponential substitution).
double tail_log_integral(double kappa, double r, int m, double rel_tol = 1e-12);

// ---------------------------------------------------------------------------
// Kernel L1 norms
// ---------------------------------------------------------------------------

/// 1D Dirichlet-type kernels. `symmetric` is sum_{|k|<=N} e^{ikx} with
/// modulus |sin((2N+1)x/2)| / |sin(x/2)|; `one_sided` is sum_{k=1..N} e^{ikx}
/// with modulus |sin(Nx/2)| / |sin(x/2)|. Indexed by their own N, the two
/// variants coincide in modulus when the symmetric kernel with parameter M is
/// paired with the one-sided kernel of 2M+1 terms.
enum class DirichletVariant { symmetric, one_sided };

/// (2 pi)^{-1} L1 norm by composite quadrature at a resolution scaled with N.
double dirichlet_l1(int n, DirichletVariant variant);

/// High-mode multiplier kernels on the 2D torus, truncated to a synthesis
/// band of band_factor * kappa per axis and integrated on a grid of
/// grid_factor * band points.
struct KernelSpec {
    enum class Kind { smoothing, riesz };  ///< |grad|^{-s} vs |grad|^{-s-1} d_1
    Kind kind = Kind::smoothing;
    double s = 1.0;
    int kappa = 8;        ///< high-mode cutoff, modes with |k| >= kappa kept
    int band_factor = 4;  ///< synthesis band half-width = band_factor * kappa
    int grid_factor = 4;  ///< quadrature grid = grid_factor * (2 * band + 1), rounded up
};

struct KernelResult {
    double l1 = 0.0;          ///< integral of |kernel| / (2 pi)^2
    double bound_ratio = 0.0; ///< l1 * kappa^s / ladder scale (measured constant)
    int grid = 0;
    int band = 0;
};

KernelResult kernel_l1(const KernelSpec& spec);

/// Physical-grid values of the synthesized kernel (for symmetry checks).
Eigen::MatrixXcd kernel_grid(const KernelSpec& spec);

// ---------------------------------------------------------------------------
// Field inequality witnesses
// ---------------------------------------------------------------------------

/// One checked inequality: pass iff left <= right * (1 + slack). For generic-
/// constant inequalities `measured_constant` holds left/right-envelope and the
/// pass criterion is recorded stability, not a fixed bound.
struct BoundReport {
    std::string id;
    double left = 0.0;
    double right = 0.0;
    double measured_constant = 0.0;
    double slack = 0.0;
    bool pass = false;
    std::string note;
};

/// Lattice witnesses for the basic inequalities: divergence form bounded in
/// L2 (constant exactly 1), Agmon and Brezis-Gallouet forms of the sup bound,
/// the tail Poincare inequality (exact), the low-mode log-Sobolev-style sup
/// bound, and the amplitude bound on ||u_hat||_1 for steep velocities.
std::vector<BoundReport> verify_field_inequalities(const VectorField& u,
                                                   const SpectralField& theta,
                                                   const SpectralField& g,
                                                   const std::vector<double>& kappas);

/// Young's convolution inequality on the lattice, physical and coefficient
/// forms, for exponents in {1, 2, inf} with 1 + 1/r = 1/p + 1/q.
/// Throws on an invalid exponent triple.
std::vector<BoundReport> young_convolution_check(const SpectralField& f, const SpectralField& g,
                                                 double p, double q, double r);

// ---------------------------------------------------------------------------
// Suite driver
// ---------------------------------------------------------------------------

struct VerificationOptions {
    int n_grid = 64;
    std::uint64_t seed = 7;
    std::string only;  ///< substring filter on report ids ("" = all)
    bool quick = false; ///< trims the largest kernel sizes (used by smoke tests)
};

struct VerificationSuiteResult {
    std::vector<BoundReport> reports;
    bool all_pass = true;
    /// stable named constants for regression pinning
    std::vector<std::pair<std::string, double>> measured_constants;
};

/// Runs the whole witness suite: ladder-vs-quadrature, Dirichlet and
/// multiplier kernel families, field inequalities on seeded random data, and
/// the Young checks.
VerificationSuiteResult run_verification_suite(const VerificationOptions& opt);

}  // namespace bhtlab
