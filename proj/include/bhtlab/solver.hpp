#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bhtlab/transform.hpp"
#include "bhtlab/velocity.hpp"

namespace bhtlab {

struct SolverError : std::runtime_error {
    double last_residual;
    explicit SolverError(const std::string& what, double residual = -1.0)
        : std::runtime_error(what), last_residual(residual) {}
};

enum class SolveMethod { krylov, fixed_point };

struct SolveConfig {
    double tol = 1e-9;      ///< relative residual ||-lap th + u.grad th - g||_2 / ||g||_2
    int max_iter = 4000;    ///< cap on operator applications
    SolveMethod method = SolveMethod::krylov;
    double kappa_bar = 0.0; ///< split wavenumber for the decomposition (>= kappa_g)
    int n_max = 20;         ///< iteration depth for the high-mode Picard sweep
    double picard_stop_rel = 1e-3;  ///< stop when ||grad dvt|| <= this * ||grad vt1||
    int restart = 40;       ///< Krylov restart length
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;             ///< operator applications
    double rel_residual = 0.0;      ///< final true relative residual
    std::vector<double> residual_history;  ///< estimated preconditioned residuals
    std::string method;
};

// ---------------------------------------------------------------------------
// Direct solves of -lap(theta) + (u . grad theta)^{band} = g
// ---------------------------------------------------------------------------

/// Full-operator solve, matrix-free with the inverse Laplacian as
/// preconditioner. The preconditioned operator is identity plus a term that
/// is skew in the gradient inner product (incompressibility), so a
/// residual-minimizing Krylov iteration in that inner product converges at
/// any amplitude; plain fixed-point iteration is kept as an option and
/// fails loudly when it diverges.
SpectralField solve_direct(const VectorField& u, const SpectralField& g, const SolveConfig& cfg,
                           TransformEngine& engine, SolveReport* report = nullptr);

/// Same machinery with the advection term band-projected to
/// [band_lo, band_hi) before it enters the equation.
SpectralField solve_banded(AdvectionOperator& adv, double band_lo, double band_hi,
                           const SpectralField& g, const SolveConfig& cfg,
                           SolveReport* report = nullptr);

// ---------------------------------------------------------------------------
// Small-amplitude Picard path
// ---------------------------------------------------------------------------

struct PicardResult {
    SpectralField tau0;       ///< inverse-Laplacian solve of the source
    SpectralField vartheta1;  ///< first iterate
    SpectralField vartheta;   ///< final iterate
    std::vector<double> increment_grad_norms;  ///< ||grad dvt^{(n)}||_2, n = 1,2,...
    double contraction_majorant = 0.0;         ///< ||u_hat||_1 (rigorous on the lattice)
    bool converged = false;
};

/// theta = tau0 + vartheta with tau0 = (-lap)^{-1} g and
/// vartheta^{(n+1)} = lap^{-1}(u.grad vartheta^{(n)} + u.grad tau0).
/// Contracts when ||u_hat||_1 < 1; three consecutive growing increments
/// raise SolverError recommending the split-wavenumber path.
PicardResult picard_small_u(const VectorField& u, const SpectralField& g, int n_max,
                            TransformEngine& engine, double stop_rel = 1e-14);

// ---------------------------------------------------------------------------
// Split wavenumber
// ---------------------------------------------------------------------------

struct KappaBarResult {
    double value = 0.0;
    int active_term = 0;   ///< 0: kappa_g, 1: ||u||_inf^2, 2: c' ||u||_inf^2 ||u||_2^{1/beta}
    bool feasible = false; ///< value <= kappa_max / 3
};

/// Threshold 2^{m_beta} * max{kappa_g, ||u||_inf^2, c' ||u||_inf^2 ||u||_2^{1/beta}}
/// with the l1_fourier majorant standing in for ||u||_inf.
KappaBarResult kappa_bar_formula(const VelocityParams& p, const VectorField& u, double kappa_g,
                                 double c_prime);

/// Checked variant: throws when the BHT window [3 kappa_bar, kappa_max] would
/// be empty at this resolution.
double kappa_bar(const VelocityParams& p, const VectorField& u, double kappa_g, double c_prime);

// ---------------------------------------------------------------------------
// Low-mode system and high-mode iteration
// ---------------------------------------------------------------------------

/// Solve -lap(tau) + (u.grad tau)^{<kb} = g with tau supported on |k| < kb,
/// by a dense solve on the low-mode subspace. Only velocity modes below 2 kb
/// can couple low modes to low modes, so passing u or its < 2 kb projection
/// gives the same system.
SpectralField solve_low_mode(const VectorField& u, const SpectralField& g, double kb,
                             const SolveConfig& cfg, SolveReport* report = nullptr);

struct VarthetaResult {
    SpectralField vartheta1;     ///< lap^{-1} (u.grad tau)^{>kb}
    SpectralField vartheta1_lo;  ///< same with u^{<2kb}; supported in [kb, 3kb)
    SpectralField vartheta1_hi;  ///< same with u^{>2kb}
    SpectralField vartheta;      ///< solution of the high-mode system
    std::vector<double> increment_grad_norms;
    std::string method;          ///< "picard" or "krylov"
    SolveReport report;
};

/// First iterate, its velocity-band split, and the solution of
/// -lap(vt) + (u.grad vt)^{>kb} = -(u.grad tau)^{>kb}. The Picard sweep is
/// attempted first and its increments recorded; if it diverges the system is
/// re-solved by the Krylov path (or, with strict = true, SolverError is
/// raised: the split wavenumber is too small for the iteration).
VarthetaResult iterate_vartheta(const VectorField& u, const SpectralField& tau, double kb,
                                const SolveConfig& cfg, TransformEngine& engine,
                                bool strict = false);

/// Full-operator solve of -lap(phi) + u.grad phi = -(u.grad vartheta)^{<kb}.
SpectralField solve_phi(const VectorField& u, const SpectralField& vartheta, double kb,
                        const SolveConfig& cfg, TransformEngine& engine,
                        SolveReport* report = nullptr);

// ---------------------------------------------------------------------------
// Decomposition driver
// ---------------------------------------------------------------------------

struct Decomposition {
    double kappa_bar = 0.0;
    SpectralField tau, vartheta1, vartheta1_lo, vartheta1_hi, vartheta, phi;
    SpectralField theta;  ///< tau + vartheta + phi
    std::vector<double> increment_grad_norms;
    std::string vartheta_method;
    SolveReport tau_report, vartheta_report, phi_report;
    double residual_rel = 0.0;  ///< of theta against the unsplit equation
};

/// tau / vartheta / phi pipeline at split wavenumber cfg.kappa_bar; the three
/// equations telescope to the unsplit one, which is checked and recorded.
Decomposition decompose(const VectorField& u, const SpectralField& g, const SolveConfig& cfg,
                        TransformEngine& engine);

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct HighmodeBoundRow {
    double kappa = 0.0;
    double tail_grad = 0.0;   ///< ||grad f^{>kappa}||_2
    double scale = 0.0;       ///< kappa^beta ||u||_2 * grad-sup majorant of f
    double ratio = 0.0;
};

struct HighmodeBoundReport {
    std::vector<HighmodeBoundRow> rows;
    double max_ratio = 0.0;  ///< measured stand-in for the generic constant
};

/// Measured BHT-style upper-bound ratios r(kappa) = ||grad f^{>kappa}||_2 /
/// (kappa^beta ||u||_2 ||grad f||_inf-majorant) over the given shells.
HighmodeBoundReport highmode_bound_report(const SpectralField& f, const VectorField& u,
                                          const VelocityParams& params,
                                          const std::vector<double>& kappas);

/// ||grad f^{>kappa}||_2 computed directly from coefficients (corner modes
/// included, unlike shell-table tails).
double grad_tail_norm(const SpectralField& f, double kappa);

/// Residual of the unsplit equation: ||-lap f + u.grad f - g||_2 / ||g||_2.
double equation_residual(const VectorField& u, const SpectralField& f, const SpectralField& g,
                         TransformEngine& engine);

}  // namespace bhtlab
