#pragma once

#include <map>
#include <string>
#include <vector>

#include "bhtlab/solver.hpp"
#include "bhtlab/source.hpp"

namespace bhtlab {

/// Tags for the per-field shell statistics gathered over an ensemble.
enum class FieldTag {
    theta,
    tau,
    vartheta,
    vartheta1,
    vartheta1_lo,
    vartheta1_hi,
    phi,
    vartheta_rem,  ///< vartheta - vartheta1
    velocity,      ///< per-mode |u_k|^2 shells (deterministic)
};

const char* field_tag_name(FieldTag t);
std::vector<FieldTag> all_field_tags();

struct EnsembleConfig {
    int n_grid = 64;
    int realizations = 8;         ///< M
    std::uint64_t base_seed = 1;
    double frozen_below = -1.0;   ///< phases below this shell frozen across members;
                                  ///< negative = auto (2 kappa_bar), 0 = none
    VelocityParams velocity;
    SourceSpec source;
    SolveConfig solve;
    double fit_lo = 0.0, fit_hi = 0.0;  ///< 0 = family default window
    int threads = 1;
    bool full_decomposition = true;     ///< also solve the high-mode system and phi
    std::vector<int> checkpoints;       ///< optional stats snapshots at these member counts

    double frozen_threshold() const {
        return frozen_below < 0.0 ? 2.0 * solve.kappa_bar : frozen_below;
    }
    /// Default fit window: [3 kappa_bar, 2/3 kappa_max] (steep) or
    /// [3 kappa_bar, kappa_eta / 2] (cutoff family).
    std::pair<double, double> fit_window(const Lattice& lat) const;
    void validate() const;
};

/// Streaming per-shell mean/variance (one-pass update, folded in member
/// order so results are independent of worker scheduling). Adequate at desk
/// scale; ensembles far beyond 10^4 members would want a pairwise reduction
/// instead.
struct ShellStats {
    long n = 0;
    std::vector<double> mean, m2;

    void init(int kappa_max) {
        n = 0;
        mean.assign(kappa_max + 1, 0.0);
        m2.assign(kappa_max + 1, 0.0);
    }
    void update(const std::vector<double>& x);
    double variance(int shell) const { return n > 1 ? m2[shell] / double(n - 1) : 0.0; }
};

struct ScalarStats {
    long n = 0;
    double mean = 0.0, m2 = 0.0;
    double max = -kInf;
    void update(double x);
    double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

struct EnsembleStats {
    Lattice lat;
    int completed = 0;
    std::vector<long> mode_counts;  ///< per shell, lattice-determined
    /// key: (tag, weight) -> per-shell stats of sum_{shell} |k|^{2w} |f_k|^2
    std::map<std::pair<FieldTag, int>, ShellStats> shells;

    ScalarStats grad_tau_sq;          ///< ||grad tau||_2^2 (L2 normalization)
    ScalarStats grad_tau_sq_fourier;  ///< sum |k|^2 |tau_k|^2
    ScalarStats lo_hi_inner;          ///< (vartheta1_lo, vartheta1_hi)_{L2}
    ScalarStats residual_rel;         ///< decomposition residual per member
    ScalarStats tht_h1_margin;        ///< ||grad theta|| - |||grad|^{-1} g|| (should be <= 0)
    ScalarStats solver_applies;

    Eigen::ArrayXXd tau_mode_power_mean;  ///< mean |tau_j|^2 on the lattice grid

    const ShellStats& shell(FieldTag t, int w) const { return shells.at({t, w}); }
    /// E|| |grad|^w f^{>kappa} ||_2^2 from the mean shell table (L2 units).
    double tail(FieldTag t, int w, int kappa) const;
};

struct EnsembleResult {
    EnsembleStats stats;                      ///< at full M
    std::vector<EnsembleStats> checkpoints;   ///< per requested checkpoint
};

/// Runs M independent realizations (member m seeded by derive_seed(base, m)),
/// each through the low/high/feedback decomposition, and folds per-shell
/// statistics deterministically in member order. Throws SolverError annotated
/// with the member index and seed on any failure.
EnsembleResult run_ensemble(const EnsembleConfig& cfg);

// ---------------------------------------------------------------------------
// Closed-form expected spectrum of the far-band first iterate
// ---------------------------------------------------------------------------

struct OracleSpectrum {
    Lattice lat;
    double kappa_bar = 0.0;
    Eigen::ArrayXXd mode_power;  ///< E|vt1_hi(k)|^2; valid on |k| >= 3 kappa_bar
    std::vector<double> shell_w0, shell_w1;  ///< shell sums (coefficient units)

    double tail_w1(int kappa) const;  ///< E||grad vt1_hi^{>kappa}||^2, L2 units
    double shell_mean_w1(int kappa) const { return shell_w1[kappa]; }
};

/// Exact lattice evaluation of
///   E|vt1_hi(k)|^2 = |k|^{-4} sum_{|j|<kb} |u_{k-j}|^2 / |k-j|^2 (k^j)^2 E|tau_j|^2,
/// restricted to velocity modes with |k-j| >= 2 kb and the family support.
/// Valid for |k| >= 3 kb, where the phase factors involved are independent of
/// the low-mode solution; throws if shells below that are requested later.
/// tau_power holds E|tau_j|^2 on the lattice grid (exact when low modes are
/// frozen, an ensemble mean otherwise).
OracleSpectrum bht_oracle(const Eigen::ArrayXXd& tau_power, const VelocityParams& params,
                          double kappa_bar, const Lattice& lat);

/// Asymptotic BHT tail prediction
///   kappa^{2 beta - 2 + d} U^2 * grad_tau_power_fourier * 4 pi^3 / (-2 beta)
/// with d = 2. grad_tau_power_fourier is the coefficient-space gradient power
/// sum_j |j|^2 E|tau_j|^2 (i.e. E||grad tau||_2^2 / (2 pi)^2); with that
/// normalization the returned value approximates the L2 tail
/// E||grad vt1^{>kappa}||_2^2.
double bht_prediction(double kappa, const VelocityParams& params, double grad_tau_power_fourier);

// ---------------------------------------------------------------------------
// Tables, fits, remainder diagnostics
// ---------------------------------------------------------------------------

/// kappa -> E|| |grad|^w f^{>kappa} ||_2^2 (L2 units), kappa = 1..kappa_max.
std::vector<double> tail_spectrum(const EnsembleStats& stats, FieldTag tag, int w);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    int points = 0;
    double window_lo = 0.0, window_hi = 0.0;
    std::vector<double> residuals;
};

/// Ordinary least squares of log(value) against log(kappa) over the window.
/// Requires at least five shells and positive values.
FitResult fit_exponent(const std::vector<double>& kappas, const std::vector<double>& values,
                       double window_lo, double window_hi);

struct RemainderRow {
    double kappa = 0.0;
    double rem_vartheta = 0.0;  ///< ||grad (vt - vt1)^{>kappa}|| * kappa^{-beta}
    double rem_phi = 0.0;       ///< ||grad phi^{>kappa}|| * kappa^{-beta}
    double leading = 0.0;       ///< sqrt(E||grad vt1^{>kappa}||^2) * kappa^{-beta}
    double ratio = 0.0;         ///< (rem_vartheta + rem_phi) / leading
};

struct RemainderReport {
    std::vector<RemainderRow> rows;
    double dominance_scale = 0.0;  ///< ||u_hat||_1 log^2(kb) / kb, the smallness gauge
};

RemainderReport remainder_report(const EnsembleStats& stats, double kappa_bar,
                                 const VelocityParams& params, double u_l1_fourier);

}  // namespace bhtlab
