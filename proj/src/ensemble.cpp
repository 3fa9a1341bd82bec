#include "bhtlab/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <tuple>

namespace bhtlab {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kFourPiSq = 4.0 * kPi * kPi;
}

const char* field_tag_name(FieldTag t) {
    switch (t) {
        case FieldTag::theta: return "theta";
        case FieldTag::tau: return "tau";
        case FieldTag::vartheta: return "vartheta";
        case FieldTag::vartheta1: return "vartheta1";
        case FieldTag::vartheta1_lo: return "vartheta1_lo";
        case FieldTag::vartheta1_hi: return "vartheta1_hi";
        case FieldTag::phi: return "phi";
        case FieldTag::vartheta_rem: return "vartheta_rem";
        case FieldTag::velocity: return "velocity";
    }
    return "?";
}

std::vector<FieldTag> all_field_tags() {
    return {FieldTag::theta,        FieldTag::tau,          FieldTag::vartheta,
            FieldTag::vartheta1,    FieldTag::vartheta1_lo, FieldTag::vartheta1_hi,
            FieldTag::phi,          FieldTag::vartheta_rem, FieldTag::velocity};
}

std::pair<double, double> EnsembleConfig::fit_window(const Lattice& lat) const {
    if (fit_lo > 0.0 && fit_hi > 0.0) return {fit_lo, fit_hi};
    const double lo = 3.0 * solve.kappa_bar;
    const double hi = (velocity.family == VelocityParams::Family::kraichnan)
                          ? velocity.kappa_eta / 2.0
                          : lat.kappa_max * 2.0 / 3.0;
    return {lo, hi};
}

void EnsembleConfig::validate() const {
    Lattice lat(n_grid);
    velocity.validate(lat);
    source.validate();
    if (realizations < 1) throw std::invalid_argument("ensemble: M must be >= 1");
    if (solve.kappa_bar < source.kappa_g)
        throw std::invalid_argument("ensemble: kappa_bar must be >= kappa_g");
    auto [lo, hi] = fit_window(lat);
    if (hi > lat.kappa_max) throw std::invalid_argument("ensemble: fit window exceeds kappa_max");
    if (lo < 3.0 * solve.kappa_bar)
        throw std::invalid_argument("ensemble: fit window must start at or above 3 kappa_bar");
    for (int c : checkpoints)
        if (c < 1 || c > realizations)
            throw std::invalid_argument("ensemble: checkpoint outside 1..M");
}

void ShellStats::update(const std::vector<double>& x) {
    ++n;
    for (size_t i = 0; i < mean.size(); ++i) {
        const double d = x[i] - mean[i];
        mean[i] += d / double(n);
        m2[i] += d * (x[i] - mean[i]);
    }
}

void ScalarStats::update(double x) {
    ++n;
    const double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
    max = std::max(max, x);
}

double EnsembleStats::tail(FieldTag t, int w, int kappa) const {
    const ShellStats& s = shell(t, w);
    double acc = 0.0;
    for (int k = std::max(1, kappa); k < int(s.mean.size()); ++k) acc += s.mean[k];
    return kFourPiSq * acc;
}

// ----------------------------------------------------------------------------
// run_ensemble
// ----------------------------------------------------------------------------

namespace {

struct MemberData {
    std::map<std::pair<FieldTag, int>, std::vector<double>> shells;
    double grad_tau_sq = 0.0;
    double grad_tau_sq_fourier = 0.0;
    double lo_hi_inner = 0.0;
    double residual_rel = 0.0;
    double tht_h1_margin = 0.0;
    double applies = 0.0;
    Eigen::ArrayXXd tau_power;
};

std::vector<double> shell_values(const SpectralField& f, int w) {
    ShellSpectrum s = shell_spectrum(f, w);
    return s.sum;
}

MemberData run_member(const EnsembleConfig& cfg, const Lattice& lat, int member,
                      TransformEngine& engine, const SpectralField& g) {
    MemberData md;
    const std::uint64_t seed = derive_seed(cfg.base_seed, member);
    RandomPhaseField phases = sample_phases(seed, lat, cfg.frozen_threshold());
    VectorField u = build_velocity(cfg.velocity, phases);

    Decomposition d;
    if (cfg.full_decomposition) {
        d = decompose(u, g, cfg.solve, engine);
    } else {
        // first-iterate pipeline: tau and the vt1 family only; the infinite
        // tolerance suppresses the high-mode polish solve
        d.kappa_bar = cfg.solve.kappa_bar;
        d.tau = solve_low_mode(u, g, cfg.solve.kappa_bar, cfg.solve, &d.tau_report);
        SolveConfig shallow = cfg.solve;
        shallow.n_max = 1;
        shallow.tol = kInf;
        VarthetaResult vr = iterate_vartheta(u, d.tau, cfg.solve.kappa_bar, shallow, engine);
        d.vartheta1 = std::move(vr.vartheta1);
        d.vartheta1_lo = std::move(vr.vartheta1_lo);
        d.vartheta1_hi = std::move(vr.vartheta1_hi);
        d.vartheta = d.vartheta1;
        d.phi = SpectralField(lat);
        d.theta = add(d.tau, d.vartheta);
        d.residual_rel = 0.0;
    }

    SpectralField rem = sub(d.vartheta, d.vartheta1);
    SpectralField umag(lat);
    umag.c = (u.x.c.abs2() + u.y.c.abs2()).sqrt();

    for (int w : {0, 1}) {
        md.shells[{FieldTag::theta, w}] = shell_values(d.theta, w);
        md.shells[{FieldTag::tau, w}] = shell_values(d.tau, w);
        md.shells[{FieldTag::vartheta, w}] = shell_values(d.vartheta, w);
        md.shells[{FieldTag::vartheta1, w}] = shell_values(d.vartheta1, w);
        md.shells[{FieldTag::vartheta1_lo, w}] = shell_values(d.vartheta1_lo, w);
        md.shells[{FieldTag::vartheta1_hi, w}] = shell_values(d.vartheta1_hi, w);
        md.shells[{FieldTag::phi, w}] = shell_values(d.phi, w);
        md.shells[{FieldTag::vartheta_rem, w}] = shell_values(rem, w);
        md.shells[{FieldTag::velocity, w}] = shell_values(umag, w);
    }

    const double gt = norm_h1(d.tau);
    md.grad_tau_sq = gt * gt;
    md.grad_tau_sq_fourier = md.grad_tau_sq / kFourPiSq;
    md.lo_hi_inner = inner_l2(d.vartheta1_lo, d.vartheta1_hi);
    md.residual_rel = d.residual_rel;
    md.tht_h1_margin = norm_h1(d.theta) - norm_l2(fractional_laplacian(g, -1.0));
    md.applies = double(d.tau_report.iterations + d.vartheta_report.iterations +
                        d.phi_report.iterations);
    md.tau_power = d.tau.c.abs2();
    return md;
}

void fold(EnsembleStats& st, const MemberData& md) {
    for (auto& [key, stats] : st.shells) stats.update(md.shells.at(key));
    st.grad_tau_sq.update(md.grad_tau_sq);
    st.grad_tau_sq_fourier.update(md.grad_tau_sq_fourier);
    st.lo_hi_inner.update(md.lo_hi_inner);
    st.residual_rel.update(md.residual_rel);
    st.tht_h1_margin.update(md.tht_h1_margin);
    st.solver_applies.update(md.applies);
    if (st.tau_mode_power_mean.size() == 0)
        st.tau_mode_power_mean = Eigen::ArrayXXd::Zero(md.tau_power.rows(), md.tau_power.cols());
    st.tau_mode_power_mean += (md.tau_power - st.tau_mode_power_mean) / double(st.completed + 1);
    ++st.completed;
}

EnsembleStats make_stats(const Lattice& lat) {
    EnsembleStats st;
    st.lat = lat;
    st.mode_counts = shell_mode_counts(lat);
    for (FieldTag t : all_field_tags())
        for (int w : {0, 1}) st.shells[{t, w}].init(lat.kappa_max);
    return st;
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
    cfg.validate();
    const Lattice lat(cfg.n_grid);
    const SpectralField g = cfg.source.build(lat);
    const int M = cfg.realizations;

    std::vector<MemberData> members(M);
    std::vector<std::string> failures(M);
    const int workers = std::max(1, std::min(cfg.threads, M));
    std::atomic<int> next{0};
    auto work = [&]() {
        TransformEngine engine(lat);
        for (;;) {
            const int m = next.fetch_add(1);
            if (m >= M) return;
            try {
                members[m] = run_member(cfg, lat, m, engine, g);
            } catch (const std::exception& e) {
                failures[m] = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (int m = 0; m < M; ++m)
        if (!failures[m].empty())
            throw SolverError("ensemble member " + std::to_string(m) + " (seed " +
                              std::to_string(derive_seed(cfg.base_seed, m)) +
                              ") failed: " + failures[m]);

    // deterministic fold in member order, snapshotting at checkpoints
    EnsembleResult result;
    EnsembleStats st = make_stats(lat);
    std::vector<int> checks = cfg.checkpoints;
    std::sort(checks.begin(), checks.end());
    size_t ci = 0;
    for (int m = 0; m < M; ++m) {
        fold(st, members[m]);
        while (ci < checks.size() && checks[ci] == m + 1) {
            result.checkpoints.push_back(st);
            ++ci;
        }
    }
    result.stats = std::move(st);
    return result;
}

// ----------------------------------------------------------------------------
// Oracle and prediction
// ----------------------------------------------------------------------------

OracleSpectrum bht_oracle(const Eigen::ArrayXXd& tau_power, const VelocityParams& params,
                          double kappa_bar, const Lattice& lat) {
    OracleSpectrum out;
    out.lat = lat;
    out.kappa_bar = kappa_bar;
    const int e = lat.extent();
    out.mode_power = Eigen::ArrayXXd::Zero(e, e);
    out.shell_w0.assign(lat.kappa_max + 1, 0.0);
    out.shell_w1.assign(lat.kappa_max + 1, 0.0);
    if (tau_power.rows() != e || tau_power.cols() != e)
        throw std::invalid_argument("bht_oracle: tau power table has the wrong extent");

    const int h = lat.half;
    const double kb2 = kappa_bar * kappa_bar;
    const double lo2 = 9.0 * kb2;  // valid region |k| >= 3 kappa_bar
    const double split2 = 4.0 * kb2;
    const int jspan = int(std::ceil(kappa_bar));

    // collect low modes with nonzero weight
    std::vector<std::tuple<int, int, double>> low;
    for (int j2 = -jspan; j2 <= jspan; ++j2)
        for (int j1 = -jspan; j1 <= jspan; ++j1) {
            if (j1 == 0 && j2 == 0) continue;
            if (double(j1) * j1 + double(j2) * j2 >= kb2) continue;
            const double w = tau_power(j1 + h, j2 + h);
            if (w > 0.0) low.emplace_back(j1, j2, w);
        }

    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const double kk = double(k1) * k1 + double(k2) * k2;
            if (kk < lo2) continue;
            double acc = 0.0;
            for (auto& [j1, j2, tw] : low) {
                const int m1 = k1 - j1, m2 = k2 - j2;
                const double mm = double(m1) * m1 + double(m2) * m2;
                if (mm < split2) continue;  // far-band velocity only
                const double up = velocity_mode_power(params, lat, m1, m2);
                if (up == 0.0) continue;
                const double wedge = double(k1) * j2 - double(k2) * j1;
                acc += up / mm * wedge * wedge * tw;
            }
            const double val = acc / (kk * kk);
            out.mode_power(k1 + h, k2 + h) = val;
            const int shell = int(std::sqrt(kk));
            if (shell <= lat.kappa_max) {
                out.shell_w0[shell] += val;
                out.shell_w1[shell] += kk * val;
            }
        }
    return out;
}

double OracleSpectrum::tail_w1(int kappa) const {
    if (kappa < 3.0 * kappa_bar - 1e-12)
        throw std::invalid_argument("oracle: shells below 3 kappa_bar are outside its validity");
    double acc = 0.0;
    for (int k = kappa; k < int(shell_w1.size()); ++k) acc += shell_w1[k];
    return kFourPiSq * acc;
}

double bht_prediction(double kappa, const VelocityParams& params, double grad_tau_power_fourier) {
    const double b = params.beta;
    const double c = 4.0 * kPi * kPi * kPi / (-2.0 * b);
    return std::pow(kappa, 2.0 * b - 2.0 + 2.0) * params.amplitude * params.amplitude *
           grad_tau_power_fourier * c;
}

// ----------------------------------------------------------------------------
// Tables and fits
// ----------------------------------------------------------------------------

std::vector<double> tail_spectrum(const EnsembleStats& stats, FieldTag tag, int w) {
    const ShellStats& s = stats.shell(tag, w);
    const int kmax = int(s.mean.size()) - 1;
    std::vector<double> out(kmax + 1, 0.0);
    double acc = 0.0;
    for (int k = kmax; k >= 1; --k) {
        acc += s.mean[k];
        out[k] = kFourPiSq * acc;
    }
    return out;
}

FitResult fit_exponent(const std::vector<double>& kappas, const std::vector<double>& values,
                       double window_lo, double window_hi) {
    if (kappas.size() != values.size())
        throw std::invalid_argument("fit_exponent: size mismatch");
    std::vector<double> x, y;
    for (size_t i = 0; i < kappas.size(); ++i) {
        if (kappas[i] < window_lo || kappas[i] > window_hi) continue;
        if (!(values[i] > 0.0))
            throw std::invalid_argument("fit_exponent: non-positive value in window");
        x.push_back(std::log(kappas[i]));
        y.push_back(std::log(values[i]));
    }
    const int n = int(x.size());
    if (n < 5) throw std::invalid_argument("fit_exponent: need at least 5 shells in the window");
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = n;
    f.window_lo = window_lo;
    f.window_hi = window_hi;
    double rss = 0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        f.residuals.push_back(r);
        rss += r * r;
    }
    f.stderr_slope = (n > 2) ? std::sqrt(rss / double(n - 2) / sxx) : 0.0;
    return f;
}

RemainderReport remainder_report(const EnsembleStats& stats, double kappa_bar,
                                 const VelocityParams& params, double u_l1_fourier) {
    RemainderReport rep;
    const double lg = std::log(std::max(kappa_bar, 1.0));
    rep.dominance_scale = u_l1_fourier * lg * lg / kappa_bar;
    const int kmax = stats.lat.kappa_max;
    std::vector<double> rem_t = tail_spectrum(stats, FieldTag::vartheta_rem, 1);
    std::vector<double> phi_t = tail_spectrum(stats, FieldTag::phi, 1);
    std::vector<double> lead_t = tail_spectrum(stats, FieldTag::vartheta1, 1);
    for (int k = int(std::ceil(3.0 * kappa_bar)); k <= kmax; ++k) {
        RemainderRow row;
        row.kappa = k;
        const double comp = std::pow(double(k), -params.beta);
        row.rem_vartheta = std::sqrt(rem_t[k]) * comp;
        row.rem_phi = std::sqrt(phi_t[k]) * comp;
        row.leading = std::sqrt(lead_t[k]) * comp;
        row.ratio = row.leading > 0.0 ? (row.rem_vartheta + row.rem_phi) / row.leading : 0.0;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace bhtlab
