#include <doctest.h>

#include <cmath>

#include "bhtlab/ensemble.hpp"

using namespace bhtlab;

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

EnsembleConfig small_config() {
    EnsembleConfig cfg;
    cfg.n_grid = 64;
    cfg.realizations = 8;
    cfg.base_seed = 11;
    cfg.velocity = VelocityParams::kraichnan(1.0, 16);
    cfg.source = SourceSpec::unit_shells(2);
    cfg.solve.kappa_bar = 3.0;
    cfg.solve.tol = 1e-9;
    cfg.fit_lo = 9.0;
    cfg.fit_hi = 21.0;
    cfg.full_decomposition = false;  // first-iterate pipeline
    cfg.threads = 2;
    return cfg;
}
}  // namespace

TEST_CASE("single member: mean is the realization, variance zero") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 1;
    EnsembleResult r = run_ensemble(cfg);
    CHECK(r.stats.completed == 1);
    const ShellStats& s = r.stats.shell(FieldTag::vartheta1, 1);
    for (int k = 1; k < int(s.mean.size()); ++k) CHECK(s.variance(k) == 0.0);
    CHECK(r.stats.grad_tau_sq.variance() == 0.0);
}

TEST_CASE("deterministic velocity shells have zero variance across members") {
    EnsembleConfig cfg = small_config();
    EnsembleResult r = run_ensemble(cfg);
    const ShellStats& su = r.stats.shell(FieldTag::velocity, 0);
    for (int k = 1; k < int(su.mean.size()); ++k)
        CHECK(su.variance(k) <= 1e-24 * su.mean[k] * su.mean[k]);
    // tracer shells do vary
    const ShellStats& st = r.stats.shell(FieldTag::vartheta1_hi, 1);
    bool any = false;
    for (int k = 1; k < int(st.mean.size()); ++k) any = any || st.variance(k) > 0.0;
    CHECK(any);
    // frozen low modes make tau deterministic
    CHECK(r.stats.grad_tau_sq.variance() <=
          1e-20 * r.stats.grad_tau_sq.mean * r.stats.grad_tau_sq.mean);
}

TEST_CASE("checkpoints reproduce shorter runs exactly") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 8;
    cfg.checkpoints = {4};
    EnsembleResult full = run_ensemble(cfg);
    REQUIRE(full.checkpoints.size() == 1);

    EnsembleConfig half = cfg;
    half.realizations = 4;
    half.checkpoints.clear();
    EnsembleResult part = run_ensemble(half);

    const ShellStats& a = full.checkpoints[0].shell(FieldTag::vartheta1_hi, 1);
    const ShellStats& b = part.stats.shell(FieldTag::vartheta1_hi, 1);
    for (int k = 1; k < int(a.mean.size()); ++k) {
        CHECK(a.mean[k] == b.mean[k]);
        CHECK(a.m2[k] == b.m2[k]);
    }
}

TEST_CASE("thread count does not change the statistics") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 4;
    cfg.threads = 1;
    EnsembleResult serial = run_ensemble(cfg);
    cfg.threads = 2;
    EnsembleResult parallel = run_ensemble(cfg);
    const ShellStats& a = serial.stats.shell(FieldTag::vartheta1, 1);
    const ShellStats& b = parallel.stats.shell(FieldTag::vartheta1, 1);
    for (int k = 1; k < int(a.mean.size()); ++k) CHECK(a.mean[k] == b.mean[k]);
}

TEST_CASE("monte carlo matches the closed-form expected spectrum") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 64;
    EnsembleResult r = run_ensemble(cfg);
    const Lattice lat(cfg.n_grid);
    OracleSpectrum oracle =
        bht_oracle(r.stats.tau_mode_power_mean, cfg.velocity, cfg.solve.kappa_bar, lat);

    const ShellStats& s = r.stats.shell(FieldTag::vartheta1_hi, 1);
    int checked = 0, within = 0;
    for (int k = 9; k < int(s.mean.size()); ++k) {  // 3 kappa_bar = 9
        const double se = std::sqrt(s.variance(k) / double(cfg.realizations));
        const double dev = std::abs(s.mean[k] - oracle.shell_w1[k]);
        ++checked;
        if (se == 0.0)
            within += (dev == 0.0) ? 1 : 0;
        else
            within += (dev <= 5.0 * se) ? 1 : 0;
    }
    CHECK(checked >= 10);
    CHECK(double(within) >= 0.95 * double(checked));
}

TEST_CASE("steep family: monte carlo matches the oracle too") {
    // the steep velocity occupies the whole lattice, so this exercises the
    // unbounded-support branch of the first-iterate band cap
    EnsembleConfig cfg = small_config();
    cfg.velocity = VelocityParams::steep(1.0, -2.5);
    cfg.realizations = 32;
    EnsembleResult r = run_ensemble(cfg);
    const Lattice lat(cfg.n_grid);
    OracleSpectrum oracle =
        bht_oracle(r.stats.tau_mode_power_mean, cfg.velocity, cfg.solve.kappa_bar, lat);
    const ShellStats& s = r.stats.shell(FieldTag::vartheta1_hi, 1);
    int checked = 0, within = 0;
    for (int k = 9; k < int(s.mean.size()); ++k) {
        const double se = std::sqrt(s.variance(k) / double(cfg.realizations));
        const double dev = std::abs(s.mean[k] - oracle.shell_w1[k]);
        ++checked;
        within += (se == 0.0) ? (dev == 0.0 ? 1 : 0) : (dev <= 5.0 * se ? 1 : 0);
    }
    CHECK(checked >= 10);
    CHECK(within == checked);
}

TEST_CASE("wedge kills aligned contributions in the oracle") {
    Lattice lat(64);
    Eigen::ArrayXXd tau_power = Eigen::ArrayXXd::Zero(lat.extent(), lat.extent());
    tau_power(0 + lat.half, 1 + lat.half) = 1.0;  // single mode pair (0, +-1)
    tau_power(0 + lat.half, -1 + lat.half) = 1.0;
    OracleSpectrum o = bht_oracle(tau_power, VelocityParams::kraichnan(1.0, 16), 2.0, lat);
    // along the tau direction the wedge vanishes: modes (0, k2) carry nothing
    for (int k2 = 6; k2 <= lat.half; ++k2)
        CHECK(o.mode_power(0 + lat.half, k2 + lat.half) == 0.0);
    // off-axis modes do carry power
    CHECK(o.mode_power(7 + lat.half, 0 + lat.half) > 0.0);
}

TEST_CASE("oracle tail approaches the closed-form prediction") {
    Lattice lat(128);
    // band-limited stand-in for the low-mode solution
    SpectralField tau(lat);
    tau.set_pair(1, 0, Complex(0.35, 0.0));
    tau.set_pair(0, 1, Complex(0.0, 0.35));
    tau.set_pair(1, 1, Complex(0.18, 0.09));
    VelocityParams p = VelocityParams::kraichnan(1.0, 32);
    const double kb = 3.0;
    OracleSpectrum o = bht_oracle(tau.c.abs2(), p, kb, lat);

    double grad_tau_fourier = 0.0;
    const int h = lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            grad_tau_fourier +=
                (double(k1) * k1 + double(k2) * k2) * std::norm(tau.at(k1, k2));

    for (int kap : {9, 12, 16}) {
        const double ratio = o.tail_w1(kap) / bht_prediction(kap, p, grad_tau_fourier);
        CHECK(ratio > 0.85);
        CHECK(ratio < 1.25);
    }
    CHECK_THROWS(o.tail_w1(4));  // below 3 kappa_bar
}

TEST_CASE("steep-family oracle tail also approaches the prediction") {
    Lattice lat(128);
    SpectralField tau(lat);
    tau.set_pair(1, 0, Complex(0.4, 0.0));
    tau.set_pair(1, 1, Complex(0.1, -0.2));
    tau.set_pair(0, 2, Complex(0.05, 0.1));
    VelocityParams p = VelocityParams::steep(1.0, -2.5);
    const double kb = 3.0;
    OracleSpectrum o = bht_oracle(tau.c.abs2(), p, kb, lat);
    double gtf = 0.0;
    const int h = lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            gtf += (double(k1) * k1 + double(k2) * k2) * std::norm(tau.at(k1, k2));
    for (int kap : {9, 12, 16, 20}) {
        const double ratio = o.tail_w1(kap) / bht_prediction(kap, p, gtf);
        CHECK(ratio > 0.8);
        CHECK(ratio < 1.25);
    }
}

TEST_CASE("prediction formula constants") {
    // constant 4 pi^3 / (-2 beta): evaluates to 4 pi^3 / 5 at beta = -2.5
    VelocityParams steep = VelocityParams::steep(1.0, -2.5);
    CHECK(bht_prediction(1.0, steep, 1.0) == doctest::Approx(4.0 * kPi * kPi * kPi / 5.0));
    // and to pi^3 at beta = -2 (the marginal family)
    VelocityParams kr = VelocityParams::kraichnan(1.0, 32);
    CHECK(bht_prediction(1.0, kr, 1.0) == doctest::Approx(kPi * kPi * kPi));
    // amplitude scaling and the tail exponent 2 beta - 2 + d
    CHECK(bht_prediction(2.0, kr, 1.0) ==
          doctest::Approx(std::pow(2.0, -4.0) * kPi * kPi * kPi));
    VelocityParams off = VelocityParams::kraichnan(0.0 + 1e-30, 32);
    CHECK(bht_prediction(4.0, off, 1.0) < 1e-50);  // amplitude to zero kills it
}

TEST_CASE("tail tables are monotone and anchored at the full norm") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 2;
    EnsembleResult r = run_ensemble(cfg);
    std::vector<double> t = tail_spectrum(r.stats, FieldTag::vartheta1, 1);
    for (size_t k = 2; k < t.size(); ++k) CHECK(t[k] <= t[k - 1] * (1.0 + 1e-15));
    // kappa = 1 tail reproduces the mean squared gradient norm up to the
    // trusted-shell truncation (no corner modes for the first iterate here:
    // velocity cutoff keeps its support inside the shell table)
    CHECK(t[1] > 0.0);
}

TEST_CASE("exponent fit recovers an exact power law") {
    std::vector<double> ks, vs;
    for (int k = 4; k <= 40; ++k) {
        ks.push_back(double(k));
        vs.push_back(7.5 * std::pow(double(k), -4.0));
    }
    FitResult f = fit_exponent(ks, vs, 5.0, 35.0);
    CHECK(f.slope == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(f.stderr_slope < 1e-12);
    CHECK_THROWS(fit_exponent(ks, vs, 5.0, 7.0));  // fewer than 5 shells
    vs[10] = 0.0;
    CHECK_THROWS(fit_exponent(ks, vs, 5.0, 35.0));  // non-positive value
}

TEST_CASE("oracle deviation decays at the square-root monte carlo rate") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 1024;
    cfg.checkpoints = {64, 256};
    EnsembleResult r = run_ensemble(cfg);
    const Lattice lat(cfg.n_grid);
    OracleSpectrum oracle =
        bht_oracle(r.stats.tau_mode_power_mean, cfg.velocity, cfg.solve.kappa_bar, lat);
    auto rms = [&](const EnsembleStats& st) {
        const ShellStats& s = st.shell(FieldTag::vartheta1_hi, 1);
        double acc = 0.0;
        int n = 0;
        for (int k = 9; k < int(s.mean.size()); ++k) {
            if (oracle.shell_w1[k] <= 0.0) continue;
            const double d = (s.mean[k] - oracle.shell_w1[k]) / oracle.shell_w1[k];
            acc += d * d;
            ++n;
        }
        return std::sqrt(acc / n);
    };
    const double r64 = rms(r.checkpoints[0]);
    const double r256 = rms(r.checkpoints[1]);
    const double r1024 = rms(r.stats);
    CHECK(r64 / r256 > 1.3);
    CHECK(r64 / r256 < 3.0);
    CHECK(r256 / r1024 > 1.3);
    CHECK(r256 / r1024 < 3.0);
}

TEST_CASE("near/far band pieces are orthogonal in expectation") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 64;
    EnsembleResult r = run_ensemble(cfg);
    const ScalarStats& s = r.stats.lo_hi_inner;
    const double se = std::sqrt(s.variance() / double(s.n));
    CHECK(std::abs(s.mean) <= 5.0 * se);
}

TEST_CASE("remainder report vanishes without velocity") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 1;
    cfg.full_decomposition = true;
    cfg.velocity = VelocityParams::kraichnan(1e-14, 16);  // effectively zero flow
    EnsembleResult r = run_ensemble(cfg);
    RemainderReport rep = remainder_report(r.stats, cfg.solve.kappa_bar, cfg.velocity, 0.0);
    for (const RemainderRow& row : rep.rows) {
        CHECK(row.rem_vartheta <= 1e-12);
        CHECK(row.rem_phi <= 1e-12);
    }
}

TEST_CASE("member failures carry the seed for replay") {
    EnsembleConfig cfg = small_config();
    cfg.realizations = 2;
    cfg.full_decomposition = true;
    cfg.solve.method = SolveMethod::fixed_point;  // diverges at this amplitude
    cfg.solve.max_iter = 50;
    try {
        run_ensemble(cfg);
        FAIL("expected a solver failure");
    } catch (const SolverError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("seed") != std::string::npos);
        CHECK(msg.find("member") != std::string::npos);
    }
}
