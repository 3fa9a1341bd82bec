#include "bhtlab/solver.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace bhtlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::ArrayXXd ksq_grid(const Lattice& lat) {
    const int h = lat.half;
    Eigen::ArrayXXd kk(lat.extent(), lat.extent());
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            kk(k1 + h, k2 + h) = double(k1) * k1 + double(k2) * k2;
    return kk;
}

// The preconditioned system x + (-lap)^{-1} P_band (u . grad x) = (-lap)^{-1} g,
// solved by restarted GMRES in the gradient inner product, where the advection
// term is skew and the identity is the whole Hermitian part.
class BandedTracerSystem {
public:
    BandedTracerSystem(AdvectionOperator& adv, double lo, double hi, const Lattice& lat)
        : adv_(adv), lo_(lo), hi_(hi), lat_(lat), kk_(ksq_grid(lat)), scratch_(lat) {}

    // y = x + poisson(P_band advect(x))
    void apply(const SpectralField& x, SpectralField& y) {
        adv_.apply(x, scratch_);
        project_inplace(scratch_, lo_, hi_);
        y = x;
        const int e = lat_.extent();
        for (int j = 0; j < e; ++j)
            for (int i = 0; i < e; ++i)
                if (kk_(i, j) > 0.0) y.c(i, j) += scratch_.c(i, j) / kk_(i, j);
    }

    // residual of the unpreconditioned equation, field form
    void residual(const SpectralField& x, const SpectralField& g, SpectralField& res) {
        adv_.apply(x, scratch_);
        project_inplace(scratch_, lo_, hi_);
        res = SpectralField(lat_);
        res.c = g.c - scratch_.c - x.c * kk_.cast<Complex>();
    }

    double h1_dot(const SpectralField& a, const SpectralField& b) const {
        return ((a.c * b.c.conjugate()).real() * kk_).sum();
    }
    double h1_norm(const SpectralField& a) const { return std::sqrt(std::max(0.0, h1_dot(a, a))); }

    const Eigen::ArrayXXd& ksq() const { return kk_; }

private:
    AdvectionOperator& adv_;
    double lo_, hi_;
    Lattice lat_;
    Eigen::ArrayXXd kk_;
    SpectralField scratch_;
};

SpectralField poisson_of(const SpectralField& g, const Eigen::ArrayXXd& kk) {
    SpectralField b(g.lat);
    const int e = g.lat.extent();
    for (int j = 0; j < e; ++j)
        for (int i = 0; i < e; ++i)
            if (kk(i, j) > 0.0) b.c(i, j) = g.c(i, j) / kk(i, j);
    return b;
}

// Restarted GMRES on the preconditioned system; converges on the true
// relative L2 residual of the original equation. x0, when given, seeds the
// first restart cycle.
SpectralField gmres_solve(BandedTracerSystem& sys, const SpectralField& g, const SolveConfig& cfg,
                          SolveReport& report, const SpectralField* x0 = nullptr) {
    const Lattice lat = g.lat;
    const double g_norm = norm_l2(g);
    report.method = "krylov";
    SpectralField x = x0 ? *x0 : SpectralField(lat);
    if (g_norm == 0.0) {
        report.converged = true;
        return SpectralField(lat);
    }

    const SpectralField b = poisson_of(g, sys.ksq());
    const int m = std::max(4, cfg.restart);
    std::vector<SpectralField> basis;
    basis.reserve(m + 1);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd gvec(m + 1), cs(m), sn(m);
    SpectralField w(lat), res(lat);
    double inner_target_factor = 0.25;
    int applies = 0;

    while (applies < cfg.max_iter) {
        // restart: true preconditioned residual
        sys.apply(x, w);
        w.c = b.c - w.c;
        double beta = sys.h1_norm(w);
        const double inner_target = std::max(cfg.tol * g_norm * inner_target_factor, 0.0);
        if (beta == 0.0) break;
        basis.clear();
        w.c /= beta;
        basis.push_back(w);
        gvec.setZero();
        gvec(0) = beta;
        int j = 0;
        double est = beta;
        for (; j < m && applies < cfg.max_iter; ++j) {
            sys.apply(basis[j], w);
            ++applies;
            for (int i = 0; i <= j; ++i) {
                const double hij = sys.h1_dot(w, basis[i]);
                hess(i, j) = hij;
                w.c -= hij * basis[i].c;
            }
            const double hnext = sys.h1_norm(w);
            hess(j + 1, j) = hnext;
            // Givens sweep
            for (int i = 0; i < j; ++i) {
                const double t = cs(i) * hess(i, j) + sn(i) * hess(i + 1, j);
                hess(i + 1, j) = -sn(i) * hess(i, j) + cs(i) * hess(i + 1, j);
                hess(i, j) = t;
            }
            const double denom = std::hypot(hess(j, j), hess(j + 1, j));
            cs(j) = hess(j, j) / denom;
            sn(j) = hess(j + 1, j) / denom;
            hess(j, j) = denom;
            hess(j + 1, j) = 0.0;
            gvec(j + 1) = -sn(j) * gvec(j);
            gvec(j) = cs(j) * gvec(j);
            est = std::abs(gvec(j + 1));
            report.residual_history.push_back(est);
            if (hnext == 0.0 || est <= inner_target) {
                ++j;
                break;
            }
            w.c /= hnext;
            basis.push_back(w);
        }
        // assemble the update
        Eigen::VectorXd y = hess.topLeftCorner(j, j)
                                .triangularView<Eigen::Upper>()
                                .solve(gvec.head(j));
        for (int i = 0; i < j; ++i) x.c += y(i) * basis[i].c;
        enforce_hermitian(x);

        sys.residual(x, g, res);
        report.rel_residual = norm_l2(res) / g_norm;
        report.iterations = applies;
        if (report.rel_residual <= cfg.tol) {
            report.converged = true;
            return x;
        }
        inner_target_factor *= 0.25;  // H^-1 control was not tight enough; push harder
    }
    sys.residual(x, g, res);
    report.rel_residual = norm_l2(res) / g_norm;
    report.iterations = applies;
    if (report.rel_residual <= cfg.tol) {
        report.converged = true;
        return x;
    }
    throw SolverError("krylov solve did not reach tolerance " + std::to_string(cfg.tol) +
                          " within " + std::to_string(cfg.max_iter) +
                          " operator applications (residual " +
                          std::to_string(report.rel_residual) + ")",
                      report.rel_residual);
}

SpectralField fixed_point_solve(BandedTracerSystem& sys, const SpectralField& g,
                                const SolveConfig& cfg, SolveReport& report) {
    const Lattice lat = g.lat;
    const double g_norm = norm_l2(g);
    report.method = "fixed-point";
    SpectralField x(lat), res(lat);
    if (g_norm == 0.0) {
        report.converged = true;
        return x;
    }
    int grow = 0;
    double prev = -1.0;
    for (int it = 0; it < cfg.max_iter; ++it) {
        sys.residual(x, g, res);
        const double rel = norm_l2(res) / g_norm;
        report.residual_history.push_back(rel);
        report.rel_residual = rel;
        report.iterations = it;
        if (rel <= cfg.tol) {
            report.converged = true;
            return x;
        }
        if (prev >= 0.0 && rel > prev) {
            if (++grow >= 3)
                throw SolverError(
                    "fixed-point iteration diverges (residual grew three steps in a row); "
                    "use the krylov method",
                    rel);
        } else {
            grow = 0;
        }
        prev = rel;
        // x <- x + (-lap)^{-1} residual
        x.c += poisson_of(res, sys.ksq()).c;
        enforce_hermitian(x);
    }
    throw SolverError("fixed-point iteration did not converge within max_iter",
                      report.rel_residual);
}

SpectralField run_banded(AdvectionOperator& adv, double lo, double hi, const SpectralField& g,
                         const SolveConfig& cfg, SolveReport* report,
                         const SpectralField* x0 = nullptr) {
    BandedTracerSystem sys(adv, lo, hi, g.lat);
    SolveReport local;
    SpectralField x = (cfg.method == SolveMethod::krylov)
                          ? gmres_solve(sys, g, cfg, local, x0)
                          : fixed_point_solve(sys, g, cfg, local);
    if (report) *report = local;
    return x;
}
}  // namespace

SpectralField solve_banded(AdvectionOperator& adv, double band_lo, double band_hi,
                           const SpectralField& g, const SolveConfig& cfg, SolveReport* report) {
    return run_banded(adv, band_lo, band_hi, g, cfg, report);
}

SpectralField solve_direct(const VectorField& u, const SpectralField& g, const SolveConfig& cfg,
                           TransformEngine& engine, SolveReport* report) {
    AdvectionOperator adv(u, engine);
    return run_banded(adv, 1.0, kInf, g, cfg, report);
}

// ----------------------------------------------------------------------------
// Picard, small amplitude
// ----------------------------------------------------------------------------

PicardResult picard_small_u(const VectorField& u, const SpectralField& g, int n_max,
                            TransformEngine& engine, double stop_rel) {
    PicardResult out;
    out.tau0 = poisson_solve(g);
    out.contraction_majorant = norm_l1_fourier(u);
    AdvectionOperator adv(u, engine);

    SpectralField forcing = adv.apply(out.tau0);  // u . grad tau0
    // vartheta^{(1)} = lap^{-1}(u . grad tau0)
    SpectralField vt = poisson_solve(forcing);
    vt.c = -vt.c;
    out.vartheta1 = vt;
    const double first_norm = norm_h1(out.vartheta1);
    out.increment_grad_norms.push_back(first_norm);
    if (first_norm == 0.0) {
        out.vartheta = vt;
        out.converged = true;
        return out;
    }

    SpectralField delta = out.vartheta1;
    int grow = 0;
    for (int n = 1; n < n_max; ++n) {
        // delta^{(n+1)} = lap^{-1}(u . grad delta^{(n)})
        SpectralField next = poisson_solve(adv.apply(delta));
        next.c = -next.c;
        const double dn = norm_h1(next);
        if (dn > out.increment_grad_norms.back()) {
            if (++grow >= 3)
                throw SolverError(
                    "small-amplitude iteration diverges (increments grew three steps in a row); "
                    "use the split-wavenumber decomposition",
                    dn);
        } else {
            grow = 0;
        }
        out.increment_grad_norms.push_back(dn);
        vt.c += next.c;
        delta = std::move(next);
        if (dn <= stop_rel * first_norm) break;
    }
    out.vartheta = vt;
    out.converged = out.increment_grad_norms.back() <= out.increment_grad_norms.front();
    return out;
}

// ----------------------------------------------------------------------------
// Split wavenumber
// ----------------------------------------------------------------------------

KappaBarResult kappa_bar_formula(const VelocityParams& p, const VectorField& u, double kappa_g,
                                 double c_prime) {
    if (c_prime <= 0.0) throw std::invalid_argument("kappa_bar: c_prime must be positive");
    const double u_inf = norm_l1_fourier(u);  // rigorous sup-norm majorant
    const double u_l2 = norm_l2(u);
    const double t0 = kappa_g;
    const double t1 = u_inf * u_inf;
    const double t2 = c_prime * u_inf * u_inf * std::pow(u_l2, 1.0 / p.beta);
    KappaBarResult r;
    r.active_term = (t1 >= t0 && t1 >= t2) ? 1 : (t2 >= t0 && t2 >= t1) ? 2 : 0;
    r.value = std::ldexp(std::max({t0, t1, t2}), p.m_beta());  // 2^{m_beta} * max
    r.feasible = r.value <= double(u.lat().kappa_max) / 3.0;
    return r;
}

double kappa_bar(const VelocityParams& p, const VectorField& u, double kappa_g, double c_prime) {
    KappaBarResult r = kappa_bar_formula(p, u, kappa_g, c_prime);
    if (!r.feasible)
        throw SolverError("split wavenumber " + std::to_string(r.value) +
                          " exceeds kappa_max/3: the BHT window is empty at this resolution");
    return r.value;
}

// ----------------------------------------------------------------------------
// Low-mode dense solve
// ----------------------------------------------------------------------------

SpectralField solve_low_mode(const VectorField& u, const SpectralField& g, double kb,
                             const SolveConfig& cfg, SolveReport* report) {
    const Lattice lat = g.lat;
    if (kb < 1.0 || kb > lat.half + 1) throw std::invalid_argument("solve_low_mode: bad kappa_bar");
    const double kb2 = kb * kb;
    const int span = std::min(lat.half, int(std::ceil(kb)));

    // index the low modes
    std::vector<std::pair<int, int>> modes;
    Eigen::ArrayXXi index = Eigen::ArrayXXi::Constant(2 * span + 1, 2 * span + 1, -1);
    for (int k2 = -span; k2 <= span; ++k2)
        for (int k1 = -span; k1 <= span; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            if (double(k1) * k1 + double(k2) * k2 >= kb2) continue;
            index(k1 + span, k2 + span) = int(modes.size());
            modes.emplace_back(k1, k2);
        }
    const int nm = int(modes.size());
    if (nm == 0) throw std::invalid_argument("solve_low_mode: no modes below kappa_bar");

    // A = |k|^2 I + projected advection; only velocity modes with |m| < 2 kb
    // can map a low j to a low k = m + j.
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nm, nm);
    for (int col = 0; col < nm; ++col) {
        auto [j1, j2] = modes[col];
        A(col, col) = double(j1) * j1 + double(j2) * j2;
    }
    const int uspan = std::min(lat.half, int(std::ceil(2.0 * kb)));
    for (int m2 = -uspan; m2 <= uspan; ++m2)
        for (int m1 = -uspan; m1 <= uspan; ++m1) {
            if (m1 == 0 && m2 == 0) continue;
            const Complex ux = u.x.at(m1, m2), uy = u.y.at(m1, m2);
            if (ux == Complex(0, 0) && uy == Complex(0, 0)) continue;
            for (int col = 0; col < nm; ++col) {
                auto [j1, j2] = modes[col];
                const int k1 = m1 + j1, k2 = m2 + j2;
                if (std::abs(k1) > span || std::abs(k2) > span) continue;
                const int row = index(k1 + span, k2 + span);
                if (row < 0) continue;
                // (u . grad e_j) coefficient: i (u_m . j)
                A(row, col) += Complex(0, 1) * (ux * double(j1) + uy * double(j2));
            }
        }

    Eigen::VectorXcd rhs(nm);
    for (int i = 0; i < nm; ++i) rhs(i) = g.at(modes[i].first, modes[i].second);
    Eigen::VectorXcd sol = Eigen::PartialPivLU<Eigen::MatrixXcd>(A).solve(rhs);

    SpectralField tau(lat);
    for (int i = 0; i < nm; ++i) tau.at(modes[i].first, modes[i].second) = sol(i);
    enforce_hermitian(tau);

    if (report) {
        report->method = "dense-lu";
        report->iterations = 1;
        report->converged = true;
        Eigen::VectorXcd res = rhs - A * sol;
        const double gn = rhs.norm();
        report->rel_residual = gn > 0 ? res.norm() / gn : 0.0;
        if (report->rel_residual > cfg.tol)
            throw SolverError("low-mode dense solve residual above tolerance",
                              report->rel_residual);
    }
    return tau;
}

// ----------------------------------------------------------------------------
// High-mode iteration
// ----------------------------------------------------------------------------

VarthetaResult iterate_vartheta(const VectorField& u, const SpectralField& tau, double kb,
                                const SolveConfig& cfg, TransformEngine& engine, bool strict) {
    VarthetaResult out;
    const Lattice lat = tau.lat;
    AdvectionOperator adv(u, engine);

    // products of band-limited fields are band-limited by the sum of the
    // radii; projecting to that support removes transform dust from shells
    // that are exactly zero (a no-op for full-lattice velocities)
    const double tau_radius = support_radius(tau);
    auto band_cap = [&](const VectorField& vel) {
        const double r = support_radius(vel) + tau_radius;
        return r >= double(lat.half) ? kInf : r + 1e-9;
    };

    SpectralField s1 = adv.apply(tau);
    project_inplace(s1, kb, band_cap(u));

    auto invert = [&](const SpectralField& src) {
        SpectralField v = poisson_solve(src);
        v.c = -v.c;
        return v;
    };
    out.vartheta1 = invert(s1);

    {
        VectorField u_lo = project(u, 1.0, 2.0 * kb);
        AdvectionOperator adv_lo(u_lo, engine);
        SpectralField s_lo = adv_lo.apply(tau);
        project_inplace(s_lo, kb, std::min(3.0 * kb, band_cap(u_lo)));
        out.vartheta1_lo = invert(s_lo);

        VectorField u_hi = project(u, 2.0 * kb, kInf);
        AdvectionOperator adv_hi(u_hi, engine);
        SpectralField s_hi = adv_hi.apply(tau);
        project_inplace(s_hi, kb, band_cap(u_hi));
        out.vartheta1_hi = invert(s_hi);
    }

    // Picard sweep with increment bookkeeping
    const double first_norm = norm_h1(out.vartheta1);
    out.increment_grad_norms.push_back(first_norm);
    SpectralField vt = out.vartheta1;
    if (first_norm == 0.0) {
        out.vartheta = vt;
        out.method = "picard";
        out.report.converged = true;
        return out;
    }
    SpectralField delta = out.vartheta1;
    bool diverged = false;
    int grow = 0;
    for (int n = 1; n < cfg.n_max; ++n) {
        SpectralField dnext = adv.apply(delta);
        project_inplace(dnext, kb, kInf);
        dnext = invert(dnext);
        const double dn = norm_h1(dnext);
        if (dn > out.increment_grad_norms.back()) {
            if (++grow >= 3) {
                diverged = true;
                out.increment_grad_norms.push_back(dn);
                break;
            }
        } else {
            grow = 0;
        }
        out.increment_grad_norms.push_back(dn);
        vt.c += dnext.c;
        delta = std::move(dnext);
        if (dn <= cfg.picard_stop_rel * first_norm) break;
    }

    if (diverged && strict)
        throw SolverError(
            "high-mode iteration increments grew three steps in a row: the split wavenumber "
            "is too small for the Picard sweep",
            out.increment_grad_norms.back());

    // The sweep stops at its own increment tolerance; the decomposition must
    // telescope to cfg.tol, so finish with the Krylov solve of the same
    // system, warm-started from the sweep when it contracted.
    SpectralField rhs(lat);
    rhs.c = -s1.c;
    {
        BandedTracerSystem sys(adv, kb, kInf, lat);
        SpectralField res(lat);
        const SpectralField& candidate = diverged ? out.vartheta1 : vt;
        sys.residual(candidate, rhs, res);
        const double rn = norm_l2(rhs);
        const double rel = rn > 0.0 ? norm_l2(res) / rn : 0.0;
        if (rel <= cfg.tol) {
            out.vartheta = candidate;
            out.method = "picard";
            out.report.method = "picard";
            out.report.converged = true;
            out.report.iterations = int(out.increment_grad_norms.size());
            out.report.rel_residual = rel;
            return out;
        }
        out.vartheta = run_banded(adv, kb, kInf, rhs, cfg, &out.report, &candidate);
    }
    out.method = diverged ? "krylov" : "picard+krylov";
    return out;
}

SpectralField solve_phi(const VectorField& u, const SpectralField& vartheta, double kb,
                        const SolveConfig& cfg, TransformEngine& engine, SolveReport* report) {
    AdvectionOperator adv(u, engine);
    SpectralField gamma = adv.apply(vartheta);
    project_inplace(gamma, 1.0, kb);
    gamma.c = -gamma.c;
    if (norm_l2(gamma) == 0.0) {
        if (report) {
            report->converged = true;
            report->method = "trivial";
        }
        return SpectralField(vartheta.lat);
    }
    return run_banded(adv, 1.0, kInf, gamma, cfg, report);
}

Decomposition decompose(const VectorField& u, const SpectralField& g, const SolveConfig& cfg,
                        TransformEngine& engine) {
    if (cfg.kappa_bar < 1.0)
        throw std::invalid_argument("decompose: cfg.kappa_bar must be set (>= kappa_g)");
    Decomposition d;
    d.kappa_bar = cfg.kappa_bar;
    d.tau = solve_low_mode(u, g, cfg.kappa_bar, cfg, &d.tau_report);
    VarthetaResult vr = iterate_vartheta(u, d.tau, cfg.kappa_bar, cfg, engine);
    d.vartheta1 = std::move(vr.vartheta1);
    d.vartheta1_lo = std::move(vr.vartheta1_lo);
    d.vartheta1_hi = std::move(vr.vartheta1_hi);
    d.vartheta = std::move(vr.vartheta);
    d.increment_grad_norms = std::move(vr.increment_grad_norms);
    d.vartheta_method = vr.method;
    d.vartheta_report = vr.report;
    d.phi = solve_phi(u, d.vartheta, cfg.kappa_bar, cfg, engine, &d.phi_report);
    d.theta = add(add(d.tau, d.vartheta), d.phi);
    d.residual_rel = equation_residual(u, d.theta, g, engine);
    return d;
}

// ----------------------------------------------------------------------------
// Diagnostics
// ----------------------------------------------------------------------------

double grad_tail_norm(const SpectralField& f, double kappa) {
    const int h = f.lat.half;
    const double lo2 = kappa * kappa;
    double acc = 0.0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const double kk = double(k1) * k1 + double(k2) * k2;
            if (kk >= lo2) acc += kk * std::norm(f.at(k1, k2));
        }
    return kTwoPi * std::sqrt(acc);
}

HighmodeBoundReport highmode_bound_report(const SpectralField& f, const VectorField& u,
                                          const VelocityParams& params,
                                          const std::vector<double>& kappas) {
    HighmodeBoundReport rep;
    const double u2 = norm_l2(u);
    const double gmaj = grad_l1_fourier(f);
    for (double kap : kappas) {
        HighmodeBoundRow row;
        row.kappa = kap;
        row.tail_grad = grad_tail_norm(f, kap);
        row.scale = std::pow(kap, params.beta) * u2 * gmaj;
        row.ratio = row.scale > 0.0 ? row.tail_grad / row.scale : 0.0;
        rep.max_ratio = std::max(rep.max_ratio, row.ratio);
        rep.rows.push_back(row);
    }
    return rep;
}

double equation_residual(const VectorField& u, const SpectralField& f, const SpectralField& g,
                         TransformEngine& engine) {
    SpectralField res = engine.advect(u, f);
    const int h = f.lat.half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const double kk = double(k1) * k1 + double(k2) * k2;
            res.at(k1, k2) += kk * f.at(k1, k2) - g.at(k1, k2);
        }
    const double gn = norm_l2(g);
    return gn > 0.0 ? norm_l2(res) / gn : norm_l2(res);
}

}  // namespace bhtlab
