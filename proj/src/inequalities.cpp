#include "bhtlab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "bhtlab/solver.hpp"
#include "bhtlab/source.hpp"

namespace bhtlab {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;

double factorial_ratio(int m, int i) {  // m! / (m-i)!
    double v = 1.0;
    for (int t = 0; t < i; ++t) v *= double(m - t);
    return v;
}
}  // namespace

double log_ladder(double kappa, double r, int m) {
    if (kappa < 1.0 || r <= 0.0 || m < 0) throw std::invalid_argument("log_ladder: bad arguments");
    const double lk = std::log(kappa);
    double acc = 0.0;
    for (int i = 0; i <= m; ++i)
        acc += factorial_ratio(m, i) * std::pow(r, -double(i)) * std::pow(lk, double(m - i));
    return acc;
}

// ----------------------------------------------------------------------------
// Quadrature
// ----------------------------------------------------------------------------

namespace {
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}
}  // namespace

double tail_log_integral(double kappa, double r, int m, double rel_tol) {
    if (kappa < 1.0 || r <= 0.0 || m < 0)
        throw std::invalid_argument("tail_log_integral: bad arguments");
    // substitute k = kappa e^t: integral = kappa^{-r} int_0^inf e^{-rt} (log kappa + t)^m dt
    const double lk = std::log(kappa);
    auto integrand = [&](double t) { return std::exp(-r * t) * std::pow(lk + t, double(m)); };
    // split [0, T] in unit-ish panels of width 4/r until the tail is negligible
    const double width = 4.0 / r;
    double acc = 0.0, t0 = 0.0;
    const double scale_tol = rel_tol * std::max(1.0, std::pow(lk + 1.0, double(m)) / r);
    for (int panel = 0; panel < 64; ++panel) {
        const double t1 = t0 + width;
        acc += adaptive_simpson(integrand, t0, t1, 0.05 * scale_tol);
        t0 = t1;
        if (integrand(t0) * (double(m) + 1.0) / r < rel_tol * acc) break;
    }
    return std::pow(kappa, -r) * acc;
}

// ----------------------------------------------------------------------------
// Dirichlet kernels
// ----------------------------------------------------------------------------

double dirichlet_l1(int n, DirichletVariant variant) {
    if (n < 1) throw std::invalid_argument("dirichlet_l1: n must be >= 1");
    // |kernel(x)| = |sin(a x)| / |sin(x/2)| with a = N + 1/2 (symmetric, 2N+1
    // terms) or a = N/2 (one-sided, N terms).
    const double a = (variant == DirichletVariant::symmetric) ? double(n) + 0.5 : 0.5 * double(n);
    auto f = [&](double x) {
        const double s = std::sin(0.5 * x);
        if (std::abs(s) < 1e-12) return 2.0 * a;
        return std::abs(std::sin(a * x)) / std::abs(s);
    };
    const long panels = std::max(1L << 14, 64L * n);  // resolution scaled with n
    const double h = kTwoPi / double(panels);
    // composite Simpson
    double acc = f(0.0) + f(kTwoPi);
    for (long i = 1; i < panels; ++i) acc += f(double(i) * h) * ((i % 2) ? 4.0 : 2.0);
    return acc * h / 3.0 / kTwoPi;
}

// ----------------------------------------------------------------------------
// 2D multiplier kernels
// ----------------------------------------------------------------------------

namespace {
double kernel_symbol(const KernelSpec& spec, int k1, int k2) {
    const double kk = double(k1) * k1 + double(k2) * k2;
    if (kk < double(spec.kappa) * spec.kappa) return 0.0;
    if (spec.kind == KernelSpec::Kind::smoothing) return std::pow(kk, -0.5 * spec.s);
    return double(k1) * std::pow(kk, -0.5 * (spec.s + 1.0));
}
}  // namespace

Eigen::MatrixXcd kernel_grid(const KernelSpec& spec) {
    if (spec.kappa < 5) throw std::invalid_argument("kernel_l1: kappa must be >= 5");
    // documented heuristic: synthesis band at least twice the cutoff and a
    // quadrature grid at least eight points per cutoff wavelength
    if (spec.band_factor < 2 || spec.grid_factor < 2)
        throw std::invalid_argument(
            "kernel_l1: resolution below the documented heuristic (band_factor and "
            "grid_factor must be >= 2)");
    const int band = spec.band_factor * spec.kappa;
    const int grid = fft_friendly_size(spec.grid_factor * (2 * band + 1));
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(grid, grid);
    for (int k2 = -band; k2 <= band; ++k2) {
        const int j = (k2 + grid) % grid;
        for (int k1 = -band; k1 <= band; ++k1) {
            const double v = kernel_symbol(spec, k1, k2);
            if (v != 0.0) a((k1 + grid) % grid, j) = v;
        }
    }
    Fft2D fft(grid);
    fft.inv(a);
    return a;
}

KernelResult kernel_l1(const KernelSpec& spec) {
    Eigen::MatrixXcd g = kernel_grid(spec);
    KernelResult r;
    r.grid = int(g.rows());
    r.band = spec.band_factor * spec.kappa;
    r.l1 = g.array().abs().sum() / (double(r.grid) * r.grid);  // integral/(2pi)^2
    const double ladder = log_ladder(2.0 * spec.kappa, spec.s, 2);
    const double scale = (spec.kind == KernelSpec::Kind::smoothing)
                             ? ladder
                             : ladder / spec.s;
    r.bound_ratio = r.l1 * std::pow(double(spec.kappa), spec.s) / scale;
    return r;
}

// ----------------------------------------------------------------------------
// Field inequality witnesses
// ----------------------------------------------------------------------------

namespace {
BoundReport make_report(std::string id, double left, double right, double slack,
                        std::string note = "") {
    BoundReport r;
    r.id = std::move(id);
    r.left = left;
    r.right = right;
    r.slack = slack;
    r.measured_constant = right > 0.0 ? left / right : 0.0;
    r.pass = left <= right * (1.0 + slack) + 1e-300;
    r.note = std::move(note);
    return r;
}

BoundReport measured_report(std::string id, double constant, std::string note = "") {
    BoundReport r;
    r.id = std::move(id);
    r.measured_constant = constant;
    r.pass = std::isfinite(constant);
    r.note = std::move(note);
    return r;
}

SpectralField normalized_divergence(const VectorField& u) {
    // |grad|^{-1} div u: coefficient i (k . u_k) / |k|
    SpectralField v(u.lat());
    const int h = u.lat().half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const double kn = std::sqrt(double(k1) * k1 + double(k2) * k2);
            v.at(k1, k2) = Complex(0, 1) *
                           (double(k1) * u.x.at(k1, k2) + double(k2) * u.y.at(k1, k2)) / kn;
        }
    return v;
}
}  // namespace

std::vector<BoundReport> verify_field_inequalities(const VectorField& u,
                                                   const SpectralField& theta,
                                                   const SpectralField& g,
                                                   const std::vector<double>& kappas) {
    std::vector<BoundReport> out;

    // |grad|^{-1} div bounded in L2 with constant exactly 1 on the lattice,
    // and the coefficient-sum form feeding the sup-norm chain
    {
        SpectralField v = normalized_divergence(u);
        out.push_back(make_report("div_l2", norm_l2(v), norm_l2(u), 1e-12,
                                  "||grad^-1 div u||_2 <= ||u||_2, exact"));
        out.push_back(make_report("div_l1", norm_l1_fourier(v), norm_l1_fourier(u), 1e-12,
                                  "||(grad^-1 div u)_hat||_1 <= ||u_hat||_1, exact"));
    }

    // projection algebra: pairing against a tail equals pairing of tails
    {
        const double kap = 5.0;
        SpectralField w_hi = project(theta, kap, kInf);
        SpectralField u_hi = project(u.x, kap, kInf);
        const double a = inner_l2(u.x, w_hi);
        const double b = inner_l2(u_hi, w_hi);
        const double scale = norm_l2(u.x) * norm_l2(theta) + 1e-300;
        out.push_back(make_report("projection_identity", std::abs(a - b), 1e-12 * scale, 0.0,
                                  "(v, w>k) = (v>k, w>k), exact"));
    }

    // Agmon and Brezis-Gallouet sup bounds via the coefficient-sum majorant
    {
        const double l1u = norm_l1_fourier(u);
        const double l2u = norm_l2(u) / kTwoPi;  // coefficient units throughout
        const double lap_u = std::sqrt(std::pow(norm_h2(u.x), 2) + std::pow(norm_h2(u.y), 2)) / kTwoPi;
        out.push_back(measured_report(
            "agmon.u", l1u / std::sqrt(l2u * lap_u),
            "c in ||u_hat||_1 <= c ||u||_2^1/2 ||lap u||_2^1/2 (coefficient units)"));
        const double gu = norm_h1(u) / kTwoPi;
        const double quotient_log = std::sqrt(std::max(0.0, std::log(lap_u / gu)));
        out.push_back(measured_report("brezis_gallouet.u", l1u / (gu * (1.0 + quotient_log)),
                                      "c in ||u_hat||_1 <= c ||grad u||_2 (1 + log^1/2 ...)"));

        const double l1t = norm_l1_fourier(theta);
        const double l2t = norm_l2(theta) / kTwoPi;
        const double lapt = norm_h2(theta) / kTwoPi;
        if (l2t > 0.0 && lapt > 0.0) {
            out.push_back(measured_report("agmon.theta", l1t / std::sqrt(l2t * lapt)));
            const double gt = norm_h1(theta) / kTwoPi;
            const double dl = std::sqrt(std::max(0.0, std::log(lapt / gt)));
            out.push_back(measured_report("brezis_gallouet.theta", l1t / (gt * (1.0 + dl))));
        }
    }

    for (double kap : kappas) {
        // tail Poincare, exact on the lattice
        SpectralField hi = project(theta, kap, kInf);
        out.push_back(make_report("poincare.k" + std::to_string(int(kap)), norm_l2(hi),
                                  norm_h1(hi) / kap, 1e-12, "||v>k||_2 <= ||grad v>k||_2 / k"));
        // low-mode sup bound: majorant^2 <= c log(kappa) ||grad v<k||_2^2
        if (kap >= 2.0) {
            SpectralField lo = project(theta, 1.0, kap);
            const double maj = norm_l1_fourier(lo);
            const double rhs = std::log(kap) * std::pow(norm_h1(lo) / kTwoPi, 2);
            if (rhs > 0.0)
                out.push_back(measured_report("lowmode_sup.k" + std::to_string(int(kap)),
                                              maj * maj / rhs,
                                              "c in ||v<k||_inf^2 <= c log k ||grad v<k||_2^2"));
        }
    }

    // theta gradient bound from the source (holds for any converged solve)
    {
        const double rhs = norm_l2(fractional_laplacian(g, -1.0));
        if (rhs > 0.0)
            out.push_back(make_report("tracer_h1", norm_h1(theta), rhs, 1e-9,
                                      "||grad theta||_2 <= ||grad^-1 g||_2"));
    }

    // curvature bound: ||lap theta||_2 <= c ||grad u||_2 ||grad^-1 g||_2 + ||g||_2.
    // The smallest admissible c is zero whenever diffusion dominates, so the
    // drift-sensitive quantity pinned for regressions is the full ratio.
    {
        const double gu = norm_h1(u);
        const double rhs = norm_l2(fractional_laplacian(g, -1.0));
        if (gu > 0.0 && rhs > 0.0) {
            const double c = std::max(0.0, norm_h2(theta) - norm_l2(g)) / (gu * rhs);
            out.push_back(measured_report("tracer_h2", c,
                                          "smallest admissible c in ||lap th||_2 <= "
                                          "c ||grad u||_2 ||grad^-1 g||_2 + ||g||_2"));
            out.push_back(measured_report("tracer_h2_ratio",
                                          norm_h2(theta) / (gu * rhs + norm_l2(g)),
                                          "||lap th||_2 over the full right side"));
        }
    }

    // gradient sup bound: majorant(grad theta) <= c ||u_hat||_1 ||theta_hat||_1
    // + majorant(grad^-1 g)
    {
        const double ul1 = norm_l1_fourier(u);
        const double tl1 = norm_l1_fourier(theta);
        if (ul1 > 0.0 && tl1 > 0.0) {
            const double base = norm_l1_fourier(fractional_laplacian(g, -1.0));
            const double c =
                std::max(0.0, grad_l1_fourier(theta) - base) / (ul1 * tl1);
            out.push_back(measured_report(
                "tracer_w1inf", c,
                "c in maj(grad th) <= c ||u_hat||_1 ||th_hat||_1 + maj(grad^-1 g)"));
        }
    }

    return out;
}

// ----------------------------------------------------------------------------
// Young checks
// ----------------------------------------------------------------------------

namespace {
bool valid_young_triple(double p, double q, double r) {
    auto recip = [](double e) {
        if (e == 1.0) return 1.0;
        if (e == 2.0) return 0.5;
        if (e == kInf) return 0.0;
        return -1.0;
    };
    const double rp = recip(p), rq = recip(q), rr = recip(r);
    if (rp < 0.0 || rq < 0.0 || rr < 0.0) return false;
    return std::abs(1.0 + rr - rp - rq) < 1e-14;
}

double grid_lp_norm(const Eigen::MatrixXcd& grid, double p) {
    const long n = grid.rows();
    const double cell = std::pow(kTwoPi / double(n), 2);
    if (p == 1.0) return grid.array().abs().sum() * cell;
    if (p == 2.0) return std::sqrt(grid.array().abs2().sum() * cell);
    return grid.array().abs().maxCoeff();
}

double coeff_lp_norm(const Eigen::MatrixXcd& coeffs, double p) {
    if (p == 1.0) return coeffs.array().abs().sum();
    if (p == 2.0) return std::sqrt(coeffs.array().abs2().sum());
    return coeffs.array().abs().maxCoeff();
}
}  // namespace

std::vector<BoundReport> young_convolution_check(const SpectralField& f, const SpectralField& g,
                                                 double p, double q, double r) {
    if (!valid_young_triple(p, q, r))
        throw std::invalid_argument(
            "young: exponents must come from {1, 2, inf} with 1 + 1/r = 1/p + 1/q");
    if (f.lat != g.lat) throw std::invalid_argument("young: lattice mismatch");

    auto tag = [](double e) { return e == kInf ? std::string("inf") : std::to_string(int(e)); };
    const std::string suffix = "p" + tag(p) + ".q" + tag(q) + ".r" + tag(r);
    std::vector<BoundReport> out;

    // full discrete convolution of the coefficient arrays, alias-free
    const int h = f.lat.half;
    const int grid = fft_friendly_size(4 * h + 2);
    Eigen::MatrixXcd fa = Eigen::MatrixXcd::Zero(grid, grid), ga = fa;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            fa((k1 + grid) % grid, (k2 + grid) % grid) = f.at(k1, k2);
            ga((k1 + grid) % grid, (k2 + grid) % grid) = g.at(k1, k2);
        }
    Fft2D fft(grid);
    fft.inv(fa);
    fft.inv(ga);

    {   // physical form on the same grid: the pointwise values ARE the fields
        // (grid large enough to oversample both), continuous convolution has
        // coefficients (2pi)^2 f_k g_k
        Eigen::MatrixXcd conv = Eigen::MatrixXcd::Zero(grid, grid);
        for (int k2 = -h; k2 <= h; ++k2)
            for (int k1 = -h; k1 <= h; ++k1)
                conv((k1 + grid) % grid, (k2 + grid) % grid) =
                    kTwoPi * kTwoPi * f.at(k1, k2) * g.at(k1, k2);
        Fft2D fft2(grid);
        fft2.inv(conv);
        const double left = grid_lp_norm(conv, r);
        const double right = grid_lp_norm(fa, p) * grid_lp_norm(ga, q);
        out.push_back(make_report("young.physical." + suffix, left, right, 1e-3,
                                  "grid-quadrature norms (documented approximation)"));
    }

    {   // coefficient form: discrete convolution via the padded grids
        fa.array() *= ga.array();
        fft.fwd(fa);
        fa /= double(grid) * grid;
        const double left = coeff_lp_norm(fa, r);
        Eigen::MatrixXcd fc(2 * h + 1, 2 * h + 1), gc(2 * h + 1, 2 * h + 1);
        for (int k2 = -h; k2 <= h; ++k2)
            for (int k1 = -h; k1 <= h; ++k1) {
                fc(k1 + h, k2 + h) = f.at(k1, k2);
                gc(k1 + h, k2 + h) = g.at(k1, k2);
            }
        const double right = coeff_lp_norm(fc, p) * coeff_lp_norm(gc, q);
        out.push_back(make_report("young.fourier." + suffix, left, right, 1e-9,
                                  "counting-measure norms, exact"));
    }
    return out;
}

// ----------------------------------------------------------------------------
// Suite driver
// ----------------------------------------------------------------------------

VerificationSuiteResult run_verification_suite(const VerificationOptions& opt) {
    VerificationSuiteResult suite;
    auto keep = [&](const std::string& id) {
        return opt.only.empty() || id.find(opt.only) != std::string::npos;
    };
    auto push = [&](BoundReport r) {
        if (!keep(r.id)) return;
        suite.all_pass = suite.all_pass && r.pass;
        suite.reports.push_back(std::move(r));
    };
    auto constant = [&](const std::string& name, double value) {
        suite.measured_constants.emplace_back(name, value);
    };
    // skip whole blocks whose ids cannot match the filter
    auto block = [&](std::initializer_list<const char*> keywords) {
        if (opt.only.empty()) return true;
        for (const char* k : keywords)
            if (std::string(k).find(opt.only) != std::string::npos ||
                opt.only.find(k) != std::string::npos)
                return true;
        return false;
    };

    // --- ladder closed form vs quadrature -----------------------------------
    if (block({"ladder"}))
    for (int m : {0, 1, 2})
        for (double r : {0.25, 1.0, 3.0})
            for (double kap : {5.0, 50.0}) {
                const double closed = log_ladder(kap, r, m) / (r * std::pow(kap, r));
                const double quad = tail_log_integral(kap, r, m);
                const double err = std::abs(quad - closed) / closed;
                BoundReport rep = make_report(
                    "ladder.m" + std::to_string(m) + ".r" + std::to_string(r).substr(0, 4) + ".k" +
                        std::to_string(int(kap)),
                    err, 1e-8, 0.0, "closed ladder vs adaptive quadrature, relative error");
                push(rep);
            }

    // --- Dirichlet L1 growth -------------------------------------------------
    if (block({"dirichlet"})) {
        // the symmetric kernel with parameter M (2M+1 terms) and the
        // one-sided kernel with 2M+1 terms share the same modulus
        for (int m : {2, 8, 64}) {
            const double a = dirichlet_l1(m, DirichletVariant::symmetric);
            const double b = dirichlet_l1(2 * m + 1, DirichletVariant::one_sided);
            push(make_report("dirichlet.match.N" + std::to_string(m), std::abs(a - b),
                             1e-6 * std::max(a, b), 0.0, "modulus identity under matched term count"));
        }
        double cmax = 0.0, cmin = 1e300;
        for (int n : {16, 64, 256, 1024, 4096, 16384}) {
            const double v = dirichlet_l1(n, DirichletVariant::symmetric) / std::log(double(n));
            cmax = std::max(cmax, v);
            cmin = std::min(cmin, v);
        }
        constant("dirichlet.l1_over_log.max", cmax);
        push(make_report("dirichlet.logbound", cmax / cmin, 2.0, 0.0,
                         "||D_N||_1 / log N bounded and slowly varying over two decades"));
    }

    // --- multiplier kernel families -----------------------------------------
    if (block({"kernel"})) {
        std::vector<int> kappas = opt.quick ? std::vector<int>{8, 16}
                                            : std::vector<int>{8, 16, 32, 64};
        for (auto kind : {KernelSpec::Kind::riesz, KernelSpec::Kind::smoothing}) {
            const char* kname = kind == KernelSpec::Kind::riesz ? "riesz" : "smoothing";
            for (double s : {0.5, 1.0, 2.0}) {
                double rmax = 0.0, rmin = 1e300;
                for (int kap : kappas) {
                    KernelSpec spec;
                    spec.kind = kind;
                    spec.s = s;
                    spec.kappa = kap;
                    KernelResult res = kernel_l1(spec);
                    rmax = std::max(rmax, res.bound_ratio);
                    rmin = std::min(rmin, res.bound_ratio);
                }
                const std::string stag = std::to_string(s).substr(0, 3);
                constant("kernel." + std::string(kname) + ".ratio_max.s" + stag, rmax);
                push(make_report("kernel." + std::string(kname) + ".stable.s" + stag,
                                 rmax / rmin, 2.5, 0.0, "bound ratio stable across cutoffs"));
            }
        }
        // small-s trend (reported only; no sharpness is claimed as s -> 0)
        for (double s : {0.1, 0.05}) {
            KernelSpec ts;
            ts.kind = KernelSpec::Kind::riesz;
            ts.s = s;
            ts.kappa = 16;
            constant("kernel.riesz.trend.s" + std::to_string(s).substr(0, 4),
                     kernel_l1(ts).bound_ratio);
        }

        // antisymmetry of the riesz kernel
        KernelSpec spec;
        spec.kind = KernelSpec::Kind::riesz;
        spec.s = 1.0;
        spec.kappa = 8;
        Eigen::MatrixXcd gkr = kernel_grid(spec);
        double asym = 0.0;
        const int n = int(gkr.rows());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                asym = std::max(asym,
                                std::abs(gkr(i, j) + gkr((n - i) % n, j)));
        const double scale = gkr.array().abs().maxCoeff();
        push(make_report("kernel.riesz.antisym", asym, 1e-10 * scale, 0.0,
                         "kernel(-x1, x2) = -kernel(x1, x2) on the grid"));

        // operator form of Young: sup |K w| <= ||K||_1 sup |w|, with the safe
        // grid-sup on the left and the coefficient majorant on the right;
        // the synthesis band must cover the field support for the convolution
        // identity to be exact
        {
            Lattice lat(64);
            SpectralField w = random_field(lat, opt.seed + 3);
            project_inplace(w, 8.0, kInf);
            KernelSpec ks;
            ks.kind = KernelSpec::Kind::riesz;
            ks.s = 1.0;
            ks.kappa = 8;
            ks.band_factor = 6;  // band 48 >= lattice corner |k| <= 31 sqrt(2)
            KernelResult kr = kernel_l1(ks);
            SpectralField kw(lat);
            const int h = lat.half;
            for (int k2 = -h; k2 <= h; ++k2)
                for (int k1 = -h; k1 <= h; ++k1)
                    kw.at(k1, k2) = kernel_symbol(ks, k1, k2) * Complex(0, 1) * w.at(k1, k2);
            push(make_report("kernel.young_operator", sup_on_grid(kw, 2),
                             kr.l1 * norm_l1_fourier(w), 1e-9,
                             "multiplier application vs kernel L1 times sup majorant"));
        }
    }

    // --- field inequalities on seeded data -----------------------------------
    if (block({"div_l2", "div_l1", "projection_identity", "agmon", "brezis_gallouet",
               "poincare", "lowmode_sup", "tracer_h1", "u_l1_amplitude", "young"})) {
        Lattice lat(opt.n_grid);
        TransformEngine engine(lat);
        VelocityParams vp = VelocityParams::steep(1.0, -2.5);
        RandomPhaseField phases = sample_phases(opt.seed, lat);
        VectorField u = build_velocity(vp, phases);

        // amplitude bound on the coefficient sum for the steep family
        VelocityAnalysis va(vp, lat);
        const double bound = -kTwoPi * vp.amplitude / (vp.beta + 2.0);
        const double ratio = va.l1_fourier_exact() / bound;
        constant("u_l1_amplitude.ratio", ratio);
        push(make_report("u_l1_amplitude", va.l1_fourier_exact(), bound, 0.3,
                         "||u_hat||_1 vs -2 pi U/(beta+2); lattice exceeds the "
                         "radial integral near |k| = 1"));

        SourceSpec src = SourceSpec::unit_shells(2);
        SpectralField g = src.build(lat);
        SolveConfig scfg;
        scfg.tol = 1e-10;
        // amplitude large enough that the advection terms bind in the bounds
        VelocityParams mid = VelocityParams::steep(0.5, -2.5);
        VectorField us = build_velocity(mid, phases);
        SpectralField theta = solve_direct(us, g, scfg, engine);
        for (BoundReport& r : verify_field_inequalities(us, theta, g, {2.0, 4.0, 8.0, 16.0}))
            push(std::move(r));

        // record the generic constants that the regression baseline pins
        for (const BoundReport& r : suite.reports) {
            if (r.id == "agmon.u" || r.id == "brezis_gallouet.u" || r.id == "agmon.theta" ||
                r.id == "brezis_gallouet.theta" || r.id == "lowmode_sup.k16" ||
                r.id == "tracer_h2" || r.id == "tracer_h2_ratio" || r.id == "tracer_w1inf")
                constant(r.id, r.measured_constant);
        }

        // Young instances
        SpectralField f1 = random_field(lat, opt.seed + 11);
        SpectralField f2 = random_field(lat, opt.seed + 12);
        for (BoundReport& r : young_convolution_check(f1, f2, 2.0, 2.0, kInf)) push(std::move(r));
        for (BoundReport& r : young_convolution_check(f1, f2, 1.0, 2.0, 2.0)) push(std::move(r));
        for (BoundReport& r : young_convolution_check(f1, f2, 1.0, 1.0, 1.0)) push(std::move(r));
    }

    return suite;
}

}  // namespace bhtlab
