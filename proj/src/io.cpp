#include "bhtlab/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bhtlab/digest.hpp"

namespace bhtlab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ============================================================================
// Formats
// ============================================================================

std::string velocity_csv(const VectorField& u) {
    std::ostringstream os;
    os << "k1,k2,ux_re,ux_im,uy_re,uy_im\n";
    const int h = u.lat().half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const Complex x = u.x.at(k1, k2), y = u.y.at(k1, k2);
            if (x == Complex(0, 0) && y == Complex(0, 0)) continue;
            os << k1 << ',' << k2 << ',' << format_double(x.real()) << ','
               << format_double(x.imag()) << ',' << format_double(y.real()) << ','
               << format_double(y.imag()) << '\n';
        }
    return os.str();
}

namespace {
template <typename T>
void put_raw(std::string& out, T v) {
    char buf[sizeof v];
    std::memcpy(buf, &v, sizeof v);
    out.append(buf, sizeof v);
}

template <typename T>
T get_raw(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("velocity blob truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof v);
    pos += sizeof v;
    return v;
}
}  // namespace

std::string velocity_blob(const VectorField& u) {
    std::string out = "BHTV";
    put_raw<std::int32_t>(out, 1);  // format version
    put_raw<std::int32_t>(out, u.lat().n);
    std::int64_t rows = 0;
    const int h = u.lat().half;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            if (u.x.at(k1, k2) != Complex(0, 0) || u.y.at(k1, k2) != Complex(0, 0)) ++rows;
    put_raw<std::int64_t>(out, rows);
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const Complex x = u.x.at(k1, k2), y = u.y.at(k1, k2);
            if (x == Complex(0, 0) && y == Complex(0, 0)) continue;
            put_raw<std::int32_t>(out, k1);
            put_raw<std::int32_t>(out, k2);
            put_raw<double>(out, x.real());
            put_raw<double>(out, x.imag());
            put_raw<double>(out, y.real());
            put_raw<double>(out, y.imag());
        }
    return out;
}

VectorField velocity_from_blob(const std::string& blob) {
    std::size_t pos = 0;
    if (blob.size() < 4 || blob.compare(0, 4, "BHTV") != 0)
        throw std::runtime_error("velocity blob: bad magic");
    pos = 4;
    const auto version = get_raw<std::int32_t>(blob, pos);
    if (version != 1) throw std::runtime_error("velocity blob: unknown version");
    const auto n = get_raw<std::int32_t>(blob, pos);
    VectorField u{Lattice(n)};
    const auto rows = get_raw<std::int64_t>(blob, pos);
    for (std::int64_t r = 0; r < rows; ++r) {
        const auto k1 = get_raw<std::int32_t>(blob, pos);
        const auto k2 = get_raw<std::int32_t>(blob, pos);
        const double xr = get_raw<double>(blob, pos);
        const double xi = get_raw<double>(blob, pos);
        const double yr = get_raw<double>(blob, pos);
        const double yi = get_raw<double>(blob, pos);
        u.x.at(k1, k2) = Complex(xr, xi);
        u.y.at(k1, k2) = Complex(yr, yi);
    }
    return u;
}

std::string spectrum_csv(const EnsembleStats& stats) {
    std::ostringstream os;
    os << "shell,count,mean,variance,field,weight\n";
    for (FieldTag tag : all_field_tags())
        for (int w : {0, 1}) {
            const ShellStats& s = stats.shell(tag, w);
            for (int shell = 1; shell < int(s.mean.size()); ++shell)
                os << shell << ',' << stats.mode_counts[shell] << ','
                   << format_double(s.mean[shell]) << ',' << format_double(s.variance(shell))
                   << ',' << field_tag_name(tag) << ',' << w << '\n';
        }
    return os.str();
}

std::string oracle_csv(const EnsembleStats& stats, const OracleSpectrum& oracle, int m) {
    std::ostringstream os;
    os << "shell,count,mc_mean,mc_stderr,oracle,sigmas,within_5se\n";
    const ShellStats& s = stats.shell(FieldTag::vartheta1_hi, 1);
    const int lo = int(std::ceil(3.0 * oracle.kappa_bar));
    for (int shell = lo; shell < int(s.mean.size()); ++shell) {
        const double se = std::sqrt(s.variance(shell) / double(m));
        const double dev = std::abs(s.mean[shell] - oracle.shell_w1[shell]);
        const double sig = se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : kInf);
        os << shell << ',' << stats.mode_counts[shell] << ',' << format_double(s.mean[shell])
           << ',' << format_double(se) << ',' << format_double(oracle.shell_w1[shell]) << ','
           << format_double(sig) << ',' << (sig <= 5.0 ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string remainder_csv(const RemainderReport& rep) {
    std::ostringstream os;
    os << "kappa,rem_vartheta,rem_phi,leading,ratio\n";
    for (const RemainderRow& r : rep.rows)
        os << r.kappa << ',' << format_double(r.rem_vartheta) << ',' << format_double(r.rem_phi)
           << ',' << format_double(r.leading) << ',' << format_double(r.ratio) << '\n';
    return os.str();
}

std::string bound_reports_csv(const std::vector<BoundReport>& reports) {
    std::ostringstream os;
    os << "id,left,right,measured_constant,slack,pass,note\n";
    for (const BoundReport& r : reports)
        os << r.id << ',' << format_double(r.left) << ',' << format_double(r.right) << ','
           << format_double(r.measured_constant) << ',' << format_double(r.slack) << ','
           << (r.pass ? 1 : 0) << ',' << '"' << r.note << '"' << '\n';
    return os.str();
}

// ============================================================================
// Manifest machinery
// ============================================================================

namespace {

bool is_unit_shells(const SourceSpec& s) {
    SourceSpec ref = SourceSpec::unit_shells(s.kappa_g);
    if (ref.coeffs.size() != s.coeffs.size()) return false;
    auto key = [](const SourceSpec::ModeCoeff& m) { return std::pair(m.k1, m.k2); };
    std::map<std::pair<int, int>, Complex> have;
    for (const auto& m : s.coeffs) have[key(m)] = m.value;
    for (const auto& m : ref.coeffs) {
        auto it = have.find(key(m));
        if (it == have.end() || it->second != m.value) return false;
    }
    return true;
}

std::string source_csv(const SourceSpec& s) {
    std::ostringstream os;
    os << "# k1,k2,re,im (half-lattice rows; conjugates implied)\n";
    for (const auto& m : s.coeffs)
        os << m.k1 << ',' << m.k2 << ',' << format_double(m.value.real()) << ','
           << format_double(m.value.imag()) << '\n';
    return os.str();
}

std::string canonical_config(const RunConfig& cfg) {
    const EnsembleConfig& e = cfg.ensemble;
    std::ostringstream os;
    os << "grid.n = " << e.n_grid << '\n';
    if (e.velocity.family == VelocityParams::Family::steep) {
        os << "velocity.family = steep\n";
        os << "velocity.amplitude = " << format_double(e.velocity.amplitude) << '\n';
        os << "velocity.beta = " << format_double(e.velocity.beta) << '\n';
    } else {
        os << "velocity.family = kraichnan\n";
        os << "velocity.amplitude = " << format_double(e.velocity.amplitude) << '\n';
        os << "velocity.kappa_eta = " << e.velocity.kappa_eta << '\n';
    }
    if (is_unit_shells(e.source))
        os << "source.kind = unit-shells\n";
    else
        os << "source.file = source.csv\n";  // written alongside the manifest
    os << "source.kappa_g = " << e.source.kappa_g << '\n';
    os << "solve.tol = " << format_double(e.solve.tol) << '\n';
    os << "solve.max_iter = " << e.solve.max_iter << '\n';
    os << "solve.method = "
       << (e.solve.method == SolveMethod::krylov ? "krylov" : "fixed-point") << '\n';
    os << "solve.kappa_bar = " << format_double(e.solve.kappa_bar) << '\n';
    os << "solve.n_max = " << e.solve.n_max << '\n';
    os << "solve.picard_stop_rel = " << format_double(e.solve.picard_stop_rel) << '\n';
    os << "solve.restart = " << e.solve.restart << '\n';
    os << "ensemble.m = " << e.realizations << '\n';
    os << "ensemble.base_seed = " << e.base_seed << '\n';
    os << "ensemble.frozen_below = " << format_double(e.frozen_threshold()) << '\n';
    auto [flo, fhi] = e.fit_window(Lattice(e.n_grid));
    os << "ensemble.fit_lo = " << format_double(flo) << '\n';
    os << "ensemble.fit_hi = " << format_double(fhi) << '\n';
    os << "ensemble.full_decomposition = " << (e.full_decomposition ? "true" : "false") << '\n';
    os << "constants.c_prime = " << format_double(cfg.c_prime) << '\n';
    return os.str();
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ManifestBuilder {
    ordered_json j;
    fs::path dir;

    ManifestBuilder(const std::string& out_dir, const std::string& run_id,
                    const std::string& config_text) {
        dir = out_dir;
        fs::create_directories(dir);
        j["schema_version"] = kManifestSchemaVersion;
        j["artifact_version"] = kArtifactVersion;
        j["run_id"] = run_id;
        j["timestamp_utc"] = iso_timestamp();
        j["config"] = config_text;
    }

    void add_file(const std::string& name, const std::string& content) {
        write_text_file((dir / name).string(), content);
        j["inventory"][name] = {{"bytes", content.size()}, {"sha256", sha256_hex(content)}};
    }

    void finish() {
        write_text_file((dir / "manifest.json").string(), j.dump(2) + "\n");
    }
};

std::string make_run_id(const std::string& config_text, std::uint64_t seed) {
    return sha256_hex(config_text + "#" + std::to_string(seed)).substr(0, 12);
}

ordered_json scalar_json(const ScalarStats& s) {
    return ordered_json{{"mean", s.mean},
                        {"variance", s.variance()},
                        {"max", s.n > 0 ? s.max : 0.0},
                        {"n", s.n}};
}

ordered_json fit_json(const FitResult& f) {
    return ordered_json{{"slope", f.slope},          {"intercept", f.intercept},
                        {"stderr_slope", f.stderr_slope}, {"points", f.points},
                        {"window_lo", f.window_lo},  {"window_hi", f.window_hi}};
}

ordered_json solve_report_json(const SolveReport& r) {
    return ordered_json{{"method", r.method},
                        {"converged", r.converged},
                        {"iterations", r.iterations},
                        {"rel_residual", r.rel_residual},
                        {"residual_history", r.residual_history}};
}

ordered_json derived_json(const RunConfig& cfg, const Lattice& lat, const VectorField* u) {
    const EnsembleConfig& e = cfg.ensemble;
    VelocityAnalysis va(e.velocity, lat);
    ordered_json d;
    d["kappa_max"] = lat.kappa_max;
    d["m_beta"] = e.velocity.m_beta();
    d["kappa_bar"] = e.solve.kappa_bar;
    d["frozen_below"] = e.frozen_threshold();
    d["u_l2_exact"] = va.l2_exact();
    d["u_l2_continuum"] = va.l2_continuum();
    d["u_l1_fourier_exact"] = va.l1_fourier_exact();
    d["u_l2_tail_beyond_kappa_max"] = va.l2_tail(double(lat.kappa_max));
    if (u) {
        KappaBarResult kb = kappa_bar_formula(e.velocity, *u, e.source.kappa_g, cfg.c_prime);
        d["kappa_bar_formula"] = {{"value", kb.value},
                                  {"active_term", kb.active_term},
                                  {"feasible", kb.feasible}};
    }
    return d;
}

}  // namespace

// ============================================================================
// Command drivers
// ============================================================================

std::string cmd_gen_velocity(const RunConfig& cfg, std::uint64_t seed,
                             const std::string& out_dir) {
    const EnsembleConfig& e = cfg.ensemble;
    const Lattice lat(e.n_grid);
    e.velocity.validate(lat);

    RandomPhaseField phases = sample_phases(seed, lat, e.frozen_threshold());
    VectorField u = build_velocity(e.velocity, phases);

    const std::string config_text = canonical_config(cfg);
    const std::string run_id = make_run_id(config_text, seed);
    ManifestBuilder mb(out_dir, run_id, config_text);
    if (!is_unit_shells(e.source)) mb.add_file("source.csv", source_csv(e.source));
    mb.j["seed"] = seed;
    mb.j["derived"] = derived_json(cfg, lat, &u);
    mb.j["derived"]["u_l2_measured"] = norm_l2(u);
    mb.j["derived"]["max_divergence"] = max_divergence(u);
    mb.add_file("velocity.csv", velocity_csv(u));
    mb.add_file("velocity.bin", velocity_blob(u));
    mb.finish();
    return run_id;
}

std::string cmd_solve(const RunConfig& cfg, std::uint64_t seed, const std::string& out_dir) {
    const EnsembleConfig& e = cfg.ensemble;
    const Lattice lat(e.n_grid);
    const SpectralField g = e.source.build(lat);
    RandomPhaseField phases = sample_phases(seed, lat, e.frozen_threshold());
    VectorField u = build_velocity(e.velocity, phases);
    TransformEngine engine(lat);

    Decomposition d = decompose(u, g, e.solve, engine);

    // single-realization spectra with the ensemble schema (variance 0)
    std::ostringstream spec;
    spec << "shell,count,mean,variance,field,weight\n";
    const std::vector<long> counts = shell_mode_counts(lat);
    auto emit = [&](const char* name, const SpectralField& f) {
        for (int w : {0, 1}) {
            ShellSpectrum s = shell_spectrum(f, w);
            for (int shell = 1; shell <= s.kappa_max(); ++shell)
                spec << shell << ',' << counts[shell] << ',' << format_double(s.sum[shell])
                     << ",0," << name << ',' << w << '\n';
        }
    };
    emit("theta", d.theta);
    emit("tau", d.tau);
    emit("vartheta", d.vartheta);
    emit("vartheta1", d.vartheta1);
    emit("vartheta1_lo", d.vartheta1_lo);
    emit("vartheta1_hi", d.vartheta1_hi);
    emit("phi", d.phi);

    ordered_json rep;
    rep["kappa_bar"] = d.kappa_bar;
    rep["vartheta_method"] = d.vartheta_method;
    rep["residual_rel"] = d.residual_rel;
    rep["tau"] = solve_report_json(d.tau_report);
    rep["vartheta"] = solve_report_json(d.vartheta_report);
    rep["phi"] = solve_report_json(d.phi_report);
    rep["increment_grad_norms"] = d.increment_grad_norms;
    rep["grad_theta"] = norm_h1(d.theta);
    rep["grad_bound_from_source"] = norm_l2(fractional_laplacian(g, -1.0));
    {
        // measured high-mode bound ratios for the tracer and, on the half
        // window below the split, for the low-mode part
        auto rows_json = [](const HighmodeBoundReport& hb) {
            ordered_json rows = ordered_json::array();
            for (const HighmodeBoundRow& row : hb.rows)
                rows.push_back({{"kappa", row.kappa},
                                {"tail_grad", row.tail_grad},
                                {"scale", row.scale},
                                {"ratio", row.ratio}});
            return ordered_json{{"max_ratio", hb.max_ratio}, {"rows", rows}};
        };
        std::vector<double> kappas;
        for (int k = int(std::ceil(d.kappa_bar)); k <= lat.kappa_max; k += 2)
            kappas.push_back(double(k));
        rep["highmode_bound_theta"] = rows_json(
            highmode_bound_report(d.theta, u, e.velocity, kappas));
        std::vector<double> tau_kappas;
        for (double k = std::ceil(d.kappa_bar / 2.0); k < d.kappa_bar; k += 1.0)
            tau_kappas.push_back(k);
        if (!tau_kappas.empty())
            rep["highmode_bound_tau"] = rows_json(
                highmode_bound_report(d.tau, u, e.velocity, tau_kappas));
    }

    const std::string config_text = canonical_config(cfg);
    const std::string run_id = make_run_id(config_text, seed);
    ManifestBuilder mb(out_dir, run_id, config_text);
    if (!is_unit_shells(e.source)) mb.add_file("source.csv", source_csv(e.source));
    mb.j["seed"] = seed;
    mb.j["derived"] = derived_json(cfg, lat, &u);
    mb.add_file("spectra.csv", spec.str());
    mb.add_file("solve_report.json", rep.dump(2) + "\n");
    mb.finish();
    return run_id;
}

std::string cmd_ensemble(const RunConfig& cfg, const std::string& out_dir) {
    const EnsembleConfig& e = cfg.ensemble;
    const Lattice lat(e.n_grid);

    const auto t0 = std::chrono::steady_clock::now();
    EnsembleResult result = run_ensemble(e);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const EnsembleStats& st = result.stats;

    OracleSpectrum oracle = bht_oracle(st.tau_mode_power_mean, e.velocity, e.solve.kappa_bar, lat);
    VelocityAnalysis va(e.velocity, lat);
    RemainderReport rem =
        remainder_report(st, e.solve.kappa_bar, e.velocity, va.l1_fourier_exact());

    auto [fit_lo, fit_hi] = e.fit_window(lat);
    std::vector<double> shells_x;
    for (int k = 1; k <= lat.kappa_max; ++k) shells_x.push_back(double(k));
    ordered_json fits;
    auto try_fit = [&](const char* name, const std::vector<double>& vals) {
        try {
            fits[name] = fit_json(fit_exponent(shells_x, vals, fit_lo, fit_hi));
        } catch (const std::exception& ex) {
            fits[name] = {{"error", ex.what()}};
        }
    };
    {   // gradient tail of the first iterate: BHT scaling exponent 2 beta
        std::vector<double> tails = tail_spectrum(st, FieldTag::vartheta1, 1);
        try_fit("vartheta1_grad_tail", std::vector<double>(tails.begin() + 1, tails.end()));
    }
    {   // tracer shell spectrum: 2 beta - 3 (the -7 line in the cutoff family)
        const ShellStats& s = st.shell(FieldTag::theta, 0);
        try_fit("theta_shell", std::vector<double>(s.mean.begin() + 1, s.mean.end()));
    }

    ordered_json stats;
    stats["completed"] = st.completed;
    stats["grad_tau_sq"] = scalar_json(st.grad_tau_sq);
    stats["grad_tau_sq_fourier"] = scalar_json(st.grad_tau_sq_fourier);
    stats["lo_hi_inner"] = scalar_json(st.lo_hi_inner);
    stats["residual_rel"] = scalar_json(st.residual_rel);
    stats["tht_h1_margin"] = scalar_json(st.tht_h1_margin);
    stats["solver_applies"] = scalar_json(st.solver_applies);

    const std::string config_text = canonical_config(cfg);
    const std::string run_id = make_run_id(config_text, e.base_seed);
    ManifestBuilder mb(out_dir, run_id, config_text);
    if (!is_unit_shells(e.source)) mb.add_file("source.csv", source_csv(e.source));
    mb.j["derived"] = derived_json(cfg, lat, nullptr);
    {
        std::vector<std::uint64_t> seeds;
        for (int m = 0; m < e.realizations; ++m) seeds.push_back(derive_seed(e.base_seed, m));
        mb.j["seeds"] = seeds;
    }
    mb.j["wall_clock_seconds"] = wall;
    mb.add_file("spectra.csv", spectrum_csv(st));
    mb.add_file("oracle.csv", oracle_csv(st, oracle, st.completed));
    mb.add_file("remainders.csv", remainder_csv(rem));
    mb.add_file("fits.json", fits.dump(2) + "\n");
    mb.add_file("stats.json", stats.dump(2) + "\n");
    mb.finish();
    return run_id;
}

bool cmd_verify(const VerificationOptions& opt, const std::string& baseline_path,
                const std::string& out_dir) {
    VerificationSuiteResult suite = run_verification_suite(opt);
    bool ok = suite.all_pass;

    // pass/fail table on stdout
    std::printf("%-34s %-5s %13s %13s %13s\n", "check", "pass", "left", "right", "constant");
    for (const BoundReport& r : suite.reports)
        std::printf("%-34s %-5s %13.6g %13.6g %13.6g\n", r.id.c_str(), r.pass ? "ok" : "FAIL",
                    r.left, r.right, r.measured_constant);

    ordered_json constants;
    for (auto& [name, value] : suite.measured_constants) constants[name] = value;

    ordered_json drift = ordered_json::object();
    if (!baseline_path.empty()) {
        ordered_json base = ordered_json::parse(read_text_file(baseline_path));
        for (auto& [name, value] : suite.measured_constants) {
            if (!base.contains(name)) continue;
            const double b = base[name].get<double>();
            const double rel = b != 0.0 ? std::abs(value - b) / std::abs(b) : std::abs(value);
            drift[name] = rel;
            if (rel > 0.05) ok = false;  // regression contract: 5% stability
        }
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file((fs::path(out_dir) / "verification.csv").string(),
                        bound_reports_csv(suite.reports));
        ordered_json reports = ordered_json::array();
        for (const BoundReport& r : suite.reports)
            reports.push_back({{"id", r.id},
                               {"left", r.left},
                               {"right", r.right},
                               {"measured_constant", r.measured_constant},
                               {"slack", r.slack},
                               {"pass", r.pass},
                               {"note", r.note}});
        ordered_json j;
        j["all_pass"] = suite.all_pass;
        j["reports"] = reports;
        j["constants"] = constants;
        j["baseline_drift"] = drift;
        write_text_file((fs::path(out_dir) / "verification.json").string(), j.dump(2) + "\n");
        std::ostringstream cs;
        cs << "name,value\n";
        for (auto& [name, value] : suite.measured_constants)
            cs << name << ',' << format_double(value) << '\n';
        write_text_file((fs::path(out_dir) / "measured_constants.csv").string(), cs.str());
    }
    return ok;
}

void validate_run_dir(const std::string& run_dir) {
    const fs::path dir = run_dir;
    const fs::path mpath = dir / "manifest.json";
    if (!fs::exists(mpath)) throw std::runtime_error("missing manifest: " + mpath.string());
    ordered_json manifest = ordered_json::parse(read_text_file(mpath.string()));
    if (!manifest.contains("inventory")) throw std::runtime_error("manifest has no inventory");
    for (auto& [name, entry] : manifest["inventory"].items()) {
        const fs::path p = dir / name;
        if (!fs::exists(p)) throw std::runtime_error("inventoried file missing: " + name);
        const std::string digest = sha256_file(p.string());
        if (digest != entry["sha256"].get<std::string>())
            throw std::runtime_error("digest mismatch for " + name);
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        if (!manifest["inventory"].contains(name))
            throw std::runtime_error("orphan file not in manifest: " + name);
    }
}

void cmd_report(const std::string& run_dir, const std::string& out_dir) {
    validate_run_dir(run_dir);
    const fs::path dir = run_dir;
    ordered_json manifest = ordered_json::parse(read_text_file((dir / "manifest.json").string()));
    std::string cfg_text = manifest["config"].get<std::string>();
    // a non-default source table travels with the run directory
    const std::string needle = "source.file = source.csv";
    if (auto pos = cfg_text.find(needle); pos != std::string::npos)
        cfg_text.replace(pos, needle.size(), "source.file = " + (dir / "source.csv").string());
    RunConfig cfg = RunConfig::from_string(cfg_text);
    const EnsembleConfig& e = cfg.ensemble;
    const Lattice lat(e.n_grid);

    ordered_json stats = ordered_json::parse(read_text_file((dir / "stats.json").string()));
    const double grad_tau_fourier = stats["grad_tau_sq_fourier"]["mean"].get<double>();

    // parse the spectra table
    std::istringstream in(read_text_file((dir / "spectra.csv").string()));
    std::string line;
    std::getline(in, line);  // header
    std::map<std::pair<std::string, int>, std::map<int, std::pair<long, double>>> table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        int shell, weight;
        long count;
        double mean, variance;
        std::string field;
        ls >> shell >> count >> mean >> variance >> field >> weight;
        table[{field, weight}][shell] = {count, mean};
    }
    constexpr double kFourPiSq = 39.478417604357434475337963999505;

    auto [fit_lo, fit_hi] = e.fit_window(lat);
    std::ostringstream tails;
    tails << "shell,grad_tail,bht_reference\n";
    {
        auto& rows = table[{"vartheta1", 1}];
        double acc = 0.0;
        std::map<int, double> tail;
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            acc += it->second.second;
            tail[it->first] = kFourPiSq * acc;
        }
        for (auto& [shell, v] : tail)
            tails << shell << ',' << format_double(v) << ','
                  << format_double(bht_prediction(double(shell), e.velocity, grad_tau_fourier))
                  << '\n';
    }

    std::ostringstream shells;
    shells << "shell,theta_shell,reference_line\n";
    {
        auto& rows = table[{"theta", 0}];
        // reference slope: 2 beta - 3 shell spectrum, anchored at the window start
        const double slope = 2.0 * e.velocity.beta - 3.0;
        const int anchor = int(std::ceil(fit_lo));
        const double base = rows.count(anchor) ? rows[anchor].second : 0.0;
        for (auto& [shell, cm] : rows) {
            const double ref = base * std::pow(double(shell) / double(anchor), slope);
            shells << shell << ',' << format_double(cm.second) << ',' << format_double(ref)
                   << '\n';
        }
    }

    ordered_json meta;
    meta["run_id"] = manifest["run_id"];
    meta["fit_window"] = {fit_lo, fit_hi};
    meta["tail_reference_exponent"] = 2.0 * e.velocity.beta;
    meta["shell_reference_exponent"] = 2.0 * e.velocity.beta - 3.0;

    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "report_tails.csv").string(), tails.str());
    write_text_file((fs::path(out_dir) / "report_shells.csv").string(), shells.str());
    write_text_file((fs::path(out_dir) / "report_meta.json").string(), meta.dump(2) + "\n");
}

}  // namespace bhtlab
