#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "bhtlab/digest.hpp"
#include "bhtlab/io.hpp"

using namespace bhtlab;
namespace fs = std::filesystem;

namespace {
std::string sandbox(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("bhtlab_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

RunConfig smoke_config() {
    RunConfig cfg = RunConfig::defaults();
    cfg.ensemble.n_grid = 48;
    cfg.ensemble.realizations = 2;
    cfg.ensemble.base_seed = 3;
    cfg.ensemble.velocity = VelocityParams::kraichnan(0.4, 8);
    cfg.ensemble.source = SourceSpec::unit_shells(2);
    cfg.ensemble.solve.kappa_bar = 2.0;
    cfg.ensemble.solve.tol = 1e-8;
    cfg.ensemble.fit_lo = 6.0;
    cfg.ensemble.fit_hi = 16.0;
    cfg.ensemble.threads = 2;
    return cfg;
}
}  // namespace

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex(std::string(1000000, 'a')) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("double formatting round-trips") {
    for (double v : {1.0, -0.1, 3.141592653589793, 1e-300, 7.0 / 3.0, 123456789.123456789}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("config parsing: happy path and errors") {
    const std::string good =
        "grid.n = 64\n"
        "velocity.family = kraichnan\n"
        "velocity.amplitude = 1.0\n"
        "velocity.kappa_eta = 16\n"
        "source.kappa_g = 2\n"
        "solve.kappa_bar = 3\n"
        "ensemble.m = 4\n"
        "ensemble.fit_lo = 9\n"
        "ensemble.fit_hi = 21\n"
        "# comment line\n";
    RunConfig cfg = RunConfig::from_string(good);
    CHECK(cfg.ensemble.n_grid == 64);
    CHECK(cfg.ensemble.velocity.kappa_eta == 16);
    CHECK(cfg.ensemble.realizations == 4);

    CHECK_THROWS_AS(RunConfig::from_string("grid.n = 64\ngrid.n = 32\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string("grid.q = 64\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string("grid.n = banana\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_string("solve.method = jacobi\n"), ConfigError);
    // cutoff beyond the trusted shells of the chosen grid
    CHECK_THROWS_AS(RunConfig::from_string("grid.n = 64\nvelocity.kappa_eta = 32\n"),
                    ConfigError);
    // fit window must start at or above 3 kappa_bar
    CHECK_THROWS_AS(RunConfig::from_string("grid.n = 64\nvelocity.kappa_eta = 16\n"
                                           "solve.kappa_bar = 4\nensemble.fit_lo = 9\n"
                                           "ensemble.fit_hi = 20\n"),
                    ConfigError);
}

TEST_CASE("velocity snapshot round-trips through csv and blob") {
    Lattice lat(32);
    VectorField u = build_velocity(VelocityParams::kraichnan(0.8, 8), sample_phases(5, lat));
    const std::string blob = velocity_blob(u);
    VectorField back = velocity_from_blob(blob);
    CHECK((back.x.c - u.x.c).abs().maxCoeff() == 0.0);
    CHECK((back.y.c - u.y.c).abs().maxCoeff() == 0.0);
    // csv header and one known row present
    const std::string csv = velocity_csv(u);
    CHECK(csv.rfind("k1,k2,ux_re,ux_im,uy_re,uy_im\n", 0) == 0);
    CHECK_THROWS(velocity_from_blob("XXXX"));
}

TEST_CASE("gen-velocity writes identical trees for identical inputs") {
    RunConfig cfg = smoke_config();
    const std::string d1 = sandbox("gen1");
    const std::string d2 = sandbox("gen2");
    cmd_gen_velocity(cfg, 42, d1);
    cmd_gen_velocity(cfg, 42, d2);
    for (const char* name : {"velocity.csv", "velocity.bin"})
        CHECK(sha256_file(fs::path(d1) / name) == sha256_file(fs::path(d2) / name));
    validate_run_dir(d1);
    // manifest's measured norm equals the analytic lattice value, and the
    // velocity reloaded from the blob reproduces both
    nlohmann::json manifest =
        nlohmann::json::parse(read_text_file((fs::path(d1) / "manifest.json").string()));
    const double exact = manifest["derived"]["u_l2_exact"].get<double>();
    const double measured = manifest["derived"]["u_l2_measured"].get<double>();
    CHECK(measured == doctest::Approx(exact).epsilon(1e-13));
    VectorField back =
        velocity_from_blob(read_text_file((fs::path(d1) / "velocity.bin").string()));
    CHECK(norm_l2(back) == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("ensemble run: files, reproducibility, manifest integrity") {
    RunConfig cfg = smoke_config();
    const std::string d1 = sandbox("ens1");
    const std::string d2 = sandbox("ens2");
    cmd_ensemble(cfg, d1);
    cmd_ensemble(cfg, d2);
    for (const char* name : {"spectra.csv", "oracle.csv", "remainders.csv", "stats.json",
                             "fits.json"})
        CHECK(sha256_file(fs::path(d1) / name) == sha256_file(fs::path(d2) / name));
    validate_run_dir(d1);

    // an orphan file trips validation
    write_text_file((fs::path(d1) / "stray.txt").string(), "x");
    CHECK_THROWS(validate_run_dir(d1));
    fs::remove(fs::path(d1) / "stray.txt");

    // a modified file trips the digest check
    const std::string spath = (fs::path(d1) / "spectra.csv").string();
    std::string s = read_text_file(spath);
    s[s.size() / 2] = s[s.size() / 2] == '1' ? '2' : '1';
    write_text_file(spath, s);
    CHECK_THROWS(validate_run_dir(d1));
}

TEST_CASE("file-based sources travel with the run directory") {
    const std::string base = sandbox("srcfile");
    // two modes, deliberately not the generator default
    write_text_file(base + "/src.csv", "1,0,0.9,0.0\n0,1,0.2,0.3\n");
    RunConfig cfg = RunConfig::from_string(
        "grid.n = 48\nvelocity.kappa_eta = 8\nvelocity.amplitude = 0.4\n"
        "solve.kappa_bar = 2\nsolve.tol = 1e-8\nensemble.m = 2\n"
        "ensemble.fit_lo = 6\nensemble.fit_hi = 16\nsource.file = " +
        base + "/src.csv\n");
    const std::string run = base + "/run";
    cmd_ensemble(cfg, run);
    validate_run_dir(run);
    CHECK(fs::exists(fs::path(run) / "source.csv"));
    // the manifest's config echo plus the bundled table reproduce the report
    cmd_report(run, base + "/rep");
    CHECK(fs::exists(fs::path(base) / "rep" / "report_tails.csv"));
}

TEST_CASE("solve command emits reports and spectra") {
    RunConfig cfg = smoke_config();
    const std::string d = sandbox("solve");
    cmd_solve(cfg, 7, d);
    validate_run_dir(d);
    const std::string rep = read_text_file((fs::path(d) / "solve_report.json").string());
    CHECK(rep.find("rel_residual") != std::string::npos);
    CHECK(rep.find("vartheta_method") != std::string::npos);
}

TEST_CASE("report bundle: reference columns and idempotence") {
    RunConfig cfg = smoke_config();
    const std::string run = sandbox("run_for_report");
    cmd_ensemble(cfg, run);
    const std::string r1 = sandbox("report1");
    const std::string r2 = sandbox("report2");
    cmd_report(run, r1);
    cmd_report(run, r2);
    for (const char* name : {"report_tails.csv", "report_shells.csv", "report_meta.json"})
        CHECK(sha256_file(fs::path(r1) / name) == sha256_file(fs::path(r2) / name));

    // the reference column is the prediction formula re-evaluated
    std::istringstream in(read_text_file((fs::path(r1) / "report_tails.csv").string()));
    std::string line;
    std::getline(in, line);
    CHECK(line == "shell,grad_tail,bht_reference");
    bool checked = false;
    // read stats for the prediction input
    const double gtf = [&] {
        auto j = read_text_file((fs::path(run) / "stats.json").string());
        const auto pos = j.find("grad_tau_sq_fourier");
        REQUIRE(pos != std::string::npos);
        const auto mpos = j.find("\"mean\":", pos);
        return std::stod(j.substr(mpos + 8));
    }();
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        int shell;
        double tail, ref;
        ls >> shell >> tail >> ref;
        const double expect = bht_prediction(double(shell), cfg.ensemble.velocity, gtf);
        CHECK(ref == doctest::Approx(expect).epsilon(1e-12));
        checked = true;
    }
    CHECK(checked);

    CHECK_THROWS(cmd_report(sandbox("empty_run"), sandbox("report3")));
}

TEST_CASE("cli binary: exit codes and smoke runs") {
    const char* cli = std::getenv("BHTLAB_CLI");
    REQUIRE(cli != nullptr);
    const std::string base = sandbox("cli");

    // config error -> exit 2
    write_text_file(base + "/bad.cfg", "grid.q = 1\n");
    int rc = std::system((std::string(cli) + " ensemble --config " + base + "/bad.cfg --out " +
                          base + "/o1 >/dev/null 2>&1")
                             .c_str());
    CHECK(WEXITSTATUS(rc) == 2);

    // kraichnan cutoff beyond resolution -> exit 2
    write_text_file(base + "/bad2.cfg", "grid.n = 48\nvelocity.kappa_eta = 32\n");
    rc = std::system((std::string(cli) + " gen-velocity --config " + base + "/bad2.cfg --out " +
                      base + "/o2 >/dev/null 2>&1")
                         .c_str());
    CHECK(WEXITSTATUS(rc) == 2);

    // solver failure -> exit 3
    write_text_file(base + "/diverge.cfg",
                    "grid.n = 48\nvelocity.kappa_eta = 8\nvelocity.amplitude = 2.0\n"
                    "solve.kappa_bar = 2\nsolve.method = fixed-point\nsolve.max_iter = 40\n"
                    "ensemble.m = 1\nensemble.fit_lo = 6\nensemble.fit_hi = 16\n");
    rc = std::system((std::string(cli) + " ensemble --config " + base + "/diverge.cfg --out " +
                      base + "/o3 >/dev/null 2>&1")
                         .c_str());
    CHECK(WEXITSTATUS(rc) == 3);

    // verify with a filter runs a subset and succeeds
    rc = std::system((std::string(cli) + " verify --only poincare --out " + base +
                      "/verify >/dev/null 2>&1")
                         .c_str());
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(fs::exists(fs::path(base) / "verify" / "verification.csv"));

    // a drifted baseline constant fails the regression contract -> exit 4
    const char* baseline = std::getenv("BHTLAB_BASELINE");
    REQUIRE(baseline != nullptr);
    if (fs::exists(baseline)) {
        std::string b = read_text_file(baseline);
        const auto pos = b.find("\"agmon.u\": ");
        REQUIRE(pos != std::string::npos);
        b.replace(pos, 11, "\"agmon.u\": 9");
        write_text_file(base + "/drifted.json", b);
        rc = std::system((std::string(cli) + " verify --only agmon --baseline " + base +
                          "/drifted.json --out " + base + "/verify2 >/dev/null 2>&1")
                             .c_str());
        CHECK(WEXITSTATUS(rc) == 4);
    }
}
