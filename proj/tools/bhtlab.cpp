// Command-line front end: reproducible velocity synthesis, tracer solves,
// ensembles, the inequality suite, and plot-ready reports.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 verification failure.

#include <CLI11.hpp>

#include <cstdio>
#include <thread>

#include "bhtlab/io.hpp"

using namespace bhtlab;

namespace {
RunConfig load(const std::string& config_path, int threads) {
    RunConfig cfg = config_path.empty() ? RunConfig::defaults() : RunConfig::from_file(config_path);
    if (threads > 0) cfg.ensemble.threads = threads;
    if (cfg.ensemble.threads <= 0)
        cfg.ensemble.threads = int(std::max(1u, std::thread::hardware_concurrency()));
    return cfg;
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive-tracer spectra on the 2D torus: synthesis, solves, verification"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path, out_dir = "out", run_dir, baseline, only;
    std::uint64_t seed = 1;
    int threads = 0;

    app.add_option("--config", config_path, "flat key-value configuration file");
    app.add_option("--seed", seed, "seed (gen-velocity, solve) or base seed override");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads for ensembles (0 = hardware)");

    auto* gen = app.add_subcommand("gen-velocity", "synthesize one velocity realization");
    auto* solve = app.add_subcommand("solve", "one decomposition solve at the given seed");
    auto* ens = app.add_subcommand("ensemble", "run the configured ensemble");
    auto* verify = app.add_subcommand("verify", "run the inequality and kernel suite");
    verify->add_option("--only", only, "substring filter on check ids");
    verify->add_option("--baseline", baseline, "measured-constant baseline JSON for drift checks");
    auto* report = app.add_subcommand("report", "emit plot-ready tables from a run directory");
    report->add_option("--run", run_dir, "finished run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // bad command line counts as a configuration error
    }

    try {
        if (gen->parsed()) {
            RunConfig cfg = load(config_path, threads);
            const std::string id = cmd_gen_velocity(cfg, seed, out_dir);
            std::printf("gen-velocity: run %s written to %s\n", id.c_str(), out_dir.c_str());
        } else if (solve->parsed()) {
            RunConfig cfg = load(config_path, threads);
            const std::string id = cmd_solve(cfg, seed, out_dir);
            std::printf("solve: run %s written to %s\n", id.c_str(), out_dir.c_str());
        } else if (ens->parsed()) {
            RunConfig cfg = load(config_path, threads);
            if (app.count("--seed")) cfg.ensemble.base_seed = seed;
            const std::string id = cmd_ensemble(cfg, out_dir);
            std::printf("ensemble: run %s written to %s\n", id.c_str(), out_dir.c_str());
        } else if (verify->parsed()) {
            VerificationOptions opt;
            opt.only = only;
            const bool ok = cmd_verify(opt, baseline, out_dir);
            std::printf("verify: %s (reports in %s)\n", ok ? "all checks passed" : "FAILURES",
                        out_dir.c_str());
            if (!ok) return 4;
        } else if (report->parsed()) {
            cmd_report(run_dir, out_dir);
            std::printf("report: tables written to %s\n", out_dir.c_str());
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
