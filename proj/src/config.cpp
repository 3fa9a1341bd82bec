#include "bhtlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bhtlab {

namespace {
std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

SourceSpec load_source_file(const std::string& path, int kappa_g) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open source.file '" + path + "'");
    SourceSpec s;
    s.kappa_g = kappa_g;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        SourceSpec::ModeCoeff m;
        double re = 0, im = 0;
        if (!(ls >> m.k1 >> m.k2 >> re >> im))
            throw ConfigError("config: bad source coefficient line '" + line + "'");
        m.value = Complex(re, im);
        s.coeffs.push_back(m);
    }
    return s;
}
}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.ensemble.n_grid = 64;
    c.ensemble.realizations = 8;
    c.ensemble.base_seed = 1;
    c.ensemble.velocity = VelocityParams::kraichnan(1.0, 16);
    c.ensemble.source = SourceSpec::unit_shells(2);
    c.ensemble.solve.kappa_bar = 3.0;
    c.ensemble.solve.tol = 1e-9;
    c.out_dir = "out";
    return c;
}

RunConfig RunConfig::from_string(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::vector<std::pair<std::string, std::string>> order;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not 'section.key = value': '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config: empty key or value on line " + std::to_string(lineno));
        if (kv.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
        kv[key] = val;
        order.emplace_back(key, val);
    }

    RunConfig c = defaults();
    c.echo = order;
    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("grid.n"); !v.empty()) c.ensemble.n_grid = int(to_long("grid.n", v));

    std::string family = take("velocity.family");
    const double amp = [&] {
        auto v = take("velocity.amplitude");
        return v.empty() ? 1.0 : to_double("velocity.amplitude", v);
    }();
    if (family == "steep") {
        auto b = take("velocity.beta");
        if (b.empty()) throw ConfigError("config: velocity.family = steep requires velocity.beta");
        c.ensemble.velocity = VelocityParams::steep(amp, to_double("velocity.beta", b));
        if (auto ke = take("velocity.kappa_eta"); !ke.empty())
            throw ConfigError("config: velocity.kappa_eta applies to the kraichnan family only");
    } else if (family == "kraichnan" || family.empty()) {
        auto ke = take("velocity.kappa_eta");
        const int kappa_eta = ke.empty() ? 16 : int(to_long("velocity.kappa_eta", ke));
        c.ensemble.velocity = VelocityParams::kraichnan(amp, kappa_eta);
        if (auto b = take("velocity.beta"); !b.empty() && to_double("velocity.beta", b) != -2.0)
            throw ConfigError("config: velocity.beta must be -2 for the kraichnan family");
    } else {
        throw ConfigError("config: velocity.family must be 'steep' or 'kraichnan', got '" +
                          family + "'");
    }

    const int kappa_g = [&] {
        auto v = take("source.kappa_g");
        return v.empty() ? 2 : int(to_long("source.kappa_g", v));
    }();
    std::string source_kind = take("source.kind");
    std::string source_file = take("source.file");
    if (!source_file.empty()) {
        c.ensemble.source = load_source_file(source_file, kappa_g);
    } else if (source_kind.empty() || source_kind == "unit-shells") {
        c.ensemble.source = SourceSpec::unit_shells(kappa_g);
    } else {
        throw ConfigError("config: source.kind must be 'unit-shells' (or give source.file)");
    }

    if (auto v = take("solve.tol"); !v.empty()) c.ensemble.solve.tol = to_double("solve.tol", v);
    if (auto v = take("solve.max_iter"); !v.empty())
        c.ensemble.solve.max_iter = int(to_long("solve.max_iter", v));
    if (auto v = take("solve.method"); !v.empty()) {
        if (v == "krylov")
            c.ensemble.solve.method = SolveMethod::krylov;
        else if (v == "fixed-point")
            c.ensemble.solve.method = SolveMethod::fixed_point;
        else
            throw ConfigError("config: solve.method must be 'krylov' or 'fixed-point'");
    }
    if (auto v = take("solve.kappa_bar"); !v.empty())
        c.ensemble.solve.kappa_bar = to_double("solve.kappa_bar", v);
    if (auto v = take("solve.n_max"); !v.empty())
        c.ensemble.solve.n_max = int(to_long("solve.n_max", v));
    if (auto v = take("solve.picard_stop_rel"); !v.empty())
        c.ensemble.solve.picard_stop_rel = to_double("solve.picard_stop_rel", v);
    if (auto v = take("solve.restart"); !v.empty())
        c.ensemble.solve.restart = int(to_long("solve.restart", v));

    if (auto v = take("ensemble.m"); !v.empty())
        c.ensemble.realizations = int(to_long("ensemble.m", v));
    if (auto v = take("ensemble.base_seed"); !v.empty()) {
        try {
            std::size_t pos = 0;
            c.ensemble.base_seed = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError("config: key 'ensemble.base_seed' expects a 64-bit unsigned "
                              "integer, got '" + v + "'");
        }
    }
    if (auto v = take("ensemble.frozen_below"); !v.empty()) {
        if (v == "auto")
            c.ensemble.frozen_below = -1.0;
        else if (v == "none")
            c.ensemble.frozen_below = 0.0;
        else
            c.ensemble.frozen_below = to_double("ensemble.frozen_below", v);
    }
    if (auto v = take("ensemble.fit_lo"); !v.empty())
        c.ensemble.fit_lo = to_double("ensemble.fit_lo", v);
    if (auto v = take("ensemble.fit_hi"); !v.empty())
        c.ensemble.fit_hi = to_double("ensemble.fit_hi", v);
    if (auto v = take("ensemble.full_decomposition"); !v.empty())
        c.ensemble.full_decomposition = to_bool("ensemble.full_decomposition", v);
    if (auto v = take("ensemble.threads"); !v.empty())
        c.ensemble.threads = int(to_long("ensemble.threads", v));

    if (auto v = take("constants.c_prime"); !v.empty())
        c.c_prime = to_double("constants.c_prime", v);
    if (auto v = take("run.out_dir"); !v.empty()) c.out_dir = v;

    if (!kv.empty()) {
        std::string unknown;
        for (auto& [k, _] : kv) unknown += (unknown.empty() ? "" : ", ") + k;
        throw ConfigError("config: unknown key(s): " + unknown);
    }

    // cross-field validity with actionable wording
    try {
        c.ensemble.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.c_prime <= 0.0) throw ConfigError("config: constants.c_prime must be positive");
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

}  // namespace bhtlab
