#pragma once

#include <map>
#include <string>
#include <vector>

#include "bhtlab/ensemble.hpp"

namespace bhtlab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat typed key-value configuration ("section.key = value" lines, '#'
/// comments). Unknown or duplicate keys are errors; every cross-field rule
/// from the numerical modules is re-checked at parse time.
struct RunConfig {
    EnsembleConfig ensemble;
    double c_prime = 1.0;
    std::string out_dir;
    std::vector<std::pair<std::string, std::string>> echo;  ///< parsed keys in file order

    static RunConfig from_file(const std::string& path);
    static RunConfig from_string(const std::string& text);

    /// Defaults used by the acceptance and smoke configurations.
    static RunConfig defaults();
};

}  // namespace bhtlab
