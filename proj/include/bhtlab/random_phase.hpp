#pragma once

#include <cstdint>

#include "bhtlab/spectral_field.hpp"

namespace bhtlab {

/// Unit-modulus random phases X_k = exp(i zeta_k) with zeta_k ~ U[0, 2pi),
/// drawn per half-lattice mode from a counter-based generator keyed by
/// (seed, k). X_{-k} = conj(X_k) keeps synthesized fields real. Phases are
/// reproducible mode-by-mode, independent of iteration order and lattice size.
struct RandomPhaseField {
    Lattice lat;
    std::uint64_t seed = 0;
    double frozen_below = 0.0;  ///< modes with |k| < frozen_below use key (0, k)
    Eigen::ArrayXXd zeta;       ///< phase at (k1+half, k2+half), half-lattice entries only
    Eigen::ArrayXXcd x;         ///< full X grid with the reality constraint applied

    double phase(int k1, int k2) const { return zeta(k1 + lat.half, k2 + lat.half); }
    Complex value(int k1, int k2) const { return x(k1 + lat.half, k2 + lat.half); }
};

/// Counter-based per-mode phase in [0, 2pi). Key (0, k) is the frozen stream.
double mode_phase(std::uint64_t seed, int k1, int k2);

/// Realization seed for ensemble member m.
std::uint64_t derive_seed(std::uint64_t base_seed, int member);

/// Sample phases for every retained half-lattice mode. Modes with
/// |k| < frozen_below are drawn from the fixed key (0, k) so they agree
/// across seeds (frozen low-mode ensembles).
RandomPhaseField sample_phases(std::uint64_t seed, const Lattice& lat, double frozen_below = 0.0);

}  // namespace bhtlab
