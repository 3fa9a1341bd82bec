#pragma once

#include <vector>

#include "bhtlab/spectral_field.hpp"

namespace bhtlab {

/// Band-limited zero-mean source: coefficients on 1 <= |k| < kappa_g only.
struct SourceSpec {
    struct ModeCoeff {
        int k1 = 0, k2 = 0;
        Complex value;
    };

    int kappa_g = 2;
    std::vector<ModeCoeff> coeffs;  ///< half-lattice entries; conjugates implied

    /// Every shell below kappa_g carries unit coefficient power, split evenly
    /// over its modes with real coefficients.
    static SourceSpec unit_shells(int kappa_g);

    SpectralField build(const Lattice& lat) const;
    void validate() const;
};

}  // namespace bhtlab
