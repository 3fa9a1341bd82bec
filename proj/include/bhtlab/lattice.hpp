#pragma once

#include <stdexcept>

namespace bhtlab {

/// Truncated zero-mean Fourier lattice on the 2D torus [0,2pi]^2.
///
/// A grid with n modes per axis retains wavenumbers k != 0 with
/// |k1|, |k2| <= half, where half = n/2 - 1: the unmatched Nyquist line is
/// dropped so the retained set is closed under k -> -k. Shell-indexed
/// reports are trusted up to kappa_max = floor(n/3).
struct Lattice {
    int n = 0;          ///< modes per axis (even, >= 8)
    int half = 0;       ///< largest retained |k_i|
    int kappa_max = 0;  ///< largest trusted integer shell

    Lattice() = default;
    explicit Lattice(int n_modes) : n(n_modes) {
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("Lattice: n must be even and >= 8");
        half = n / 2 - 1;
        kappa_max = n / 3;
    }

    /// Storage points per axis (coefficients live on a square extent x extent grid).
    int extent() const { return 2 * half + 1; }
    /// Number of retained (nonzero) modes.
    long modes() const { return static_cast<long>(extent()) * extent() - 1; }

    bool retained(int k1, int k2) const {
        if (k1 == 0 && k2 == 0) return false;
        return k1 >= -half && k1 <= half && k2 >= -half && k2 <= half;
    }

    bool operator==(const Lattice& o) const { return n == o.n; }
    bool operator!=(const Lattice& o) const { return n != o.n; }
};

}  // namespace bhtlab
