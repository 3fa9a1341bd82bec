#include "bhtlab/source.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace bhtlab {

SourceSpec SourceSpec::unit_shells(int kappa_g) {
    if (kappa_g < 2) throw std::invalid_argument("source: kappa_g must be >= 2");
    SourceSpec s;
    s.kappa_g = kappa_g;
    // count modes per shell first (full lattice count, both half-planes)
    std::map<int, int> counts;
    for (int k2 = -kappa_g; k2 <= kappa_g; ++k2)
        for (int k1 = -kappa_g; k1 <= kappa_g; ++k1) {
            const long kk = long(k1) * k1 + long(k2) * k2;
            if (kk == 0 || kk >= long(kappa_g) * kappa_g) continue;
            counts[int(std::sqrt(double(kk)))] += 1;
        }
    for (int k2 = 0; k2 <= kappa_g; ++k2)
        for (int k1 = -kappa_g; k1 <= kappa_g; ++k1) {
            if (!(k2 > 0 || k1 > 0)) continue;
            const long kk = long(k1) * k1 + long(k2) * k2;
            if (kk >= long(kappa_g) * kappa_g) continue;
            const int shell = int(std::sqrt(double(kk)));
            s.coeffs.push_back({k1, k2, Complex(1.0 / std::sqrt(double(counts[shell])), 0.0)});
        }
    return s;
}

void SourceSpec::validate() const {
    if (kappa_g < 2) throw std::invalid_argument("source: kappa_g must be >= 2");
    for (const auto& m : coeffs) {
        const long kk = long(m.k1) * m.k1 + long(m.k2) * m.k2;
        if (kk == 0) throw std::invalid_argument("source: zero mode not allowed");
        if (kk >= long(kappa_g) * kappa_g)
            throw std::invalid_argument("source: coefficient outside the band |k| < kappa_g");
    }
}

SpectralField SourceSpec::build(const Lattice& lat) const {
    validate();
    if (kappa_g > lat.half + 1)
        throw std::invalid_argument("source: band limit exceeds the lattice");
    SpectralField g(lat);
    for (const auto& m : coeffs) g.set_pair(m.k1, m.k2, m.value);
    g.zero_mean();
    return g;
}

}  // namespace bhtlab
