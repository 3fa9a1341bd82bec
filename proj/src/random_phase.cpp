#include "bhtlab/random_phase.hpp"

#include <cmath>

namespace bhtlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t zigzag(int v) {
    return (std::uint64_t(std::uint32_t(v)) << 1) ^ std::uint64_t(std::uint32_t(v >> 31));
}
}  // namespace

double mode_phase(std::uint64_t seed, int k1, int k2) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (zigzag(k1) | (zigzag(k2) << 32)));
    // 53-bit uniform in [0,1)
    return kTwoPi * (double(h >> 11) * 0x1p-53);
}

std::uint64_t derive_seed(std::uint64_t base_seed, int member) {
    return mix64(base_seed ^ mix64(0x5eedull + std::uint64_t(member)));
}

RandomPhaseField sample_phases(std::uint64_t seed, const Lattice& lat, double frozen_below) {
    RandomPhaseField p;
    p.lat = lat;
    p.seed = seed;
    p.frozen_below = frozen_below;
    const int e = lat.extent();
    p.zeta = Eigen::ArrayXXd::Zero(e, e);
    p.x = Eigen::ArrayXXcd::Zero(e, e);
    const int h = lat.half;
    const double fb2 = frozen_below * frozen_below;
    for (int k2 = 0; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (!(k2 > 0 || k1 > 0)) continue;  // half lattice: l > 0, or l = 0 and k > 0
            const double kk = double(k1) * k1 + double(k2) * k2;
            const std::uint64_t key = (frozen_below > 0.0 && kk < fb2) ? 0ull : seed;
            const double z = mode_phase(key, k1, k2);
            p.zeta(k1 + h, k2 + h) = z;
            const Complex v = std::polar(1.0, z);
            p.x(k1 + h, k2 + h) = v;
            p.x(-k1 + h, -k2 + h) = std::conj(v);
        }
    return p;
}

}  // namespace bhtlab
