#include "bhtlab/velocity.hpp"

#include <cmath>
#include <stdexcept>

namespace bhtlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

VelocityParams VelocityParams::steep(double amplitude, double beta) {
    VelocityParams p;
    p.family = Family::steep;
    p.amplitude = amplitude;
    p.beta = beta;
    return p;
}

VelocityParams VelocityParams::kraichnan(double amplitude, int kappa_eta) {
    VelocityParams p;
    p.family = Family::kraichnan;
    p.amplitude = amplitude;
    p.beta = -2.0;
    p.kappa_eta = kappa_eta;
    return p;
}

int VelocityParams::m_beta() const { return static_cast<int>(std::ceil(-2.0 * beta - 1.0)); }

void VelocityParams::validate(const Lattice& lat) const {
    if (amplitude <= 0.0) throw std::invalid_argument("velocity: amplitude must be positive");
    if (family == Family::steep) {
        if (!(beta < -2.0)) throw std::invalid_argument("velocity: steep family requires beta < -2");
    } else {
        if (beta != -2.0) throw std::invalid_argument("velocity: cutoff family fixes beta = -2");
        if (kappa_eta < 4) throw std::invalid_argument("velocity: kappa_eta must be >= 4");
        if (kappa_eta > lat.kappa_max)
            throw std::invalid_argument("velocity: kappa_eta exceeds the trusted shell range of this lattice");
    }
}

double velocity_mode_power(const VelocityParams& p, const Lattice& lat, int k1, int k2) {
    if (!lat.retained(k1, k2)) return 0.0;
    const double kk = double(k1) * k1 + double(k2) * k2;
    if (p.family == VelocityParams::Family::kraichnan && kk >= double(p.kappa_eta) * p.kappa_eta)
        return 0.0;
    return p.amplitude * p.amplitude * std::pow(kk, p.beta);
}

VectorField build_velocity(const VelocityParams& p, const RandomPhaseField& phases) {
    const Lattice& lat = phases.lat;
    p.validate(lat);
    VectorField u(lat);
    const int h = lat.half;
    const double hi2 = (p.family == VelocityParams::Family::kraichnan)
                           ? double(p.kappa_eta) * p.kappa_eta
                           : kInf;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const double kk = double(k1) * k1 + double(k2) * k2;
            if (kk >= hi2) continue;
            const Complex amp = Complex(0, 1) * p.amplitude * std::pow(kk, 0.5 * (p.beta - 1.0)) *
                                phases.value(k1, k2);
            u.x.at(k1, k2) = -double(k2) * amp;  // kperp = (-k2, k1)
            u.y.at(k1, k2) = double(k1) * amp;
        }
    return u;
}

// ----------------------------------------------------------------------------
// VelocityAnalysis
// ----------------------------------------------------------------------------

namespace {
// sum over the retained support of |u_k|^2 * |k|^{2*extra}, restricted to |k| >= kappa
double support_sum(const VelocityParams& p, const Lattice& lat, double kappa, int extra) {
    const int h = lat.half;
    const double lo2 = kappa * kappa;
    double acc = 0.0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            const double kk = double(k1) * k1 + double(k2) * k2;
            if (kk < lo2 || kk == 0.0) continue;
            const double pw = velocity_mode_power(p, lat, k1, k2);
            if (pw == 0.0) continue;
            double w = 1.0;
            for (int i = 0; i < extra; ++i) w *= kk;
            acc += pw * w;
        }
    return acc;
}
}  // namespace

double VelocityAnalysis::l2_exact() const {
    return kTwoPi * std::sqrt(support_sum(p_, lat_, 0.0, 0));
}

double VelocityAnalysis::l2_tail(double kappa) const {
    return kTwoPi * std::sqrt(support_sum(p_, lat_, kappa, 0));
}

double VelocityAnalysis::h1_exact() const {
    return kTwoPi * std::sqrt(support_sum(p_, lat_, 0.0, 1));
}

double VelocityAnalysis::l1_fourier_exact() const {
    const int h = lat_.half;
    double acc = 0.0;
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            acc += std::sqrt(velocity_mode_power(p_, lat_, k1, k2));
        }
    return acc;
}

double VelocityAnalysis::l2_continuum() const { return l2_tail_continuum(1.0); }

double VelocityAnalysis::l2_tail_continuum(double kappa) const {
    const double u2 = p_.amplitude * p_.amplitude;
    const double c = kTwoPi * kTwoPi * kTwoPi * u2;
    if (p_.family == VelocityParams::Family::kraichnan) {
        const double ke = p_.kappa_eta;
        if (kappa >= ke) return 0.0;
        return std::sqrt(c * 0.5 * (1.0 / (kappa * kappa) - 1.0 / (ke * ke)));
    }
    // integral of r^{2 beta + 1} from kappa: kappa^{2 beta + 2} / (-2 beta - 2)
    const double e = 2.0 * p_.beta + 2.0;
    return std::sqrt(c * std::pow(kappa, e) / (-e));
}

}  // namespace bhtlab
