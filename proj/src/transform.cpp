#include "bhtlab/transform.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace bhtlab {

// ============================================================================
// Fft2D
// ============================================================================

struct Fft2D::Impl {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd row_in, row_out;
};

Fft2D::Fft2D(int n) : n_(n), impl_(std::make_unique<Impl>()) {
    if (n < 2) throw std::invalid_argument("Fft2D: n must be >= 2");
    impl_->row_in.resize(n);
    impl_->row_out.resize(n);
}

Fft2D::~Fft2D() = default;
Fft2D::Fft2D(Fft2D&&) noexcept = default;
Fft2D& Fft2D::operator=(Fft2D&&) noexcept = default;

void Fft2D::fwd(Eigen::MatrixXcd& a) {
    auto& im = *impl_;
    for (int j = 0; j < n_; ++j) {
        im.row_in = a.col(j);
        im.fft.fwd(im.row_out, im.row_in);
        a.col(j) = im.row_out;
    }
    for (int i = 0; i < n_; ++i) {
        im.row_in = a.row(i).transpose();
        im.fft.fwd(im.row_out, im.row_in);
        a.row(i) = im.row_out.transpose();
    }
}

void Fft2D::inv(Eigen::MatrixXcd& a) {
    // Eigen's inv scales by 1/n per axis; undo it so fwd/inv are both
    // unnormalized sums and the caller owns all scaling.
    auto& im = *impl_;
    for (int j = 0; j < n_; ++j) {
        im.row_in = a.col(j);
        im.fft.inv(im.row_out, im.row_in);
        a.col(j) = im.row_out * double(n_);
    }
    for (int i = 0; i < n_; ++i) {
        im.row_in = a.row(i).transpose();
        im.fft.inv(im.row_out, im.row_in);
        a.row(i) = im.row_out.transpose() * double(n_);
    }
}

// ============================================================================
// TransformEngine
// ============================================================================

int fft_friendly_size(int lo) {
    int best = -1;
    for (int p3 = 1; p3 <= lo * 3; p3 *= 3) {
        int p = p3;
        while (p < lo) p *= 2;
        if (best < 0 || p < best) best = p;
    }
    return best;
}

namespace {
void scatter(const SpectralField& f, Eigen::MatrixXcd& grid, int pad) {
    grid.setZero(pad, pad);
    const int h = f.lat.half;
    for (int k2 = -h; k2 <= h; ++k2) {
        const int j = (k2 + pad) % pad;
        for (int k1 = -h; k1 <= h; ++k1) {
            const int i = (k1 + pad) % pad;
            grid(i, j) = f.at(k1, k2);
        }
    }
}

void gather(const Eigen::MatrixXcd& grid, SpectralField& f, int pad, double scale) {
    const int h = f.lat.half;
    for (int k2 = -h; k2 <= h; ++k2) {
        const int j = (k2 + pad) % pad;
        for (int k1 = -h; k1 <= h; ++k1) {
            const int i = (k1 + pad) % pad;
            f.at(k1, k2) = grid(i, j) * scale;
        }
    }
    f.zero_mean();
}
}  // namespace

TransformEngine::TransformEngine(const Lattice& lat)
    : lat_(lat), pad_(fft_friendly_size(3 * lat.half + 1)), fft_(pad_) {}

void TransformEngine::to_grid(const SpectralField& f, Eigen::MatrixXcd& grid) {
    scatter(f, grid, pad_);
    fft_.inv(grid);
}

void TransformEngine::to_coeffs(const Eigen::MatrixXcd& grid, SpectralField& f) {
    buf_b_ = grid;
    fft_.fwd(buf_b_);
    f = SpectralField(lat_);
    gather(buf_b_, f, pad_, 1.0 / (double(pad_) * pad_));
}

SpectralField TransformEngine::product(const SpectralField& a, const SpectralField& b) {
    if (a.lat != lat_ || b.lat != lat_) throw std::invalid_argument("product: lattice mismatch");
    to_grid(a, buf_a_);
    Eigen::MatrixXcd bg;
    to_grid(b, bg);
    buf_a_.array() *= bg.array();
    SpectralField out(lat_);
    fft_.fwd(buf_a_);
    gather(buf_a_, out, pad_, 1.0 / (double(pad_) * pad_));
    enforce_hermitian(out);
    return out;
}

SpectralField TransformEngine::advect(const VectorField& u, const SpectralField& f) {
    AdvectionOperator op(u, *this);
    return op.apply(f);
}

// ============================================================================
// AdvectionOperator
// ============================================================================

AdvectionOperator::AdvectionOperator(const VectorField& u, TransformEngine& engine)
    : engine_(&engine), df_(engine.lattice()) {
    if (u.lat() != engine.lattice()) throw std::invalid_argument("advect: lattice mismatch");
    engine.to_grid(u.x, ux_grid_);
    engine.to_grid(u.y, uy_grid_);
}

void AdvectionOperator::apply(const SpectralField& f, SpectralField& out) {
    const Lattice& lat = engine_->lattice();
    if (f.lat != lat) throw std::invalid_argument("advect: lattice mismatch");
    const int h = lat.half;
    // d1 f
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            df_.at(k1, k2) = Complex(0, 1) * double(k1) * f.at(k1, k2);
    engine_->to_grid(df_, work_);
    work_.array() *= ux_grid_.array();
    // d2 f
    for (int k2 = -h; k2 <= h; ++k2)
        for (int k1 = -h; k1 <= h; ++k1)
            df_.at(k1, k2) = Complex(0, 1) * double(k2) * f.at(k1, k2);
    engine_->to_grid(df_, work2_);
    work_.array() += work2_.array() * uy_grid_.array();

    engine_->fft_.fwd(work_);
    if (out.lat != lat) out = SpectralField(lat);
    const int pad = engine_->pad_;
    const double scale = 1.0 / (double(pad) * pad);
    for (int k2 = -h; k2 <= h; ++k2) {
        const int j = (k2 + pad) % pad;
        for (int k1 = -h; k1 <= h; ++k1) {
            const int i = (k1 + pad) % pad;
            out.at(k1, k2) = work_(i, j) * scale;
        }
    }
    enforce_hermitian(out);
}

SpectralField AdvectionOperator::apply(const SpectralField& f) {
    SpectralField out(engine_->lattice());
    apply(f, out);
    return out;
}

// ============================================================================
// Grid norms
// ============================================================================

namespace {
Eigen::MatrixXcd eval_grid(const SpectralField& f, int factor) {
    const int lo = factor * (2 * f.lat.half + 1);
    const int n = fft_friendly_size(lo);
    Fft2D fft(n);
    Eigen::MatrixXcd grid;
    scatter(f, grid, n);
    fft.inv(grid);
    return grid;
}
}  // namespace

double sup_on_grid(const SpectralField& f, int factor) {
    return eval_grid(f, factor).array().abs().real().maxCoeff();
}

double sup_on_grid(const VectorField& u, int factor) {
    Eigen::MatrixXcd gx = eval_grid(u.x, factor);
    Eigen::MatrixXcd gy = eval_grid(u.y, factor);
    return (gx.array().abs2() + gy.array().abs2()).real().sqrt().maxCoeff();
}

double max_imag_on_grid(const SpectralField& f, int factor) {
    return eval_grid(f, factor).array().imag().abs().maxCoeff();
}

FieldNorms norms(const SpectralField& f) {
    FieldNorms n;
    n.l2 = norm_l2(f);
    n.h1 = norm_h1(f);
    n.h2 = norm_h2(f);
    n.l1_fourier = norm_l1_fourier(f);
    n.linf = sup_on_grid(f, 2);
    n.w1inf = sup_on_grid(gradient(f), 2);
    return n;
}

SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
    TransformEngine engine(a.lat);
    return engine.product(a, b);
}

SpectralField advect(const VectorField& u, const SpectralField& f) {
    TransformEngine engine(u.lat());
    return engine.advect(u, f);
}

}  // namespace bhtlab
