#include "pdeconv/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fft.hpp"
#include "pdeconv/errors.hpp"
#include "pdeconv/vector_ops.hpp"

namespace pdeconv {

LinearOperator::LinearOperator(std::size_t in_dim, std::size_t out_dim, Map apply, Map adjoint,
                               double spectral_bound, std::string name)
    : state_(std::make_shared<const State>(State{in_dim, out_dim, std::move(apply),
                                                 std::move(adjoint), spectral_bound,
                                                 std::move(name)})) {
    if (in_dim == 0 || out_dim == 0) throw InvalidArgument("operator dimensions must be positive");
    if (!(spectral_bound >= 0.0)) throw InvalidArgument("spectral bound must be non-negative");
}

Vector LinearOperator::apply(std::span<const double> x) const {
    Vector out(out_dim());
    apply_into(x, out);
    return out;
}

Vector LinearOperator::adjoint(std::span<const double> u) const {
    Vector out(in_dim());
    adjoint_into(u, out);
    return out;
}

void LinearOperator::apply_into(std::span<const double> x, std::span<double> out) const {
    if (x.size() != in_dim()) throw DimensionError(name() + " apply input", in_dim(), x.size());
    if (out.size() != out_dim())
        throw DimensionError(name() + " apply output", out_dim(), out.size());
    state_->apply(x, out);
}

void LinearOperator::adjoint_into(std::span<const double> u, std::span<double> out) const {
    if (u.size() != out_dim()) throw DimensionError(name() + " adjoint input", out_dim(), u.size());
    if (out.size() != in_dim())
        throw DimensionError(name() + " adjoint output", in_dim(), out.size());
    state_->adjoint(u, out);
}

LinearOperator LinearOperator::transposed() const {
    return LinearOperator(out_dim(), in_dim(), state_->adjoint, state_->apply, spectral_bound(),
                          name() + "^T");
}

AffineOperator::AffineOperator(LinearOperator f, Vector y) : linear(std::move(f)), shift(std::move(y)) {
    require_size(shift, linear.out_dim(), "affine shift");
}

AffineOperator::AffineOperator(LinearOperator f)
    : linear(std::move(f)), shift(linear.out_dim(), 0.0) {}

Vector AffineOperator::operator()(std::span<const double> x) const {
    Vector out = linear.apply(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= shift[i];
    return out;
}

LinearOperator make_identity(std::size_t n) {
    auto copy = [](std::span<const double> x, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
    };
    return LinearOperator(n, n, copy, copy, 1.0, "identity");
}

LinearOperator make_zero(std::size_t in_dim, std::size_t out_dim) {
    auto zero = [](std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    return LinearOperator(in_dim, out_dim, zero, zero, 0.0, "zero");
}

LinearOperator make_diagonal(Vector diag) {
    if (diag.empty()) throw InvalidArgument("diagonal operator needs at least one entry");
    double bound = 0.0;
    for (double d : diag) bound = std::max(bound, std::abs(d));
    auto d = std::make_shared<const Vector>(std::move(diag));
    auto mul = [d](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = (*d)[i] * x[i];
    };
    return LinearOperator(d->size(), d->size(), mul, mul, bound, "diagonal");
}

LinearOperator make_scaled(const LinearOperator& op, double factor) {
    auto fwd = [op, factor](std::span<const double> x, std::span<double> out) {
        op.apply_into(x, out);
        for (double& v : out) v *= factor;
    };
    auto adj = [op, factor](std::span<const double> u, std::span<double> out) {
        op.adjoint_into(u, out);
        for (double& v : out) v *= factor;
    };
    return LinearOperator(op.in_dim(), op.out_dim(), fwd, adj,
                          std::abs(factor) * op.spectral_bound(), op.name() + "*s");
}

LinearOperator compose(const LinearOperator& outer, const LinearOperator& inner) {
    if (outer.in_dim() != inner.out_dim())
        throw DimensionError("compose " + outer.name() + " o " + inner.name(), outer.in_dim(),
                             inner.out_dim());
    auto fwd = [outer, inner](std::span<const double> x, std::span<double> out) {
        outer.apply_into(inner.apply(x), out);
    };
    auto adj = [outer, inner](std::span<const double> u, std::span<double> out) {
        inner.adjoint_into(outer.adjoint(u), out);
    };
    return LinearOperator(inner.in_dim(), outer.out_dim(), fwd, adj,
                          outer.spectral_bound() * inner.spectral_bound(),
                          outer.name() + "*" + inner.name());
}

Kernel Kernel::centered(Image taps) {
    const int ox = taps.width() / 2;
    const int oy = taps.height() / 2;
    return with_origin(std::move(taps), ox, oy);
}

Kernel Kernel::with_origin(Image taps, int origin_x, int origin_y) {
    if (taps.empty()) throw InvalidArgument("kernel has no taps");
    if (origin_x < 0 || origin_x >= taps.width() || origin_y < 0 || origin_y >= taps.height())
        throw InvalidArgument("kernel origin lies outside the kernel");
    return Kernel{std::move(taps), origin_x, origin_y};
}

Kernel make_box_kernel(int size) {
    if (size <= 0) throw InvalidArgument("box kernel size must be positive");
    const double v = 1.0 / (static_cast<double>(size) * size);
    return Kernel::centered(Image(size, size, v));
}

namespace {

void check_kernel_fits(const Kernel& psf, int width, int height) {
    if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
    if (psf.taps.width() > width)
        throw DimensionError("psf width exceeds image width", static_cast<std::size_t>(width),
                             static_cast<std::size_t>(psf.taps.width()));
    if (psf.taps.height() > height)
        throw DimensionError("psf height exceeds image height", static_cast<std::size_t>(height),
                             static_cast<std::size_t>(psf.taps.height()));
}

int wrap(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

} // namespace

LinearOperator make_circular_convolution(const Kernel& psf, int width, int height) {
    check_kernel_fits(psf, width, height);
    const std::size_t n = static_cast<std::size_t>(width) * height;

    // Embed the kernel on the full grid with its origin at (0, 0).
    Vector embedded(n, 0.0);
    for (int ky = 0; ky < psf.taps.height(); ++ky)
        for (int kx = 0; kx < psf.taps.width(); ++kx) {
            const int x = wrap(kx - psf.origin_x, width);
            const int y = wrap(ky - psf.origin_y, height);
            embedded[static_cast<std::size_t>(y) * width + x] += psf.taps.at(kx, ky);
        }

    struct Conv {
        detail::RealFft2d fft;
        detail::Spectrum transfer;
        Conv(int w, int h) : fft(w, h) {}
    };
    auto conv = std::make_shared<Conv>(width, height);
    conv->transfer = conv->fft.forward(embedded);

    double bound = 0.0;
    for (const auto& c : conv->transfer) bound = std::max(bound, std::abs(c));

    std::shared_ptr<const Conv> shared = conv;
    auto fwd = [shared](std::span<const double> x, std::span<double> out) {
        const Vector r = shared->fft.filter(x, shared->transfer, false);
        std::copy(r.begin(), r.end(), out.begin());
    };
    auto adj = [shared](std::span<const double> u, std::span<double> out) {
        const Vector r = shared->fft.filter(u, shared->transfer, true);
        std::copy(r.begin(), r.end(), out.begin());
    };
    return LinearOperator(n, n, fwd, adj, bound, "circular_convolution");
}

Vector circular_convolve_direct(const Kernel& psf, int width, int height,
                                std::span<const double> x) {
    check_kernel_fits(psf, width, height);
    require_size(x, static_cast<std::size_t>(width) * height, "direct convolution input");
    Vector out(x.size(), 0.0);
    for (int y = 0; y < height; ++y)
        for (int xx = 0; xx < width; ++xx) {
            double s = 0.0;
            for (int ky = 0; ky < psf.taps.height(); ++ky)
                for (int kx = 0; kx < psf.taps.width(); ++kx) {
                    const int sx = wrap(xx - (kx - psf.origin_x), width);
                    const int sy = wrap(y - (ky - psf.origin_y), height);
                    s += psf.taps.at(kx, ky) * x[static_cast<std::size_t>(sy) * width + sx];
                }
            out[static_cast<std::size_t>(y) * width + xx] = s;
        }
    return out;
}

double estimate_spectral_norm(const LinearOperator& op, double tol, int max_iter,
                              std::uint64_t seed) {
    if (!(tol > 0.0)) throw InvalidArgument("spectral norm tolerance must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Vector v(op.in_dim());
    for (double& e : v) e = gauss(rng);
    double nv = norm2(v);
    for (double& e : v) e /= nv;

    double previous = -1.0;
    double sigma = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Vector w = op.adjoint(op.apply(v));
        const double rayleigh = dot(v, w);
        sigma = std::sqrt(std::max(rayleigh, 0.0));
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        // Stop a little inside tol: the Rayleigh quotient approaches from below.
        if (previous >= 0.0 && std::abs(sigma - previous) <= 0.25 * tol * sigma) return sigma;
        previous = sigma;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
    }
    throw ConvergenceError("spectral norm power iteration did not converge", sigma, max_iter);
}

} // namespace pdeconv
