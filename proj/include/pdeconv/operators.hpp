#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "pdeconv/image.hpp"

namespace pdeconv {

/// Immutable linear map R^in -> R^out with its adjoint and an upper bound on
/// the operator norm. Copies share the underlying implementation.
class LinearOperator {
public:
    using Map = std::function<void(std::span<const double>, std::span<double>)>;

    LinearOperator(std::size_t in_dim, std::size_t out_dim, Map apply, Map adjoint,
                   double spectral_bound, std::string name = "linear");

    std::size_t in_dim() const noexcept { return state_->in_dim; }
    std::size_t out_dim() const noexcept { return state_->out_dim; }
    double spectral_bound() const noexcept { return state_->spectral_bound; }
    const std::string& name() const noexcept { return state_->name; }

    Vector apply(std::span<const double> x) const;
    Vector adjoint(std::span<const double> u) const;

    void apply_into(std::span<const double> x, std::span<double> out) const;
    void adjoint_into(std::span<const double> u, std::span<double> out) const;

    /// Same operator with roles swapped: apply becomes the adjoint.
    LinearOperator transposed() const;

private:
    struct State {
        std::size_t in_dim;
        std::size_t out_dim;
        Map apply;
        Map adjoint;
        double spectral_bound;
        std::string name;
    };
    std::shared_ptr<const State> state_;
};

/// x -> F x - shift
struct AffineOperator {
    LinearOperator linear;
    Vector shift;

    AffineOperator(LinearOperator f, Vector y);
    explicit AffineOperator(LinearOperator f);

    Vector operator()(std::span<const double> x) const;
};

/// Frame / spectral bounds on F^T F, i.e. c1 ||x||^2 <= ||F x||^2 <= c2 ||x||^2.
struct FrameBounds {
    double lower;
    double upper;
};

LinearOperator make_identity(std::size_t n);
LinearOperator make_zero(std::size_t in_dim, std::size_t out_dim);
LinearOperator make_diagonal(Vector diag);
LinearOperator make_scaled(const LinearOperator& op, double factor);
/// outer ∘ inner
LinearOperator compose(const LinearOperator& outer, const LinearOperator& inner);

/// Convolution kernel with an explicit origin: tap (origin_x, origin_y) is lag 0.
struct Kernel {
    Image taps;
    int origin_x = 0;
    int origin_y = 0;

    /// Origin at the center pixel (floor(w/2), floor(h/2)).
    static Kernel centered(Image taps);
    static Kernel with_origin(Image taps, int origin_x, int origin_y);
};

/// size x size moving average, entries 1/size^2, centered.
Kernel make_box_kernel(int size);

/// Periodic 2-D convolution on a width x height raster, evaluated with FFTs.
/// spectral_bound is the max modulus of the kernel's DFT on that grid.
LinearOperator make_circular_convolution(const Kernel& psf, int width, int height);

/// Reference O(n * taps) periodic convolution used to cross-check the FFT path.
Vector circular_convolve_direct(const Kernel& psf, int width, int height,
                                std::span<const double> x);

/// sigma with |sigma - ||op||| <= tol ||op||, by power iteration on op^T op.
/// Throws ConvergenceError (carrying the last estimate) after max_iter steps.
double estimate_spectral_norm(const LinearOperator& op, double tol = 1e-6, int max_iter = 1000,
                              std::uint64_t seed = 0);

} // namespace pdeconv
