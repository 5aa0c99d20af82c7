#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace pdeconv::detail {

using Spectrum = std::vector<std::complex<double>>;

/// Real-to-complex 2-D FFT of a fixed width x height raster (row-major).
/// The half spectrum has height * (width / 2 + 1) bins. Plans are created once
/// under a global lock; execution uses per-call buffers and is reentrant.
class RealFft2d {
public:
    RealFft2d(int width, int height);
    ~RealFft2d();
    RealFft2d(const RealFft2d&) = delete;
    RealFft2d& operator=(const RealFft2d&) = delete;

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t spectrum_size() const noexcept;

    Spectrum forward(std::span<const double> x) const;
    /// Unnormalized inverse divided by width * height, so inverse(forward(x)) == x.
    std::vector<double> inverse(const Spectrum& s) const;

    /// inverse(multiplier .* forward(x)), the common convolution pattern.
    std::vector<double> filter(std::span<const double> x, const Spectrum& multiplier,
                               bool conjugate = false) const;

private:
    struct Plans;
    int width_;
    int height_;
    std::unique_ptr<Plans> plans_;
};

} // namespace pdeconv::detail
