#include "fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace pdeconv::detail {

namespace {

// FFTW's planner is not thread-safe; execution with new-array functions is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct RealBuffer {
    explicit RealBuffer(std::size_t n) : ptr(fftw_alloc_real(n)) {}
    ~RealBuffer() { fftw_free(ptr); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
    double* ptr;
};

struct ComplexBuffer {
    explicit ComplexBuffer(std::size_t n) : ptr(fftw_alloc_complex(n)) {}
    ~ComplexBuffer() { fftw_free(ptr); }
    ComplexBuffer(const ComplexBuffer&) = delete;
    ComplexBuffer& operator=(const ComplexBuffer&) = delete;
    fftw_complex* ptr;
};

} // namespace

struct RealFft2d::Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

RealFft2d::RealFft2d(int width, int height)
    : width_(width), height_(height), plans_(std::make_unique<Plans>()) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    RealBuffer real(n);
    ComplexBuffer cplx(spectrum_size());
    std::lock_guard lock(planner_mutex());
    plans_->forward = fftw_plan_dft_r2c_2d(height, width, real.ptr, cplx.ptr, FFTW_ESTIMATE);
    plans_->inverse = fftw_plan_dft_c2r_2d(height, width, cplx.ptr, real.ptr, FFTW_ESTIMATE);
}

RealFft2d::~RealFft2d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plans_->forward);
    fftw_destroy_plan(plans_->inverse);
}

std::size_t RealFft2d::spectrum_size() const noexcept {
    return static_cast<std::size_t>(height_) * (width_ / 2 + 1);
}

Spectrum RealFft2d::forward(std::span<const double> x) const {
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    RealBuffer real(n);
    ComplexBuffer cplx(spectrum_size());
    std::copy(x.begin(), x.end(), real.ptr);
    fftw_execute_dft_r2c(plans_->forward, real.ptr, cplx.ptr);
    Spectrum out(spectrum_size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {cplx.ptr[k][0], cplx.ptr[k][1]};
    return out;
}

std::vector<double> RealFft2d::inverse(const Spectrum& s) const {
    const std::size_t n = static_cast<std::size_t>(width_) * height_;
    RealBuffer real(n);
    ComplexBuffer cplx(spectrum_size());
    std::memcpy(cplx.ptr, s.data(), spectrum_size() * sizeof(fftw_complex));
    fftw_execute_dft_c2r(plans_->inverse, cplx.ptr, real.ptr);
    std::vector<double> out(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = real.ptr[i] * scale;
    return out;
}

std::vector<double> RealFft2d::filter(std::span<const double> x, const Spectrum& multiplier,
                                     bool conjugate) const {
    Spectrum s = forward(x);
    if (conjugate) {
        for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::conj(multiplier[i]);
    } else {
        for (std::size_t i = 0; i < s.size(); ++i) s[i] *= multiplier[i];
    }
    return inverse(s);
}

} // namespace pdeconv::detail
