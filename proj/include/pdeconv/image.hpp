#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pdeconv {

using Vector = std::vector<double>;

/// Row-major raster of real samples. Counts images are the same type with
/// non-negative integer values; use `is_count_image` to check.
class Image {
public:
    Image() = default;
    Image(int width, int height, double fill = 0.0);
    Image(int width, int height, Vector data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<const double> view() const noexcept { return data_; }
    std::span<double> view() noexcept { return data_; }
    const Vector& data() const noexcept { return data_; }
    Vector& data() noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    Vector data_;
};

bool is_count_image(const Image& img);

} // namespace pdeconv
