#include "pdeconv/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdeconv/errors.hpp"

namespace pdeconv {

Image::Image(int width, int height, double fill)
    : Image(width, height, Vector(static_cast<std::size_t>(std::max(width, 0)) *
                                      static_cast<std::size_t>(std::max(height, 0)),
                                  fill)) {}

Image::Image(int width, int height, Vector data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0)
        throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) +
                              "x" + std::to_string(height));
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (data_.size() != n) throw DimensionError("image data", n, data_.size());
}

bool is_count_image(const Image& img) {
    for (double v : img.data())
        if (!(v >= 0.0) || v != std::floor(v)) return false;
    return true;
}

} // namespace pdeconv
