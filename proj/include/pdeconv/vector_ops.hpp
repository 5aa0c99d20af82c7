#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "pdeconv/errors.hpp"
#include "pdeconv/image.hpp"

namespace pdeconv {

inline void require_size(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n) throw DimensionError(what, n, v.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require_size(b, a.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
    require_size(b, a.size(), "subtract");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vector add(std::span<const double> a, std::span<const double> b) {
    require_size(b, a.size(), "add");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Vector scaled(std::span<const double> a, double s) {
    Vector out(a.begin(), a.end());
    for (double& v : out) v *= s;
    return out;
}

/// y += s * x
inline void axpy(double s, std::span<const double> x, std::span<double> y) {
    require_size(x, y.size(), "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace pdeconv
