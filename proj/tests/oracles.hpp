#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline Vec random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vec v(n);
    for (double& e : v) e = u(rng);
    return v;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

/// Minimizer of a unimodal f on [a, b].
inline double golden_section(const std::function<double(double)>& f, double a, double b,
                             double tol = 1e-13) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Conjugate gradients for a symmetric positive definite map.
inline Vec conjugate_gradient(const std::function<Vec(const Vec&)>& a, const Vec& b,
                              double tol = 1e-14, int max_iter = 10000) {
    Vec x(b.size(), 0.0), r = b, p = b;
    double rr = dot(r, r);
    const double stop = tol * tol * std::max(rr, 1e-300);
    for (int k = 0; k < max_iter && rr > stop; ++k) {
        const Vec ap = a(p);
        const double alpha = rr / dot(p, ap);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + (rr_new / rr) * p[i];
        rr = rr_new;
    }
    return x;
}

struct GridResult {
    Vec point;
    double value = std::numeric_limits<double>::infinity();
};

/// Exhaustive search over the box [lo, hi]^d at the given step, followed by
/// repeated local grid searches with a shrinking step around the incumbent.
inline GridResult grid_search(const std::function<double(const Vec&)>& f, std::size_t dims,
                              double lo, double hi, double step, double final_step = 1e-7) {
    const auto points = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    GridResult best;
    Vec x(dims);
    std::vector<long> idx(dims, 0);
    for (;;) {
        for (std::size_t k = 0; k < dims; ++k) x[k] = lo + step * static_cast<double>(idx[k]);
        const double v = f(x);
        if (v < best.value) best = {x, v};
        std::size_t k = 0;
        while (k < dims && ++idx[k] == points) idx[k++] = 0;
        if (k == dims) break;
    }
    // Local refinement: a 5^d stencil, halving the step whenever the centre wins.
    double h = step;
    while (h > final_step) {
        bool moved = false;
        std::vector<int> off(dims, -2);
        Vec trial(dims);
        const Vec centre = best.point;
        for (;;) {
            for (std::size_t k = 0; k < dims; ++k)
                trial[k] = std::clamp(centre[k] + h * 0.5 * off[k], lo, hi);
            const double v = f(trial);
            if (v < best.value - 1e-15 * std::abs(best.value)) {
                best = {trial, v};
                moved = true;
            }
            std::size_t k = 0;
            while (k < dims && ++off[k] == 3) off[k++] = -2;
            if (k == dims) break;
        }
        if (!moved) h *= 0.5;
    }
    return best;
}

/// Naive O(n^2) 2-D DFT modulus maximum of a kernel embedded in a w x h grid
/// (origin irrelevant for the modulus).
inline double dft_max_modulus(const Vec& taps, int kw, int kh, int w, int h) {
    const double two_pi = 2.0 * std::acos(-1.0);
    double best = 0.0;
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            double re = 0.0, im = 0.0;
            for (int y = 0; y < kh; ++y)
                for (int x = 0; x < kw; ++x) {
                    const double ang = -two_pi * (double(u) * x / w + double(v) * y / h);
                    re += taps[static_cast<std::size_t>(y) * kw + x] * std::cos(ang);
                    im += taps[static_cast<std::size_t>(y) * kw + x] * std::sin(ang);
                }
            best = std::max(best, std::hypot(re, im));
        }
    return best;
}

} // namespace oracle
