#include "pdeconv/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdeconv/errors.hpp"
#include "pdeconv/vector_ops.hpp"

namespace pdeconv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

double eval_poisson(std::span<const double> eta, std::span<const double> counts) {
    require_size(counts, eta.size(), "eval_poisson counts");
    double total = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const double e = eta[i], y = counts[i];
        if (y > 0.0) {
            if (!(e > 0.0)) return kInf;
            total += e - y * std::log(e);
        } else {
            if (!(e >= 0.0)) return kInf;
            total += e;
        }
    }
    return total;
}

Vector grad_poisson(std::span<const double> eta, std::span<const double> counts) {
    require_size(counts, eta.size(), "grad_poisson counts");
    Vector g(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const double e = eta[i], y = counts[i];
        if (y > 0.0) {
            if (!(e > 0.0)) throw DomainError("grad_poisson: eta must be > 0 where y > 0", i);
            g[i] = 1.0 - y / e;
        } else {
            if (!(e >= 0.0)) throw DomainError("grad_poisson: eta must be >= 0 where y = 0", i);
            g[i] = 1.0;
        }
    }
    return g;
}

Vector prox_poisson(std::span<const double> x, double beta, std::span<const double> counts) {
    if (!(beta > 0.0)) throw InvalidArgument("prox_poisson: beta must be positive");
    require_size(counts, x.size(), "prox_poisson counts");
    Vector p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = x[i] - beta;
        const double disc = std::sqrt(a * a + 4.0 * beta * counts[i]);
        // Rationalized branch avoids cancellation when a is very negative.
        p[i] = a >= 0.0 ? 0.5 * (a + disc) : (disc - a > 0.0 ? 2.0 * beta * counts[i] / (disc - a) : 0.0);
    }
    return p;
}

SparsityPenalty::SparsityPenalty(Scalar value, Scalar derivative, Scalar second_derivative,
                                 double right_derivative_at_zero)
    : value_(std::move(value)), derivative_(std::move(derivative)),
      second_(std::move(second_derivative)), slope0_(right_derivative_at_zero) {
    if (!(slope0_ > 0.0) || !std::isfinite(slope0_))
        throw InvalidArgument("penalty needs a finite positive right derivative at zero");
}

SparsityPenalty SparsityPenalty::l1() {
    SparsityPenalty p([](double t) { return t; }, [](double) { return 1.0; },
                      [](double) { return 0.0; }, 1.0);
    p.is_l1_ = true;
    return p;
}

SparsityPenalty SparsityPenalty::elastic(double kappa) {
    if (!(kappa >= 0.0)) throw InvalidArgument("elastic penalty needs kappa >= 0");
    return SparsityPenalty([kappa](double t) { return t + 0.5 * kappa * t * t; },
                           [kappa](double t) { return 1.0 + kappa * t; },
                           [kappa](double) { return kappa; }, 1.0);
}

double SparsityPenalty::value(double t) const { return t == 0.0 ? 0.0 : value_(std::abs(t)); }

double SparsityPenalty::total(std::span<const double> alpha) const {
    double s = 0.0;
    if (is_l1_) {
        for (double a : alpha) s += std::abs(a);
        return s;
    }
    for (double a : alpha) s += value(a);
    return s;
}

Vector soft_threshold(std::span<const double> alpha, double threshold) {
    Vector out(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double a = alpha[i];
        const double m = std::abs(a) - threshold;
        out[i] = m > 0.0 ? std::copysign(m, a) : 0.0;
    }
    return out;
}

namespace {

// Root of phi(p) = p + t psi'(p) - a on (0, a - t psi'_+(0)]; phi is increasing.
double penalty_root(double a, double t, const SparsityPenalty& psi) {
    double lo = 0.0;
    double hi = a - t * psi.right_derivative_at_zero();
    double p = hi;
    const double tol = 1e-12 * std::max(1.0, a);
    for (int it = 0; it < 200; ++it) {
        const double phi = p + t * psi.derivative(p) - a;
        if (phi == 0.0) return p;
        if (phi > 0.0) hi = p; else lo = p;
        const double slope = 1.0 + t * psi.second_derivative(p);
        double next = p - phi / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (std::abs(next - p) <= tol || hi - lo <= tol) return next;
        p = next;
    }
    throw ConvergenceError("prox_penalty: root finder did not converge for |alpha| = " +
                               std::to_string(a) + ", bracket width " + std::to_string(hi - lo),
                           p, 200);
}

} // namespace

Vector prox_penalty(std::span<const double> alpha, double threshold,
                    const SparsityPenalty& penalty) {
    if (!(threshold > 0.0)) throw InvalidArgument("prox_penalty: threshold must be positive");
    if (penalty.is_l1()) return soft_threshold(alpha, threshold);
    const double cut = threshold * penalty.right_derivative_at_zero();
    Vector out(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double a = std::abs(alpha[i]);
        out[i] = a <= cut ? 0.0 : std::copysign(penalty_root(a, threshold, penalty), alpha[i]);
    }
    return out;
}

Vector project_positive(std::span<const double> x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

} // namespace pdeconv
