#pragma once

#include <functional>
#include <span>

#include "pdeconv/image.hpp"

namespace pdeconv {

// Poisson anti-log-likelihood f1(eta) = sum_i f_poisson(eta[i]):
//   y > 0: -y log(eta) + eta   for eta > 0, +inf otherwise
//   y = 0: eta                 for eta >= 0, +inf otherwise
// (the log(y!) constant is dropped).

/// Returns +inf outside the domain, never NaN.
double eval_poisson(std::span<const double> eta, std::span<const double> counts);

/// Throws DomainError naming the first index outside the domain.
Vector grad_poisson(std::span<const double> eta, std::span<const double> counts);

/// prox_{beta f1}(x), component-wise closed form
///   (x - beta + sqrt((x - beta)^2 + 4 beta y)) / 2.
Vector prox_poisson(std::span<const double> x, double beta, std::span<const double> counts);

/// Separable penalty gamma * sum psi(alpha_i) with psi even, convex, psi(0) = 0
/// and a positive right derivative at zero.
class SparsityPenalty {
public:
    using Scalar = std::function<double(double)>;

    /// value and derivatives only need to be valid for t > 0.
    SparsityPenalty(Scalar value, Scalar derivative, Scalar second_derivative,
                    double right_derivative_at_zero);

    /// psi = |.|, whose prox is soft-thresholding.
    static SparsityPenalty l1();
    /// psi(t) = |t| + kappa t^2 / 2.
    static SparsityPenalty elastic(double kappa);

    double value(double t) const;
    double total(std::span<const double> alpha) const;
    double derivative(double t) const { return derivative_(t); }
    double second_derivative(double t) const { return second_(t); }
    double right_derivative_at_zero() const noexcept { return slope0_; }
    bool is_l1() const noexcept { return is_l1_; }

private:
    Scalar value_;
    Scalar derivative_;
    Scalar second_;
    double slope0_;
    bool is_l1_ = false;
};

Vector soft_threshold(std::span<const double> alpha, double threshold);

/// prox_{threshold * Psi}: zero when |alpha_i| <= threshold * psi'_+(0),
/// otherwise the root p of p = alpha_i - threshold * psi'(p) with the sign of
/// alpha_i, found by Newton's method safeguarded by bisection on [0, |alpha_i|].
Vector prox_penalty(std::span<const double> alpha, double threshold,
                    const SparsityPenalty& penalty);

/// Euclidean projection onto the non-negative orthant.
Vector project_positive(std::span<const double> x);

} // namespace pdeconv
