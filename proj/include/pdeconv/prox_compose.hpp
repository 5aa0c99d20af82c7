#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pdeconv/image.hpp"
#include "pdeconv/operators.hpp"

namespace pdeconv {

/// A family of proximity operators indexed by a scale: prox(x, s) = prox_{s f}(x).
/// Composition and splitting both need proxes of rescaled functions.
using ScaledProx = std::function<Vector(std::span<const double> x, double scale)>;

struct ComposeProxConfig {
    int inner_iters = 10;
    /// Dual step tau in (0, 2/c2). Unset: 2/(c1 + c2) when c1 is known, else 1.8/c2.
    std::optional<double> step;
    /// Initial dual point u0 (empty means zero).
    Vector dual_init;
};

struct ComposeDiagnostics {
    double step = 0.0;
    int iterations = 0;
    /// ||p_{t+1} - p_t|| for every inner iteration.
    std::vector<double> residuals;
    /// Final dual iterate, reusable as a warm start.
    Vector dual;
};

struct ComposeProxResult {
    Vector point;
    ComposeDiagnostics diagnostics;
};

double default_dual_step(double upper, std::optional<double> lower);

/// Checks F F^T = c I on `probes` random vectors (relative tolerance tol).
/// Throws InvalidArgument pointing to the iterative path when it fails.
void verify_tight(const LinearOperator& f, double c, int probes = 3, double tol = 1e-8,
                  std::uint64_t seed = 0);

/// Closed-form prox of f o A, A x = F x - y, for F F^T = c I:
///   x + c^-1 F^T (prox_{c f} - I)(F x - y).
/// The tightness of F is verified first.
Vector prox_affine_tight(const ScaledProx& prox_f, const LinearOperator& f_op,
                         std::span<const double> shift, double c, std::span<const double> x);

/// Dual forward-backward iteration for prox of f o A:
///   u_{t+1} = tau (I - prox_{f/tau})(u_t / tau + A p_t),  p_{t+1} = x - F^T u_{t+1}.
/// `upper` bounds ||F||^2; `lower`, when known, is the lower frame bound.
ComposeProxResult prox_affine_fb(const ScaledProx& prox_f, const AffineOperator& a, double upper,
                                 std::span<const double> x, const ComposeProxConfig& cfg,
                                 std::optional<double> lower = std::nullopt);

/// ScaledProx for x -> prox_{s f o A}(x) with F F^T = c I. Tightness is checked
/// once at construction.
class TightAffineProx {
public:
    TightAffineProx(ScaledProx prox_f, AffineOperator a, double c);
    Vector operator()(std::span<const double> x, double scale) const;

private:
    ScaledProx prox_f_;
    AffineOperator a_;
    double c_;
};

/// ScaledProx for prox_{s f o A} through the dual forward-backward loop, keeping
/// the final dual iterate between calls as a warm start. Not thread-safe: each
/// solver run owns its own instance.
class WarmStartFbProx {
public:
    WarmStartFbProx(ScaledProx prox_f, AffineOperator a, double upper,
                    std::optional<double> lower, ComposeProxConfig cfg);

    Vector operator()(std::span<const double> x, double scale);

    const ComposeDiagnostics& last_diagnostics() const noexcept { return last_; }
    int calls() const noexcept { return calls_; }

private:
    ScaledProx prox_f_;
    AffineOperator a_;
    double upper_;
    std::optional<double> lower_;
    ComposeProxConfig cfg_;
    ComposeDiagnostics last_;
    int calls_ = 0;
};

} // namespace pdeconv
