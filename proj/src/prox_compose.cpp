#include "pdeconv/prox_compose.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pdeconv/errors.hpp"
#include "pdeconv/vector_ops.hpp"

namespace pdeconv {

double default_dual_step(double upper, std::optional<double> lower) {
    if (!(upper > 0.0)) throw InvalidArgument("dual step needs a positive operator-norm bound");
    if (lower && *lower > 0.0) return 2.0 / (*lower + upper);
    return 1.8 / upper;
}

void verify_tight(const LinearOperator& f, double c, int probes, double tol, std::uint64_t seed) {
    if (!(c > 0.0)) throw InvalidArgument("tight frame constant must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < probes; ++k) {
        Vector v(f.out_dim());
        for (double& e : v) e = gauss(rng);
        const Vector ffv = f.apply(f.adjoint(v));
        double err = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) err += std::pow(ffv[i] - c * v[i], 2);
        if (std::sqrt(err) > tol * c * norm2(v))
            throw InvalidArgument("operator " + f.name() + " is not a tight frame with c = " +
                                  std::to_string(c) +
                                  "; use the iterative forward-backward path (prox_affine_fb)");
    }
}

namespace {

Vector tight_step(const ScaledProx& prox_f, const AffineOperator& a, double c, double scale,
                  std::span<const double> x) {
    const Vector ax = a(x);
    const Vector px = prox_f(ax, c * scale);
    Vector diff(ax.size());
    for (std::size_t i = 0; i < ax.size(); ++i) diff[i] = (px[i] - ax[i]) / c;
    const Vector back = a.linear.adjoint(diff);
    Vector out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += back[i];
    return out;
}

// Dual forward-backward on u for prox_{scale f o A}(x).
ComposeProxResult fb_loop(const ScaledProx& prox_f, double scale, const AffineOperator& a,
                          std::span<const double> x, double step, int iters, Vector u) {
    const LinearOperator& f = a.linear;
    if (u.empty()) u.assign(f.out_dim(), 0.0);
    require_size(u, f.out_dim(), "dual initialization");

    ComposeProxResult res;
    res.diagnostics.step = step;
    Vector p(x.begin(), x.end());
    {
        const Vector ftu = f.adjoint(u);
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= ftu[i];
    }
    Vector v(u.size());
    res.diagnostics.residuals.reserve(static_cast<std::size_t>(iters));
    for (int t = 0; t < iters; ++t) {
        const Vector ap = a(p);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = u[i] / step + ap[i];
        const Vector pv = prox_f(v, scale / step);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = step * (v[i] - pv[i]);
        const Vector ftu = f.adjoint(u);
        double r = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double next = x[i] - ftu[i];
            r += (next - p[i]) * (next - p[i]);
            p[i] = next;
        }
        res.diagnostics.residuals.push_back(std::sqrt(r));
    }
    res.diagnostics.iterations = iters;
    res.diagnostics.dual = std::move(u);
    res.point = std::move(p);
    return res;
}

void check_step(double step, double upper) {
    if (!(step > 0.0) || !(step < 2.0 / upper))
        throw InvalidArgument("dual step " + std::to_string(step) + " outside (0, 2/c2) = (0, " +
                              std::to_string(2.0 / upper) + ")");
}

} // namespace

Vector prox_affine_tight(const ScaledProx& prox_f, const LinearOperator& f_op,
                         std::span<const double> shift, double c, std::span<const double> x) {
    verify_tight(f_op, c);
    const AffineOperator a(f_op, Vector(shift.begin(), shift.end()));
    return tight_step(prox_f, a, c, 1.0, x);
}

ComposeProxResult prox_affine_fb(const ScaledProx& prox_f, const AffineOperator& a, double upper,
                                 std::span<const double> x, const ComposeProxConfig& cfg,
                                 std::optional<double> lower) {
    if (cfg.inner_iters < 1) throw InvalidArgument("inner_iters must be >= 1");
    require_size(x, a.linear.in_dim(), "prox_affine_fb input");
    const double step = cfg.step.value_or(default_dual_step(upper, lower));
    check_step(step, upper);
    return fb_loop(prox_f, 1.0, a, x, step, cfg.inner_iters, cfg.dual_init);
}

TightAffineProx::TightAffineProx(ScaledProx prox_f, AffineOperator a, double c)
    : prox_f_(std::move(prox_f)), a_(std::move(a)), c_(c) {
    verify_tight(a_.linear, c_);
}

Vector TightAffineProx::operator()(std::span<const double> x, double scale) const {
    return tight_step(prox_f_, a_, c_, scale, x);
}

WarmStartFbProx::WarmStartFbProx(ScaledProx prox_f, AffineOperator a, double upper,
                                 std::optional<double> lower, ComposeProxConfig cfg)
    : prox_f_(std::move(prox_f)), a_(std::move(a)), upper_(upper), lower_(lower),
      cfg_(std::move(cfg)) {
    if (cfg_.inner_iters < 1) throw InvalidArgument("inner_iters must be >= 1");
    if (!cfg_.step) cfg_.step = default_dual_step(upper_, lower_);
    check_step(*cfg_.step, upper_);
    last_.dual = cfg_.dual_init;
}

Vector WarmStartFbProx::operator()(std::span<const double> x, double scale) {
    ComposeProxResult r = fb_loop(prox_f_, scale, a_, x, *cfg_.step, cfg_.inner_iters,
                                  std::move(last_.dual));
    last_ = std::move(r.diagnostics);
    ++calls_;
    return std::move(r.point);
}

} // namespace pdeconv
