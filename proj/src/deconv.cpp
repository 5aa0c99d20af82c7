#include "pdeconv/deconv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <thread>

#include <json.hpp>

#include "pdeconv/errors.hpp"
#include "pdeconv/vector_ops.hpp"

namespace pdeconv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const DeconvProblem& p) {
    const std::size_t n = p.counts.size();
    if (n == 0) throw InvalidArgument("counts image is empty");
    if (!is_count_image(p.counts))
        throw InvalidArgument("counts must be non-negative integers");
    if (std::none_of(p.counts.data().begin(), p.counts.data().end(), [](double v) { return v > 0; }))
        throw InvalidArgument("counts are identically zero; the minimizer is trivially 0");
    if (!(p.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (p.blur.in_dim() != n || p.blur.out_dim() != n)
        throw DimensionError("blur operator size", n, p.blur.in_dim());
    if (p.dictionary.image_dim() != n)
        throw DimensionError("dictionary image size", n, p.dictionary.image_dim());
    if (!(p.blur.spectral_bound() > 0.0)) throw InvalidArgument("blur operator is zero");
}

ScaledProx poisson_family(const Vector& counts) {
    auto y = std::make_shared<const Vector>(counts);
    return [y](std::span<const double> v, double s) { return prox_poisson(v, s, *y); };
}

ScaledProx positive_family() {
    return [](std::span<const double> v, double) { return project_positive(v); };
}

ScaledProx penalty_family(double gamma, const SparsityPenalty& psi) {
    return [gamma, psi](std::span<const double> v, double s) {
        return prox_penalty(v, s * gamma, psi);
    };
}

// Wraps a stateful warm-started prox into a copyable ScaledProx.
template <class Stateful>
ScaledProx share(std::shared_ptr<Stateful> state) {
    return [state](std::span<const double> v, double s) { return (*state)(v, s); };
}

DeconvResult finish(const DeconvProblem& p, const SplittingState& st, Vector image,
                    std::chrono::steady_clock::time_point start) {
    DeconvResult r;
    r.clip_mass = 0.0;
    for (double& v : image)
        if (v < 0.0) {
            r.clip_mass -= v;
            v = 0.0;
        }
    r.restored = Image(p.counts.width(), p.counts.height(), std::move(image));
    r.iterations = st.iterations;
    r.converged = st.converged;
    r.gamma_used = p.gamma;
    for (const auto& row : st.trace) {
        r.relative_change_trace.push_back(row.relative_change);
        r.objective_trace.push_back(row.objective);
    }
    r.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace

Prior parse_prior(const std::string& name) {
    if (name == "analysis") return Prior::analysis;
    if (name == "synthesis") return Prior::synthesis;
    throw InvalidArgument("unknown prior '" + name + "' (expected analysis or synthesis)");
}

std::string to_string(Prior prior) { return prior == Prior::analysis ? "analysis" : "synthesis"; }

namespace {

// f1(H x) for x >= 0. FFT round-off can leave H x a few ulps below zero where the
// exact value is 0, which would make f1 infinite on y = 0 pixels; such values are
// flushed to zero.
double fidelity_at_nonnegative(const DeconvProblem& p, std::span<const double> x) {
    Vector hx = p.blur.apply(x);
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, v);
    const double floor = -64.0 * std::numeric_limits<double>::epsilon() * p.blur.spectral_bound() * peak;
    for (double& v : hx)
        if (v < 0.0 && v >= floor) v = 0.0;
    return eval_poisson(hx, p.counts.view());
}

} // namespace

double analysis_objective(const DeconvProblem& p, std::span<const double> x) {
    for (double v : x)
        if (v < 0.0) return kInf;
    return fidelity_at_nonnegative(p, x) + p.gamma * p.penalty.total(p.dictionary.analysis(x));
}

double synthesis_objective(const DeconvProblem& p, std::span<const double> alpha) {
    const Vector x = p.dictionary.synthesis(alpha);
    for (double v : x)
        if (v < 0.0) return kInf;
    return fidelity_at_nonnegative(p, x) + p.gamma * p.penalty.total(alpha);
}

DeconvResult deconvolve(const DeconvProblem& problem) {
    return problem.prior == Prior::synthesis ? deconvolve_synthesis(problem)
                                             : deconvolve_analysis(problem);
}

DeconvResult deconvolve_synthesis(const DeconvProblem& p) {
    if (p.prior != Prior::synthesis) throw InvalidArgument("problem prior is not synthesis");
    validate(p);
    const auto start = std::chrono::steady_clock::now();
    const FrameDictionary& dict = p.dictionary;
    const LinearOperator& phi = dict.synthesis_operator();
    const double h2 = p.blur.spectral_bound() * p.blur.spectral_bound();
    const Vector& y = p.counts.data();

    std::vector<ProxTerm> terms(3);
    terms[0].label = "poisson_fidelity";
    terms[1].label = "sparsity";
    terms[2].label = "positivity";
    if (dict.tight()) {
        // f1 o H o Phi: peel Phi in closed form, then the dual loop through H.
        const double c = dict.bounds().upper;
        auto inner = std::make_shared<WarmStartFbProx>(poisson_family(y), AffineOperator(p.blur),
                                                       h2, std::nullopt, p.compose);
        auto outer = std::make_shared<TightAffineProx>(share(inner), AffineOperator(phi), c);
        terms[0].prox = share(outer);
        terms[2].prox = share(std::make_shared<TightAffineProx>(positive_family(),
                                                                AffineOperator(phi), c));
    } else {
        const FrameBounds b = dict.bounds();
        terms[0].prox = share(std::make_shared<WarmStartFbProx>(
            poisson_family(y), AffineOperator(compose(p.blur, phi)), h2 * b.upper, std::nullopt,
            p.compose));
        terms[2].prox = share(std::make_shared<WarmStartFbProx>(
            positive_family(), AffineOperator(phi), b.upper, b.lower, p.compose));
    }
    terms[1].prox = penalty_family(p.gamma, p.penalty);
    assign_equal_weights(terms);

    Objective objective;
    if (p.record_objective)
        objective = [&](std::span<const double> alpha) {
            const Vector x = project_positive(dict.synthesis(alpha));
            return fidelity_at_nonnegative(p, x) + p.gamma * p.penalty.total(alpha);
        };

    const Vector alpha0 = dict.analysis(y);
    const SplittingState st = solve(terms, p.splitting, alpha0, objective);
    DeconvResult r = finish(p, st, dict.synthesis(st.iterate), start);
    r.coefficients = st.iterate;
    return r;
}

DeconvResult deconvolve_analysis(const DeconvProblem& p) {
    if (p.prior != Prior::analysis) throw InvalidArgument("problem prior is not analysis");
    validate(p);
    const auto start = std::chrono::steady_clock::now();
    const FrameDictionary& dict = p.dictionary;
    const double h2 = p.blur.spectral_bound() * p.blur.spectral_bound();
    const Vector& y = p.counts.data();

    std::vector<ProxTerm> terms(3);
    terms[0].label = "poisson_fidelity";
    terms[0].prox = share(std::make_shared<WarmStartFbProx>(
        poisson_family(y), AffineOperator(p.blur), h2, std::nullopt, p.compose));

    terms[1].label = "sparsity";
    const LinearOperator phi_t = dict.analysis_operator();
    if (dict.orthobasis()) {
        terms[1].prox = share(std::make_shared<TightAffineProx>(
            penalty_family(p.gamma, p.penalty), AffineOperator(phi_t), dict.bounds().upper));
    } else {
        terms[1].prox = share(std::make_shared<WarmStartFbProx>(
            penalty_family(p.gamma, p.penalty), AffineOperator(phi_t), dict.bounds().upper,
            dict.bounds().lower, p.compose));
    }

    terms[2].label = "positivity";
    terms[2].prox = positive_family();
    assign_equal_weights(terms);

    Objective objective;
    if (p.record_objective)
        objective = [&](std::span<const double> x) {
            const Vector xp = project_positive(x);
            return fidelity_at_nonnegative(p, xp) + p.gamma * p.penalty.total(dict.analysis(xp));
        };

    const SplittingState st = solve(terms, p.splitting, y, objective);
    return finish(p, st, st.iterate, start);
}

Image richardson_lucy(const Image& counts, const LinearOperator& blur, int iters, const Image& x0,
                      const std::function<void(int, const Image&)>& observer) {
    if (!counts.same_shape(x0)) throw DimensionError("richardson_lucy x0", counts.size(), x0.size());
    if (blur.in_dim() != counts.size()) throw DimensionError("richardson_lucy blur", counts.size(), blur.in_dim());
    if (iters < 0) throw InvalidArgument("richardson_lucy: iters must be >= 0");
    for (double v : x0.data())
        if (!(v > 0.0)) throw InvalidArgument("richardson_lucy: x0 must be strictly positive");

    constexpr double kFloor = 1e-12;
    Vector norm = blur.adjoint(Vector(counts.size(), 1.0));
    for (double& v : norm) v = std::max(v, kFloor);

    Image x = x0;
    Vector ratio(counts.size());
    for (int it = 1; it <= iters; ++it) {
        const Vector hx = blur.apply(x.view());
        for (std::size_t i = 0; i < ratio.size(); ++i)
            ratio[i] = counts[i] / std::max(hx[i], kFloor);
        const Vector back = blur.adjoint(ratio);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(0.0, x[i] * back[i] / norm[i]);
        if (observer) observer(it, x);
    }
    return x;
}

std::size_t degrees_of_freedom(double gamma, std::span<const double> coeffs) {
    std::size_t df = 0;
    for (double a : coeffs)
        if (std::abs(a) >= gamma) ++df;
    return df;
}

double gcv_score(double gamma, const Image& counts, const LinearOperator& blur,
                 const Image& restored, std::span<const double> coeffs) {
    if (!counts.same_shape(restored))
        throw DimensionError("gcv restored image", counts.size(), restored.size());
    const Vector hx = blur.apply(restored.view());
    double num = 0.0;
    for (std::size_t i = 0; i < hx.size(); ++i) {
        if (hx[i] < -1e-9 * std::max(1.0, std::abs(counts[i])))
            throw DomainError("gcv: blurred estimate is negative", i);
        const double d = 2.0 * std::sqrt(counts[i] + 0.375) - 2.0 * std::sqrt(std::max(hx[i], 0.0) + 0.375);
        num += d * d;
    }
    const std::size_t df = degrees_of_freedom(gamma, coeffs);
    const std::size_t n = counts.size();
    if (df >= n)
        throw InvalidArgument("gcv: degrees of freedom " + std::to_string(df) +
                              " >= number of pixels " + std::to_string(n));
    const double den = static_cast<double>(n - df);
    return num / (den * den);
}

GcvSelection select_gamma_gcv(std::span<const double> grid, const DeconvProblem& problem,
                              const std::optional<Image>& truth, int threads) {
    if (grid.empty()) throw InvalidArgument("gamma grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw InvalidArgument("gamma grid values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw InvalidArgument("gamma grid must be strictly increasing");
    }
    if (truth && !truth->same_shape(problem.counts))
        throw DimensionError("gcv truth image", problem.counts.size(), truth->size());

    struct Run {
        DeconvResult result;
        double gcv;
    };
    auto run_one = [&](double gamma) {
        DeconvProblem p = problem;
        p.gamma = gamma;
        Run r{deconvolve(p), 0.0};
        const Vector coeffs = p.prior == Prior::synthesis
                                  ? r.result.coefficients
                                  : p.dictionary.analysis(r.result.restored.view());
        // A redundant dictionary can keep more than n coefficients at small gamma;
        // such a grid point has no usable score rather than aborting the scan.
        if (degrees_of_freedom(gamma, coeffs) >= p.counts.size())
            r.gcv = kInf;
        else
            r.gcv = gcv_score(gamma, p.counts, p.blur, r.result.restored, coeffs);
        return r;
    };

    const std::size_t width =
        threads > 0 ? static_cast<std::size_t>(threads)
                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    std::vector<Run> runs;
    runs.reserve(grid.size());
    for (std::size_t begin = 0; begin < grid.size(); begin += width) {
        const std::size_t end = std::min(grid.size(), begin + width);
        if (end - begin == 1) {
            runs.push_back(run_one(grid[begin]));
            continue;
        }
        std::vector<std::future<Run>> batch;
        for (std::size_t i = begin; i < end; ++i)
            batch.push_back(std::async(std::launch::async, run_one, grid[i]));
        for (auto& f : batch) runs.push_back(f.get());
    }

    GcvSelection sel;
    std::size_t best = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        GcvRow row;
        row.gamma = grid[i];
        row.gcv = runs[i].gcv;
        row.iterations = runs[i].result.iterations;
        row.converged = runs[i].result.converged;
        if (truth) row.mae = mae(runs[i].result.restored, *truth);
        sel.table.push_back(row);
        if (runs[i].gcv <= runs[best].gcv) best = i;  // <= keeps the larger gamma on ties
    }
    if (!std::isfinite(runs[best].gcv))
        throw InvalidArgument("gcv: every grid value leaves at least n = " +
                              std::to_string(problem.counts.size()) +
                              " active coefficients; use larger gamma values");
    sel.gamma = grid[best];
    sel.best = std::move(runs[best].result);
    return sel;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("log_grid: need 0 < lo <= hi, n >= 1");
    std::vector<double> g(static_cast<std::size_t>(n));
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    g.back() = hi;
    g.front() = lo;
    return g;
}

Image rescale_to_peak(const Image& x, double peak) {
    if (!(peak > 0.0)) throw InvalidArgument("peak must be positive");
    double mx = 0.0;
    for (double v : x.data()) {
        if (v < 0.0) throw InvalidArgument("intensity image must be non-negative");
        mx = std::max(mx, v);
    }
    Image out = x;
    if (mx == 0.0) return out;
    for (double& v : out.data()) v = v * (peak / mx);
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

Image simulate(const Image& x_true, const LinearOperator& blur, double peak, std::uint64_t seed) {
    const Image scaled_truth = rescale_to_peak(x_true, peak);
    if (blur.in_dim() != x_true.size()) throw DimensionError("simulate blur", x_true.size(), blur.in_dim());
    const Vector mean = blur.apply(scaled_truth.view());
    Image counts(x_true.width(), x_true.height(), 0.0);
    const std::uint64_t stream = splitmix64(seed);
    for (std::size_t i = 0; i < mean.size(); ++i) {
        double lambda = mean[i];
        if (lambda < -1e-9 * peak)
            throw DomainError("simulate: blurred intensity is negative", i);
        if (lambda <= 0.0) continue;
        std::mt19937_64 engine(splitmix64(stream ^ splitmix64(i)));
        std::poisson_distribution<long long> poisson(lambda);
        counts[i] = static_cast<double>(poisson(engine));
    }
    return counts;
}

double mae(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw DimensionError("mae", a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

double relative_mae(const Image& a, const Image& truth) {
    double mean = 0.0;
    for (double v : truth.data()) mean += v;
    mean /= static_cast<double>(truth.size());
    if (mean == 0.0) return kInf;
    return mae(a, truth) / mean;
}

Image synthetic_scene(int width, int height) {
    Image img(width, height, 0.0);
    const double w = width, h = height, m = std::min(w, h);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            double v = 0.0;

            // flat block
            if (px > 0.08 * w && px < 0.26 * w && py > 0.08 * h && py < 0.30 * h) v = 0.35;

            // disc with limb darkening
            const double dx = px - 0.48 * w, dy = py - 0.55 * h;
            const double r2 = (dx * dx + dy * dy) / std::pow(0.20 * m, 2);
            if (r2 < 1.0) v = 0.45 + 0.35 * std::sqrt(1.0 - r2);

            // tilted ring around the disc, drawn in front on the lower half
            const double rx = dx / (0.40 * w), ry = dy / (0.13 * h);
            const double e = std::sqrt(rx * rx + ry * ry);
            if (e > 0.78 && e < 0.95 && (r2 >= 1.0 || dy > 0.0)) v = 0.7;

            img.at(x, y) = v;
        }
    auto spike = [&](double fx, double fy, double value) {
        const int x = std::clamp(static_cast<int>(fx * width), 0, width - 1);
        const int y = std::clamp(static_cast<int>(fy * height), 0, height - 1);
        img.at(x, y) = value;
    };
    spike(0.82, 0.18, 1.0);
    spike(0.14, 0.84, 0.9);
    spike(0.88, 0.86, 0.6);
    return img;
}

std::string metrics_json(const DeconvResult& result, const std::optional<Image>& truth) {
    using nlohmann::json;
    auto finite_or_null = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["gamma"] = result.gamma_used;
    if (truth) {
        j["mae"] = finite_or_null(mae(result.restored, *truth));
        j["relative_mae"] = finite_or_null(relative_mae(result.restored, *truth));
    } else {
        j["mae"] = nullptr;
        j["relative_mae"] = nullptr;
    }
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["relative_change_trace"] = json::array();
    for (double v : result.relative_change_trace) j["relative_change_trace"].push_back(finite_or_null(v));
    j["objective_trace"] = json::array();
    for (const auto& v : result.objective_trace)
        j["objective_trace"].push_back(v ? finite_or_null(*v) : json(nullptr));
    j["wall_time_s"] = result.wall_time_s;
    j["clip_mass"] = result.clip_mass;
    return j.dump(2);
}

} // namespace pdeconv
