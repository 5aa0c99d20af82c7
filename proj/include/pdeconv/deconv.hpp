#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdeconv/dictionary.hpp"
#include "pdeconv/image.hpp"
#include "pdeconv/operators.hpp"
#include "pdeconv/prox.hpp"
#include "pdeconv/prox_compose.hpp"
#include "pdeconv/splitting.hpp"

namespace pdeconv {

enum class Prior { analysis, synthesis };

Prior parse_prior(const std::string& name);
std::string to_string(Prior prior);

/// Poisson deconvolution problem with a sparsity prior in `dictionary`:
///   analysis:  min_x     f1(H x) + gamma Psi(Phi^T x) + i_C(x)
///   synthesis: min_alpha f1(H Phi alpha) + gamma Psi(alpha) + i_C(Phi alpha)
struct DeconvProblem {
    Image counts;
    LinearOperator blur;
    FrameDictionary dictionary;
    double gamma = 1.0;
    Prior prior = Prior::synthesis;
    SparsityPenalty penalty = SparsityPenalty::l1();
    SplittingConfig splitting{};
    ComposeProxConfig compose{};
    /// Record f1 + gamma Psi at every outer iteration, evaluated with the image
    /// clipped at zero (positivity only holds in the limit, and the unclipped
    /// objective is +inf wherever H x dips below zero on a y = 0 pixel).
    bool record_objective = true;
};

struct DeconvResult {
    /// Final image, clipped at zero.
    Image restored;
    /// Synthesis coefficients alpha (empty for the analysis prior).
    Vector coefficients;
    int iterations = 0;
    bool converged = false;
    std::vector<double> relative_change_trace;
    std::vector<std::optional<double>> objective_trace;
    double gamma_used = 0.0;
    double wall_time_s = 0.0;
    /// Sum of the negative parts removed by the final clip.
    double clip_mass = 0.0;
};

DeconvResult deconvolve(const DeconvProblem& problem);
DeconvResult deconvolve_synthesis(const DeconvProblem& problem);
DeconvResult deconvolve_analysis(const DeconvProblem& problem);

/// Exact objectives (+inf outside the domain or the positive orthant).
double analysis_objective(const DeconvProblem& problem, std::span<const double> x);
double synthesis_objective(const DeconvProblem& problem, std::span<const double> alpha);

/// Multiplicative Richardson-Lucy baseline x <- x . H^T(y / H x) / H^T 1.
/// `observer`, when set, sees every iterate.
Image richardson_lucy(const Image& counts, const LinearOperator& blur, int iters, const Image& x0,
                      const std::function<void(int, const Image&)>& observer = {});

/// #{i : |coeffs_i| >= gamma}
std::size_t degrees_of_freedom(double gamma, std::span<const double> coeffs);

/// ||2 sqrt(y + 3/8) - 2 sqrt(H x + 3/8)||^2 / (n - df)^2, df = #{|coeff_i| >= gamma}.
double gcv_score(double gamma, const Image& counts, const LinearOperator& blur,
                 const Image& restored, std::span<const double> coeffs);

struct GcvRow {
    double gamma = 0.0;
    double gcv = 0.0;
    std::optional<double> mae;
    int iterations = 0;
    bool converged = false;
};

struct GcvSelection {
    double gamma = 0.0;
    std::vector<GcvRow> table;
    DeconvResult best;
};

/// Solves the template problem at every grid value and keeps the GCV minimizer;
/// ties go to the larger gamma. Runs up to `threads` solves at once (0: hardware
/// concurrency). For the analysis prior df counts |(Phi^T x)_i| >= gamma.
/// Grid values with df >= n get an infinite score.
GcvSelection select_gamma_gcv(std::span<const double> grid, const DeconvProblem& problem,
                              const std::optional<Image>& truth = std::nullopt, int threads = 0);

/// n points from lo to hi, equally spaced in log scale.
std::vector<double> log_grid(double lo, double hi, int n);

/// x scaled so that max(x) == peak (unchanged if x is identically zero).
Image rescale_to_peak(const Image& x, double peak);

/// Counts ~ Poisson(H rescale_to_peak(x_true, peak)), one counter-seeded
/// generator per pixel so results depend only on (seed, pixel).
Image simulate(const Image& x_true, const LinearOperator& blur, double peak, std::uint64_t seed);

double mae(const Image& a, const Image& b);
/// mae(a, truth) / mean(truth).
double relative_mae(const Image& a, const Image& truth);

/// Piecewise-smooth test scene in [0, 1] on a zero background: shaded disc
/// with a ring, a flat block and a few point sources.
Image synthetic_scene(int width, int height);

/// {gamma, mae, relative_mae, iterations, converged, relative_change_trace,
///  objective_trace, wall_time_s, clip_mass}; mae fields are null without truth
/// and non-finite objective values are written as null.
std::string metrics_json(const DeconvResult& result, const std::optional<Image>& truth);

} // namespace pdeconv
