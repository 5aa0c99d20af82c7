#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdeconv/image.hpp"
#include "pdeconv/prox_compose.hpp"

namespace pdeconv {

/// One summand f_i of the objective, given through its prox family.
/// The solver calls prox(p, mu / weight).
struct ProxTerm {
    std::string label;
    double weight = 1.0;
    ScaledProx prox;
};

using ThetaSchedule = std::function<double(int)>;

struct SplittingConfig {
    double mu = 1.0;
    ThetaSchedule theta = [](int) { return 1.0; };
    int max_outer = 300;
    /// Stop once ||x_{t+1} - x_t|| / ||x_t|| <= tol.
    double tol = 1e-5;
};

struct TraceRow {
    int iteration = 0;
    double relative_change = 0.0;
    std::optional<double> objective;
};

struct SplittingState {
    Vector iterate;
    std::vector<Vector> auxiliaries;
    int iterations = 0;
    bool converged = false;
    std::vector<TraceRow> trace;
};

using Objective = std::function<double(std::span<const double>)>;

/// ||x_new - x_old|| / ||x_old||; 0 when both vanish, +inf when only x_old does.
double relative_change(std::span<const double> x_new, std::span<const double> x_old);

/// Product-space splitting for min sum_i f_i(x):
///   xi_i   = prox_{mu f_i / w_i}(p_i)
///   xi     = sum_i w_i xi_i
///   p_i   += theta_t (2 xi - x - xi_i)
///   x     += theta_t (xi - x)
/// starting from p_i = x0 for every term.
SplittingState solve(std::span<const ProxTerm> terms, const SplittingConfig& cfg,
                     std::span<const double> x0, const Objective& objective = {});

/// Same, with explicit initial auxiliaries p_{0,i}; x_0 = sum_i w_i p_{0,i}.
SplittingState solve(std::span<const ProxTerm> terms, const SplittingConfig& cfg,
                     std::vector<Vector> initial_auxiliaries, const Objective& objective = {});

/// Equal weights 1/K on every term.
void assign_equal_weights(std::span<ProxTerm> terms);

} // namespace pdeconv
