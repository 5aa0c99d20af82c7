#include "pdeconv/splitting.hpp"

#include <cmath>
#include <limits>

#include "pdeconv/errors.hpp"
#include "pdeconv/vector_ops.hpp"

namespace pdeconv {

double relative_change(std::span<const double> x_new, std::span<const double> x_old) {
    require_size(x_new, x_old.size(), "relative_change");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x_old.size(); ++i) {
        const double d = x_new[i] - x_old[i];
        num += d * d;
        den += x_old[i] * x_old[i];
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num) / std::sqrt(den);
}

void assign_equal_weights(std::span<ProxTerm> terms) {
    for (auto& t : terms) t.weight = 1.0 / static_cast<double>(terms.size());
}

namespace {

void validate(std::span<const ProxTerm> terms, const SplittingConfig& cfg) {
    if (terms.empty()) throw InvalidArgument("splitting needs at least one term");
    double sum = 0.0;
    for (const auto& t : terms) {
        if (!(t.weight > 0.0 && t.weight <= 1.0))
            throw InvalidArgument("term '" + t.label + "' weight must lie in (0, 1]");
        if (!t.prox) throw InvalidArgument("term '" + t.label + "' has no prox");
        sum += t.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidArgument("term weights sum to " + std::to_string(sum) + ", expected 1");
    if (!(cfg.mu > 0.0)) throw InvalidArgument("mu must be positive");
    if (cfg.max_outer < 1) throw InvalidArgument("max_outer must be >= 1");
    if (!(cfg.tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (!cfg.theta) throw InvalidArgument("theta schedule missing");
}

} // namespace

SplittingState solve(std::span<const ProxTerm> terms, const SplittingConfig& cfg,
                     std::span<const double> x0, const Objective& objective) {
    std::vector<Vector> aux(terms.size(), Vector(x0.begin(), x0.end()));
    return solve(terms, cfg, std::move(aux), objective);
}

SplittingState solve(std::span<const ProxTerm> terms, const SplittingConfig& cfg,
                     std::vector<Vector> initial_auxiliaries, const Objective& objective) {
    validate(terms, cfg);
    if (initial_auxiliaries.size() != terms.size())
        throw DimensionError("initial auxiliaries", terms.size(), initial_auxiliaries.size());
    const std::size_t dim = initial_auxiliaries.front().size();
    for (const auto& p : initial_auxiliaries) require_size(p, dim, "initial auxiliary");

    SplittingState st;
    st.auxiliaries = std::move(initial_auxiliaries);
    st.iterate.assign(dim, 0.0);
    for (std::size_t i = 0; i < terms.size(); ++i)
        axpy(terms[i].weight, st.auxiliaries[i], st.iterate);

    std::vector<Vector> xis(terms.size());
    Vector xi(dim);
    for (int t = 0; t < cfg.max_outer; ++t) {
        const double theta = cfg.theta(t);
        if (!(theta > 0.0 && theta < 2.0))
            throw InvalidArgument("theta_" + std::to_string(t) + " = " + std::to_string(theta) +
                                  " outside (0, 2)");

        std::fill(xi.begin(), xi.end(), 0.0);
        for (std::size_t i = 0; i < terms.size(); ++i) {
            xis[i] = terms[i].prox(st.auxiliaries[i], cfg.mu / terms[i].weight);
            require_size(xis[i], dim, "prox output");
            if (!all_finite(xis[i]))
                throw Error("non-finite prox output from term '" + terms[i].label +
                            "' at iteration " + std::to_string(t));
            axpy(terms[i].weight, xis[i], xi);
        }
        for (std::size_t i = 0; i < terms.size(); ++i) {
            Vector& p = st.auxiliaries[i];
            for (std::size_t k = 0; k < dim; ++k)
                p[k] += theta * (2.0 * xi[k] - st.iterate[k] - xis[i][k]);
        }
        Vector next(dim);
        for (std::size_t k = 0; k < dim; ++k) next[k] = st.iterate[k] + theta * (xi[k] - st.iterate[k]);
        if (!all_finite(next))
            throw Error("non-finite iterate at iteration " + std::to_string(t));

        TraceRow row;
        row.iteration = t + 1;
        row.relative_change = relative_change(next, st.iterate);
        st.iterate = std::move(next);
        if (objective) row.objective = objective(st.iterate);
        st.trace.push_back(row);
        st.iterations = t + 1;
        if (row.relative_change <= cfg.tol) {
            st.converged = true;
            break;
        }
    }
    return st;
}

} // namespace pdeconv
