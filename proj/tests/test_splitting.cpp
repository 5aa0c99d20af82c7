#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "oracles.hpp"
#include "pdeconv/errors.hpp"
#include "pdeconv/prox.hpp"
#include "pdeconv/splitting.hpp"

using namespace pdeconv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// s ||x - a||^2 / 2
ProxTerm quadratic(Vector a, std::string label = "quadratic") {
    return {std::move(label), 1.0, [a](std::span<const double> x, double s) {
                Vector out(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] + s * a[i]) / (1.0 + s);
                return out;
            }};
}

ProxTerm l1(double gamma) {
    return {"l1", 1.0, [gamma](std::span<const double> x, double s) { return soft_threshold(x, s * gamma); }};
}

ProxTerm nonneg() {
    return {"nonneg", 1.0, [](std::span<const double> x, double) { return project_positive(x); }};
}

double quad(const Vector& x, const Vector& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += 0.5 * (x[i] - a[i]) * (x[i] - a[i]);
    return s;
}

double indicator(const Vector& x) {
    for (double v : x)
        if (v < 0.0) return kInf;
    return 0.0;
}

SplittingConfig tight_config(double theta = 1.0) {
    SplittingConfig cfg;
    cfg.max_outer = 2000;
    cfg.tol = 1e-14;
    cfg.theta = [theta](int) { return theta; };
    return cfg;
}

} // namespace

TEST_SUITE("splitting") {

TEST_CASE("relative change examples") {
    CHECK(relative_change(Vector{2, 5}, Vector{2, 5}) == 0.0);
    CHECK(relative_change(Vector{1, 1}, Vector{1, 0}) == doctest::Approx(1.0));
    CHECK(relative_change(Vector{3.03, 4.04}, Vector{3, 4}) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(relative_change(Vector{0, 0}, Vector{0, 0}) == 0.0);
    CHECK(relative_change(Vector{1, 0}, Vector{0, 0}) == kInf);
}

TEST_CASE("single quadratic term converges to its centre") {
    std::vector<ProxTerm> terms{quadratic({1.5, -2.0, 3.0})};
    assign_equal_weights(terms);
    const SplittingState st = solve(terms, tight_config(), Vector{10, 10, 10});
    CHECK(oracle::dist(st.iterate, Vector{1.5, -2.0, 3.0}) <= 1e-8);
}

TEST_CASE("quadratic plus non-negativity in 1-D") {
    for (double theta : {0.5, 1.0, 1.5}) {
        std::vector<ProxTerm> terms{quadratic({-3.0}), nonneg()};
        assign_equal_weights(terms);
        auto obj = [](std::span<const double> x) { return quad(Vector(x.begin(), x.end()), {-3.0}) + indicator(Vector(x.begin(), x.end())); };
        const SplittingState st = solve(terms, tight_config(theta), Vector{2.0}, obj);
        // Analytic optimum: projection of -3 onto [0, inf), objective 4.5.
        CHECK(std::abs(st.iterate[0]) <= 1e-6);
        CHECK(std::abs(quad(st.iterate, {-3.0}) - 4.5) <= 1e-6);
    }
}

TEST_CASE("three-term toy problem against a grid search") {
    const Vector b{2.0, -1.0};
    auto f = [&](const Vector& x) { return quad(x, b) + std::abs(x[0]) + std::abs(x[1]) + indicator(x); };
    const oracle::GridResult g = oracle::grid_search(f, 2, -3.0, 3.0, 0.01, 1e-8);
    CHECK(g.point[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(g.point[1]) <= 1e-6);
    for (double theta : {0.5, 1.0, 1.5}) {
        std::vector<ProxTerm> terms{quadratic(b), l1(1.0), nonneg()};
        assign_equal_weights(terms);
        const SplittingState st = solve(terms, tight_config(theta), Vector{0.0, 0.0});
        // The constraint only holds in the limit; evaluate the smooth part and
        // check feasibility separately.
        const double value = quad(st.iterate, b) + std::abs(st.iterate[0]) + std::abs(st.iterate[1]);
        CHECK(std::abs(value - g.value) <= 1e-6);
        CHECK(st.iterate[0] >= -1e-9);
        CHECK(st.iterate[1] >= -1e-9);
    }
}

TEST_CASE("iterates do not depend on term order") {
    const Vector b{2.0, -1.0, 0.5};
    std::vector<ProxTerm> a{quadratic(b), l1(0.3), nonneg()};
    std::vector<ProxTerm> c{nonneg(), quadratic(b), l1(0.3)};
    assign_equal_weights(a);
    assign_equal_weights(c);
    SplittingConfig cfg;
    cfg.max_outer = 50;
    const SplittingState sa = solve(a, cfg, Vector{1, 1, 1});
    const SplittingState sc = solve(c, cfg, Vector{1, 1, 1});
    CHECK(oracle::dist(sa.iterate, sc.iterate) <= 1e-12);
}

TEST_CASE("first iterate follows x1 = x0 + theta (xi - x0)") {
    std::vector<ProxTerm> terms{{"const", 1.0, [](std::span<const double> x, double) { return Vector(x.size(), 4.0); }}};
    SplittingConfig cfg;
    cfg.max_outer = 1;
    cfg.theta = [](int) { return 0.75; };
    const SplittingState st = solve(terms, cfg, Vector{2.0, -2.0});
    CHECK(st.iterate[0] == doctest::Approx(2.0 + 0.75 * 2.0));
    CHECK(st.iterate[1] == doctest::Approx(-2.0 + 0.75 * 6.0));
    CHECK(st.iterations == 1);
    // p1 = p0 + theta (2 xi - x0 - xi) = p0 + theta (xi - x0)
    CHECK(st.auxiliaries[0][0] == doctest::Approx(2.0 + 0.75 * 2.0));
}

TEST_CASE("stopping rule and trace") {
    std::vector<ProxTerm> terms{quadratic({1.0, 2.0}), nonneg()};
    assign_equal_weights(terms);
    SplittingConfig cfg;
    cfg.tol = 1e-5;
    cfg.max_outer = 1000;
    const SplittingState st = solve(terms, cfg, Vector{5.0, 5.0});
    REQUIRE(st.converged);
    CHECK(st.trace.back().relative_change <= 1e-5);
    CHECK(st.trace.size() == static_cast<std::size_t>(st.iterations));
    for (std::size_t i = 0; i + 1 < st.trace.size(); ++i) CHECK(st.trace[i].relative_change > 1e-5);

    cfg.max_outer = 2;
    const SplittingState capped = solve(terms, cfg, Vector{5.0, 5.0});
    CHECK_FALSE(capped.converged);
    CHECK(capped.iterations == 2);
}

TEST_CASE("configuration errors") {
    std::vector<ProxTerm> terms{quadratic({1.0}), nonneg()};
    terms[0].weight = 0.5;
    terms[1].weight = 0.4;
    CHECK_THROWS_AS(solve(terms, SplittingConfig{}, Vector{0.0}), InvalidArgument);
    assign_equal_weights(terms);
    SplittingConfig bad;
    bad.theta = [](int) { return 2.0; };
    CHECK_THROWS_AS(solve(terms, bad, Vector{0.0}), InvalidArgument);
    CHECK_THROWS_AS(solve(std::vector<ProxTerm>{}, SplittingConfig{}, Vector{0.0}), InvalidArgument);
}

TEST_CASE("non-finite prox output names the term and iteration") {
    std::vector<ProxTerm> terms{quadratic({1.0}),
                                {"broken", 1.0, [](std::span<const double> x, double) {
                                     return Vector(x.size(), std::nan(""));
                                 }}};
    assign_equal_weights(terms);
    try {
        (void)solve(terms, SplittingConfig{}, Vector{0.0});
        FAIL("expected Error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("broken") != std::string::npos);
        CHECK(msg.find("iteration 0") != std::string::npos);
    }
}

}
