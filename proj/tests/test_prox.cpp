#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "pdeconv/errors.hpp"
#include "pdeconv/prox.hpp"

using namespace pdeconv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double scalar_poisson(double eta, double y) {
    const Vector e{eta}, c{y};
    return eval_poisson(e, c);
}

} // namespace

TEST_SUITE("prox_core") {

TEST_CASE("poisson fidelity values") {
    CHECK(eval_poisson(Vector{1}, Vector{1}) == doctest::Approx(1.0));
    CHECK(eval_poisson(Vector{0}, Vector{1}) == kInf);
    CHECK(eval_poisson(Vector{2}, Vector{0}) == doctest::Approx(2.0));
    CHECK(eval_poisson(Vector{-1e-300}, Vector{0}) == kInf);
    CHECK(eval_poisson(Vector{0}, Vector{0}) == 0.0);
}

TEST_CASE("poisson gradient values and domain errors") {
    CHECK(grad_poisson(Vector{3, 7}, Vector{3, 7}) == Vector{0, 0});
    CHECK(grad_poisson(Vector{2}, Vector{1})[0] == doctest::Approx(0.5));
    CHECK(grad_poisson(Vector{5}, Vector{0})[0] == 1.0);
    try {
        (void)grad_poisson(Vector{1, 0, 2}, Vector{1, 4, 0});
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(e.index() == 1);
    }
}

TEST_CASE("poisson gradient matches central differences") {
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> eta(0.5, 30.0);
    std::uniform_int_distribution<int> cnt(0, 20);
    for (int t = 0; t < 100; ++t) {
        const double e = eta(rng), y = cnt(rng);
        const double fd = oracle::central_difference([&](double v) { return scalar_poisson(v, y); }, e, 1e-6);
        const double g = grad_poisson(Vector{e}, Vector{y})[0];
        CHECK(std::abs(g - fd) <= 1e-6 * std::max(1.0, std::abs(g)));
    }
}

TEST_CASE("poisson prox examples") {
    CHECK(prox_poisson(Vector{0}, 1, Vector{1})[0] == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-15));
    CHECK(prox_poisson(Vector{2}, 1, Vector{0})[0] == doctest::Approx(1.0));
    CHECK(prox_poisson(Vector{1}, 1, Vector{1})[0] == doctest::Approx(1.0));
    CHECK(prox_poisson(Vector{-4}, 1, Vector{0})[0] == 0.0);
    CHECK_THROWS_AS(prox_poisson(Vector{1}, 0.0, Vector{1}), InvalidArgument);
}

TEST_CASE("poisson prox matches a golden-section minimization") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> xs(-10, 10), bs(1e-3, 5);
    std::uniform_int_distribution<int> ys(0, 20);
    for (int t = 0; t < 200; ++t) {
        const double x = xs(rng), beta = bs(rng), y = ys(rng);
        auto obj = [&](double p) { return beta * scalar_poisson(p, y) + 0.5 * (p - x) * (p - x); };
        const double p = prox_poisson(Vector{x}, beta, Vector{y})[0];
        const double q = oracle::golden_section(obj, 0.0, std::abs(x) + beta + y + 10.0);
        CHECK(obj(p) <= obj(q) + 1e-8);
        if (y > 0) CHECK(p > 0.0);
        else CHECK(p == doctest::Approx(std::max(x - beta, 0.0)));
    }
}

TEST_CASE("poisson prox stays accurate for very negative inputs") {
    const double p = prox_poisson(Vector{-1e8}, 1.0, Vector{3})[0];
    // p ~ beta y / (beta - x) for x -> -inf
    CHECK(p == doctest::Approx(3.0 / (1.0 + 1e8)).epsilon(1e-9));
}

TEST_CASE("l1 prox is soft thresholding") {
    const SparsityPenalty l1 = SparsityPenalty::l1();
    CHECK(prox_penalty(Vector{2.5}, 1, l1)[0] == doctest::Approx(1.5));
    CHECK(prox_penalty(Vector{0.5}, 1, l1)[0] == 0.0);
    CHECK(prox_penalty(Vector{-3}, 1, l1)[0] == doctest::Approx(-2.0));
    std::mt19937_64 rng(22);
    const Vector a = oracle::random_vector(50, rng, -4, 4);
    CHECK(prox_penalty(a, 0.7, l1) == soft_threshold(a, 0.7));
    auto obj = [](double p) { return std::abs(p) + 0.5 * (p - 2.5) * (p - 2.5); };
    CHECK(oracle::golden_section(obj, -5, 5) == doctest::Approx(1.5).epsilon(1e-7));
}

TEST_CASE("generic penalty root matches a 1-D minimization") {
    const SparsityPenalty el = SparsityPenalty::elastic(0.8);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> as(-6, 6), ts(0.1, 3);
    for (int t = 0; t < 100; ++t) {
        const double a = as(rng), th = ts(rng);
        const double p = prox_penalty(Vector{a}, th, el)[0];
        auto obj = [&](double v) { return th * el.value(v) + 0.5 * (v - a) * (v - a); };
        const double q = oracle::golden_section(obj, -7, 7);
        CHECK(std::abs(p - q) <= 1e-7);
        if (std::abs(a) <= th) CHECK(p == 0.0);
    }
}

TEST_CASE("prox variational inequality and non-expansiveness") {
    std::mt19937_64 rng(24);
    std::uniform_int_distribution<int> ys(0, 10);
    const std::size_t n = 6;
    Vector y(n);
    for (double& v : y) v = ys(rng);
    const double beta = 0.7, thr = 0.9;
    const SparsityPenalty l1 = SparsityPenalty::l1();
    struct Case {
        std::function<Vector(const Vector&)> prox;
        std::function<double(const Vector&)> f;
    };
    const std::vector<Case> cases = {
        {[&](const Vector& x) { return prox_poisson(x, beta, y); },
         [&](const Vector& v) { return beta * eval_poisson(v, y); }},
        {[&](const Vector& x) { return prox_penalty(x, thr, l1); },
         [&](const Vector& v) { return thr * l1.total(v); }},
        {[&](const Vector& x) { return project_positive(x); },
         [&](const Vector& v) {
             for (double e : v)
                 if (e < 0) return kInf;
             return 0.0;
         }},
    };
    for (const Case& c : cases) {
        for (int t = 0; t < 10; ++t) {
            const Vector x = oracle::random_vector(n, rng, -5, 5);
            const Vector p = c.prox(x);
            const double fp = c.f(p);
            REQUIRE(std::isfinite(fp));
            for (int k = 0; k < 100; ++k) {
                const Vector v = oracle::random_vector(n, rng, 0, 8);
                double ip = 0.0;
                for (std::size_t i = 0; i < n; ++i) ip += (v[i] - p[i]) * (x[i] - p[i]);
                CHECK(ip + fp <= c.f(v) + 1e-9);
            }
            const Vector z = oracle::random_vector(n, rng, -5, 5);
            CHECK(oracle::dist(c.prox(x), c.prox(z)) <= oracle::dist(x, z) + 1e-12);
        }
    }
}

TEST_CASE("positivity projection") {
    CHECK(project_positive(Vector{-1, 2}) == Vector{0, 2});
    CHECK(project_positive(Vector{0, 3, 4}) == Vector{0, 3, 4});
    CHECK(project_positive(Vector{-5}) == Vector{0});
}

TEST_CASE("penalty validation") {
    CHECK_THROWS_AS(SparsityPenalty([](double t) { return t * t; }, [](double t) { return 2 * t; },
                                    [](double) { return 2.0; }, 0.0),
                    InvalidArgument);
    CHECK_THROWS_AS(prox_penalty(Vector{1}, 0.0, SparsityPenalty::l1()), InvalidArgument);
}

}
