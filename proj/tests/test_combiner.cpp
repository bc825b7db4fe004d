#include "hierseq/combiner.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "test_util.hpp"

using namespace hierseq;
using testutil::random_vector;

TEST_CASE("diamond evaluates the series/parallel combination") {
    Combiner d1 = diamond(WeightVector{1, 1, 1, 1});
    CHECK(d1({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
    // positive homogeneity at a constant vector
    CHECK(d1({2.0, 2.0, 2.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-15));

    // hand evaluation: (1/2 + 3/2)^-1 + (1 + 1)^-1 = 1/2 + 1/2
    Combiner d2 = diamond(WeightVector{2.0, 2.0 / 3.0, 1.0, 1.0});
    CHECK(d2({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("arithmetic mean is the midpoint") {
    Combiner m = arithmetic_mean(2);
    CHECK(m({3.0, 5.0}) == doctest::Approx(4.0));
    auto g = m.gradient({0.3, 0.9});
    CHECK(g[0] == doctest::Approx(0.5));
    CHECK(g[1] == doctest::Approx(0.5));
}

TEST_CASE("weighted Lp combiners: parallel, series, Euclidean") {
    CHECK(lp_combiner(WeightVector{1, 1}, 1.0)({3.0, 4.0}) == doctest::Approx(7.0));
    // series rule: (1/3 + 1/6)^-1 = 2
    CHECK(lp_combiner(WeightVector{1, 1}, -1.0)({3.0, 6.0}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(lp_combiner(WeightVector{1, 1}, 2.0)({3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK_THROWS_AS(lp_combiner(WeightVector{1, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("domain violations are rejected, never NaN") {
    Combiner d = diamond(WeightVector{1, 1, 1, 1});
    CHECK_THROWS_AS(d({0.0, 1.0, 1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(d({-1.0, 1.0, 1.0, 1.0}), std::domain_error);
    Combiner series = lp_combiner(WeightVector{1, 1}, -2.0);
    CHECK_THROWS_AS(series({0.0, 1.0}), std::domain_error);
    // arity mismatch
    CHECK_THROWS_AS(d({1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("diamond gradient matches the closed form at constant vectors") {
    Combiner d1 = diamond(WeightVector{1, 1, 1, 1});
    auto g = d1.gradient({1.0, 1.0, 1.0, 1.0});
    for (double gi : g) CHECK(gi == doctest::Approx(0.25).epsilon(1e-14));

    // w^{-1}_i / (w_1^{-1} + w_2^{-1})^2 with w = (2, 2/3, 1, 1):
    // (0.5/4, 1.5/4, 1/4, 1/4)
    Combiner d2 = diamond(WeightVector{2.0, 2.0 / 3.0, 1.0, 1.0});
    auto g2 = d2.gradient({1.0, 1.0, 1.0, 1.0});
    CHECK(g2[0] == doctest::Approx(1.0 / 8).epsilon(1e-14));
    CHECK(g2[1] == doctest::Approx(3.0 / 8).epsilon(1e-14));
    CHECK(g2[2] == doctest::Approx(1.0 / 4).epsilon(1e-14));
    CHECK(g2[3] == doctest::Approx(1.0 / 4).epsilon(1e-14));
    CHECK(g2[0] + g2[1] + g2[2] + g2[3] == doctest::Approx(1.0).epsilon(1e-14));

    // the diagonal gradient does not depend on the constant
    for (double c : {0.3, 1.7, 42.0}) {
        auto gc = d2.gradient({c, c, c, c});
        for (int i = 0; i < 4; ++i) CHECK(gc[i] == doctest::Approx(g2[i]).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradients agree with central differences") {
    std::mt19937_64 rng(7);
    Combiner cs[] = {diamond(WeightVector{1.3, 0.4, 2.0, 1.0}),
                     lp_combiner(WeightVector{0.7, 1.1, 2.2}, 2.5),
                     lp_combiner(WeightVector{1.0, 0.5}, -1.0), arithmetic_mean(3)};
    for (const auto& c : cs) {
        for (int trial = 0; trial < 200; ++trial) {
            auto x = random_vector(rng, static_cast<std::size_t>(c.arity()), 0.4, 3.0);
            auto ga = c.gradient(x);
            // strip the analytic gradient to force the fallback
            Combiner plain("fd", c.arity(), c.domain(),
                           [&c](std::span<const double> v) { return c.eval(v); });
            auto gf = plain.gradient(x);
            for (std::size_t i = 0; i < ga.size(); ++i)
                CHECK(ga[i] == doctest::Approx(gf[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("finite-difference fallback reproduces a known gradient") {
    // geometric mean of two coordinates, no analytic gradient provided
    Combiner g("geomean", 2, Domain::positive(),
               [](std::span<const double> x) { return std::sqrt(x[0] * x[1]); });
    auto grad = g.gradient({4.0, 9.0});
    CHECK(grad[0] == doctest::Approx(0.5 * std::sqrt(9.0 / 4.0)).epsilon(1e-9));
    CHECK(grad[1] == doctest::Approx(0.5 * std::sqrt(4.0 / 9.0)).epsilon(1e-9));
}

TEST_CASE("gradient near the domain boundary errors instead of underflowing") {
    Combiner g("fd-only", 2, Domain::positive(),
               [](std::span<const double> x) { return std::sqrt(x[0] * x[1]); });
    CHECK_THROWS_AS(g.gradient({0.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(g.gradient({5e-324, 1.0}), std::domain_error);
}

TEST_CASE("positive homogeneity holds to 1e-12 relative") {
    std::mt19937_64 rng(11);
    Combiner cs[] = {diamond(WeightVector{1.5, 0.7, 1.0, 2.4}),
                     lp_combiner(WeightVector{1.0, 2.0, 0.3}, 1.5),
                     lp_combiner(WeightVector{0.4, 1.6}, -2.0)};
    for (const auto& c : cs) {
        for (int trial = 0; trial < 1000; ++trial) {
            auto x = random_vector(rng, static_cast<std::size_t>(c.arity()), 0.1, 5.0);
            double t = 0.2 + 3.0 * uniform01(rng);
            std::vector<double> tx(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) tx[i] = t * x[i];
            double lhs = c.eval(tx), rhs = t * c.eval(x);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
        }
    }
}

TEST_CASE("gradient components of averaging built-ins sum to one on the diagonal") {
    std::mt19937_64 rng(13);
    // normalized combiners: F(1) = 1
    Combiner cs[] = {diamond(WeightVector{1.5, 1.5, 0.5, 0.5}),
                     diamond(WeightVector{2.0, 2.0 / 3.0, 1.0, 1.0}), arithmetic_mean(4),
                     lp_combiner(WeightVector{0.25, 0.25, 0.25, 0.25}, 1.0)};
    for (const auto& c : cs) {
        for (int trial = 0; trial < 100; ++trial) {
            double v = 0.2 + 4.0 * uniform01(rng);
            std::vector<double> x(static_cast<std::size_t>(c.arity()), v);
            auto g = c.gradient(x);
            double s = 0.0;
            for (double gi : g) s += gi;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    // scaled combiners: the diagonal gradient sums to F(1) instead
    Combiner scaled = diamond(WeightVector{1.5, 0.7, 1.0, 2.4});
    double f1 = scaled({1.0, 1.0, 1.0, 1.0});
    auto g = scaled.gradient({2.0, 2.0, 2.0, 2.0});
    double s = 0.0;
    for (double gi : g) s += gi;
    CHECK(s == doctest::Approx(f1).epsilon(1e-12));
}

TEST_CASE("composing L1 over two series pairs reproduces the diamond") {
    CompositionSpec spec{lp_combiner(WeightVector{1, 1}, 1.0),
                         {lp_combiner(WeightVector{1, 1}, -1.0), lp_combiner(WeightVector{1, 1}, -1.0)},
                         {{0, 1}, {2, 3}},
                         std::nullopt};
    Combiner composed = compose(spec);
    Combiner direct = diamond(WeightVector{1, 1, 1, 1});
    REQUIRE(composed.arity() == 4);
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10000; ++trial) {
        auto x = random_vector(rng, 4, 0.05, 10.0);
        double a = composed.eval(x), b = direct.eval(x);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
    }
    // chain-rule gradient equals the direct analytic one
    for (int trial = 0; trial < 200; ++trial) {
        auto x = random_vector(rng, 4, 0.2, 4.0);
        auto ga = composed.gradient(x), gb = direct.gradient(x);
        for (int i = 0; i < 4; ++i) CHECK(ga[i] == doctest::Approx(gb[i]).epsilon(1e-10));
    }
}

TEST_CASE("weighted composition folds the weights into the diamond") {
    WeightVector w{2.0, 2.0 / 3.0, 1.0, 1.0};
    CompositionSpec spec{lp_combiner(WeightVector{1, 1}, 1.0),
                         {lp_combiner(WeightVector{w[0], w[1]}, -1.0),
                          lp_combiner(WeightVector{w[2], w[3]}, -1.0)},
                         {{0, 1}, {2, 3}},
                         std::nullopt};
    Combiner composed = compose(spec);
    Combiner direct = diamond(w);
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 10000; ++trial) {
        auto x = random_vector(rng, 4, 0.05, 10.0);
        CHECK(std::abs(composed.eval(x) - direct.eval(x)) <=
              1e-12 * std::max(1.0, std::abs(direct.eval(x))));
    }
}

TEST_CASE("L2 over L-2 composition normalizes to one at the all-ones vector") {
    CompositionSpec spec{lp_combiner(WeightVector{1, 1}, 2.0),
                         {lp_combiner(WeightVector{1, 1}, -2.0), lp_combiner(WeightVector{1, 1}, -2.0)},
                         {{0, 1}, {2, 3}},
                         std::nullopt};
    Combiner composed = compose(spec);
    CHECK(composed({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    // still averaging-shaped: value between min and max
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        auto x = random_vector(rng, 4, 0.3, 3.0);
        double v = composed.eval(x);
        CHECK(v >= *std::min_element(x.begin(), x.end()));
        CHECK(v <= *std::max_element(x.begin(), x.end()));
    }
}

TEST_CASE("identity composition leaves the mean unchanged") {
    CompositionSpec spec{arithmetic_mean(2),
                         {identity_combiner(), identity_combiner()},
                         {{0}, {1}},
                         std::nullopt};
    Combiner composed = compose(spec);
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 500; ++trial) {
        auto x = random_vector(rng, 2, -5.0, 5.0);
        CHECK(composed.eval(x) == doctest::Approx(0.5 * (x[0] + x[1])).epsilon(1e-14));
    }
}

TEST_CASE("composition rejects bad specs") {
    auto series = lp_combiner(WeightVector{1, 1}, -1.0);
    auto parallel = lp_combiner(WeightVector{1, 1}, 1.0);

    // cover violation: coordinate 2 never used
    CompositionSpec gap{parallel, {series, series}, {{0, 1}, {1, 3}}, std::nullopt};
    CHECK_THROWS_AS(compose(gap), std::invalid_argument);

    // arity mismatch between index set and inner combiner
    CompositionSpec bad_size{parallel, {series, series}, {{0}, {1, 2}}, std::nullopt};
    CHECK_THROWS_AS(compose(bad_size), std::invalid_argument);

    // explicit scale violating F_0(s) = 1
    CompositionSpec bad_scale{parallel, {series, series}, {{0, 1}, {2, 3}},
                              std::vector<double>{1.0, 1.0}};
    CHECK_THROWS_AS(compose(bad_scale), std::invalid_argument);

    // a valid explicit scale: L1(s) = 1 with s = (1/2, 1/2)
    CompositionSpec ok{parallel, {series, series}, {{0, 1}, {2, 3}},
                       std::vector<double>{0.5, 0.5}};
    Combiner c = compose(ok);
    CHECK(c({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("weight vectors must be strictly positive") {
    CHECK_THROWS_AS(WeightVector({1.0, 0.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightVector({1.0, -2.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightVector(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("eval is deterministic") {
    Combiner d = diamond(WeightVector{1.7, 0.3, 2.0, 1.1});
    std::vector<double> x = {0.9, 1.4, 0.2, 3.3};
    double v = d.eval(x);
    for (int i = 0; i < 100; ++i) CHECK(d.eval(x) == v);
}
