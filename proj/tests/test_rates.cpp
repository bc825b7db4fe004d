#include "hierseq/rates.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "hierseq/engine.hpp"
#include "test_util.hpp"

using namespace hierseq;

TEST_CASE("phi of reference gradients") {
    // equal components: the floor 1/sqrt(k)
    CHECK(phi_from_alpha({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(0.5).epsilon(1e-15));
    // basis vector: the ceiling
    CHECK(phi_from_alpha({1.0, 0.0, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
    // cube sum 11/128 over norm-cube 27/(128 sqrt 2)
    CHECK(phi_from_alpha({1.0 / 8, 3.0 / 8, 0.25, 0.25}) ==
          doctest::Approx(11.0 * std::sqrt(2.0) / 27.0).epsilon(1e-14));
    CHECK(phi_from_alpha({0.5, 0.5, 0.0, 0.0}) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(phi_from_alpha({0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(phi_from_alpha(std::span<const double>{}), std::invalid_argument);
}

TEST_CASE("phi bounds over random gradients, k = 2..8") {
    std::mt19937_64 rng(311);
    for (std::size_t k = 2; k <= 8; ++k) {
        double floor = 1.0 / std::sqrt(static_cast<double>(k));
        for (int trial = 0; trial < 2000; ++trial) {
            auto a = testutil::random_vector(rng, k, -2.0, 2.0);
            bool zero = true;
            for (double ai : a) zero = zero && ai == 0.0;
            if (zero) continue;
            double phi = phi_from_alpha(a);
            CHECK(phi >= floor - 1e-12);
            CHECK(phi <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("lambda <= phi for convex weights, equality only at basis vectors") {
    std::mt19937_64 rng(313);
    for (int trial = 0; trial < 5000; ++trial) {
        auto a = testutil::random_convex(rng, 2 + trial % 7);
        RateReport r = rate_report_from_alpha(a);
        CHECK(r.convex_weights);
        CHECK(r.lambda <= r.phi + 1e-12);
    }
    RateReport basis = rate_report_from_alpha(std::vector<double>{0.0, 1.0, 0.0});
    CHECK(basis.lambda == doctest::Approx(basis.phi).epsilon(1e-15));
    CHECK(basis.basis_vector);
}

TEST_CASE("phi is scale invariant") {
    std::mt19937_64 rng(317);
    for (int trial = 0; trial < 2000; ++trial) {
        auto a = testutil::random_vector(rng, 4, -1.0, 1.0);
        double phi = phi_from_alpha(a);
        double t = (uniform01(rng) - 0.5) * 10.0;
        if (t == 0.0) continue;
        std::vector<double> ta(a);
        for (auto& ai : ta) ai *= t;
        CHECK(phi_from_alpha(ta) == doctest::Approx(phi).epsilon(1e-12));
    }
}

TEST_CASE("diamond rate constants in closed form") {
    RateReport r = diamond_rates(WeightVector{1, 1, 1, 1});
    CHECK(r.lambda == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.phi == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.convex_weights);
    CHECK(r.lambda_le_phi);
    for (double ai : r.alpha) CHECK(ai == doctest::Approx(0.25).epsilon(1e-15));

    RateReport t1 = diamond_rates(t_family(1.0));
    CHECK(t1.phi == doctest::Approx(11.0 * std::sqrt(2.0) / 27.0).epsilon(1e-14));

    CHECK_THROWS_AS(diamond_rates(WeightVector{1, 1, 1}), std::invalid_argument);
}

TEST_CASE("closed form equals the generic gradient path for random weights") {
    std::mt19937_64 rng(331);
    for (int trial = 0; trial < 2000; ++trial) {
        WeightVector w{0.1 + 3.0 * uniform01(rng), 0.1 + 3.0 * uniform01(rng),
                       0.1 + 3.0 * uniform01(rng), 0.1 + 3.0 * uniform01(rng)};
        RateReport r = diamond_rates(w);
        double generic = phi_from_alpha(r.alpha);
        CHECK(std::abs(r.phi - generic) <= 1e-12);
        // gradient path through the combiner itself
        Combiner d = diamond(w);
        auto g = d.gradient({1.0, 1.0, 1.0, 1.0});
        for (int i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(r.alpha[i]).epsilon(1e-12));
    }
}

TEST_CASE("side-equally-weighted family") {
    WeightVector w1 = side_weighted_family(1.0);
    for (int i = 0; i < 4; ++i) CHECK(w1[i] == 1.0);

    WeightVector w15 = side_weighted_family(1.5);
    CHECK(w15[0] == 1.5);
    CHECK(w15[2] == 0.5);
    RateReport r = diamond_rates(w15);
    CHECK(r.alpha[0] == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(r.alpha[2] == doctest::Approx(0.125).epsilon(1e-14));
    // F(1) = 1 exactly for the family
    Combiner d = diamond(w15);
    CHECK(d({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(side_weighted_family(2.0), std::invalid_argument);
    CHECK_THROWS_AS(side_weighted_family(0.9), std::invalid_argument);
    CHECK_THROWS_AS(side_weighted_family(2.5), std::invalid_argument);

    // limit toward w = 2: phi approaches 1/sqrt(2)
    RateReport near = diamond_rates(side_weighted_family(1.999));
    CHECK(std::abs(near.phi - 1.0 / std::sqrt(2.0)) <= 1e-3);
    // oracle: the generic phi on the closed-form gradient agrees
    CHECK(near.phi == doctest::Approx(phi_from_alpha(near.alpha)).epsilon(1e-12));
}

TEST_CASE("t-parameterized family") {
    WeightVector w = t_family(1.0);
    CHECK(w[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(w[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w[3] == doctest::Approx(1.0).epsilon(1e-15));

    // normalization F(1) = 1 holds across the family
    for (double t : {0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
        Combiner d = diamond(t_family(t));
        CHECK(d({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    }

    CHECK(diamond_rates(t_family(1.0)).phi ==
          doctest::Approx(11.0 * std::sqrt(2.0) / 27.0).epsilon(1e-14));
    CHECK(diamond_rates(t_family(10.0)).phi > 0.9);
    CHECK_THROWS_AS(t_family(0.0), std::invalid_argument);
    CHECK_THROWS_AS(t_family(-1.0), std::invalid_argument);
}

TEST_CASE("phi sequence along a mean path") {
    Combiner d = diamond(WeightVector{2.0, 2.0 / 3.0, 1.0, 1.0});
    std::vector<double> path = {0.9, 1.0, 1.05, 1.1};
    auto seq = phi_sequence(d, path);
    REQUIRE(seq.size() == 4);
    double expect = diamond_rates(WeightVector{2.0, 2.0 / 3.0, 1.0, 1.0}).phi;
    for (double p : seq) CHECK(p == doctest::Approx(expect).epsilon(1e-12));

    Combiner m = arithmetic_mean(2);
    auto seq_m = phi_sequence(m, path);
    for (double p : seq_m) CHECK(p == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    CHECK(phi_sequence(m, {}).empty());
    CHECK_THROWS_AS(phi_sequence(d, std::vector<double>{0.0}), std::domain_error);
}

TEST_CASE("limit mean: linear combiner keeps the initial mean") {
    LimitMeanOptions opts;
    opts.pool_size = 20000;
    auto res = estimate_limit_mean(arithmetic_mean(2), DiscreteDist::two_point(0.0, 1.0), 1e-3, opts);
    CHECK(std::abs(res.limit - 0.5) <= 5e-3);
}

TEST_CASE("limit mean: fixed point of a constant start") {
    LimitMeanOptions opts;
    opts.pool_size = 2000;
    auto res = estimate_limit_mean(diamond(WeightVector{1, 1, 1, 1}), DiscreteDist::constant(0.75),
                                   1e-9, opts);
    CHECK(res.limit == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("limit mean: diamond settles inside the initial support") {
    LimitMeanOptions opts;
    opts.pool_size = 50000;
    opts.seed = 99;
    auto res = estimate_limit_mean(diamond(WeightVector{1, 1, 1, 1}),
                                   DiscreteDist::two_point(0.5, 1.5), 2e-4, opts);
    CHECK(res.limit > 0.5);
    CHECK(res.limit < 1.5);
    // oracle: exact-tree means at small n approach the same value with
    // shrinking increments
    SimConfig cfg{diamond(WeightVector{1, 1, 1, 1}), DiscreteDist::two_point(0.5, 1.5),
                  4, 20000, SimMode::exact_tree, 1234, 2};
    auto tree = run_exact_tree(cfg);
    double inc1 = std::abs(tree[1].c_n - tree[0].c_n);
    double inc3 = std::abs(tree[3].c_n - tree[2].c_n);
    CHECK(inc3 < inc1);
    CHECK(std::abs(tree.back().c_n - res.limit) < 0.02);
}

TEST_CASE("limit mean: non-convergence carries the path") {
    LimitMeanOptions opts;
    opts.pool_size = 2000;
    opts.max_levels = 3;
    bool threw = false;
    try {
        // impossible tolerance at a tiny budget
        estimate_limit_mean(arithmetic_mean(2), DiscreteDist::two_point(-1.0, 1.0), 1e-15, opts);
    } catch (const convergence_error& e) {
        threw = true;
        CHECK(e.path.size() == 4);
    }
    CHECK(threw);
}
