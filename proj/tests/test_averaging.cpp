#include "hierseq/averaging.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"

using namespace hierseq;

TEST_CASE("diamond passes every averaging check, strictly") {
    Combiner d = diamond(WeightVector{1, 1, 1, 1});
    AveragingReport rep = check_averaging(d, 0.5, 2.0, 4000, 71);
    CHECK(rep.property1.pass);
    CHECK(rep.property2.pass);
    CHECK(rep.property3.pass);
    CHECK(rep.strict1.pass);
    CHECK(rep.strict2.pass);
    CHECK(rep.scaled_pass);
    CHECK(rep.homogeneity.pass);
    CHECK(rep.strictly_averaging());
}

TEST_CASE("unnormalized diamond is still scaled strictly averaging") {
    // F(1) = 1.18...; properties 1 and 3 fail for the raw map but hold
    // after scale normalization
    Combiner d = diamond(WeightVector{1.5, 0.7, 1.0, 2.4});
    AveragingReport rep = check_averaging(d, 0.5, 2.0, 4000, 73);
    CHECK(rep.scaled_pass);
    CHECK(rep.homogeneity.pass);
    CHECK_FALSE(rep.property1.pass);  // raw map exceeds max on constant-ish inputs
}

TEST_CASE("coordinate min fails the selection property with a sound witness") {
    Combiner m = coordinate_min(2);
    AveragingReport rep = check_averaging(m, 0.0, 1.0, 2000, 77);
    CHECK(rep.property1.pass);
    CHECK(rep.property2.pass);
    CHECK_FALSE(rep.property3.pass);
    CHECK_FALSE(rep.strict1.pass);

    // witness reproduces: F pinned to an endpoint for every assignment
    REQUIRE(rep.property3.witness.size() == 2);
    double f = m.eval(rep.property3.witness);
    bool inside = f > rep.property3.witness_lo && f < rep.property3.witness_hi;
    CHECK_FALSE(inside);
}

TEST_CASE("projection fails the selection property") {
    Combiner proj("proj", 2, Domain::all_reals(),
                  [](std::span<const double> x) { return x[0]; });
    AveragingReport rep = check_averaging(proj, 0.0, 1.0, 2000, 79);
    CHECK(rep.property1.pass);
    CHECK(rep.property2.pass);
    CHECK_FALSE(rep.property3.pass);
}

TEST_CASE("min at higher arity also fails selection") {
    AveragingReport rep = check_averaging(coordinate_min(4), 0.0, 1.0, 2000, 83);
    CHECK(rep.property1.pass);
    CHECK(rep.property2.pass);
    CHECK_FALSE(rep.property3.pass);
}

TEST_CASE("homogeneity: diamond and Lp pass, a quadratic map fails") {
    HomogeneityResult d = check_homogeneity(diamond(WeightVector{1, 1, 1, 1}), 0.5, 2.0, 4000, 87);
    CHECK(d.pass);
    CHECK(d.max_rel_dev <= 1e-12);

    for (double p : {1.0, -1.0, 2.0, -2.0, 3.5}) {
        HomogeneityResult r =
            check_homogeneity(lp_combiner(WeightVector{1.0, 0.5}, p), 0.5, 2.0, 2000, 89);
        CHECK(r.pass);
    }

    Combiner quad("quad", 2, Domain::box(0.0, 1.0),
                  [](std::span<const double> x) { return 0.5 * (x[0] + x[1] * x[1]); });
    HomogeneityResult r = check_homogeneity(quad, 0.0, 1.0, 2000, 91);
    CHECK_FALSE(r.pass);
    CHECK(r.max_rel_dev > 1e-3);
    // witness reproduces
    REQUIRE(r.witness.size() == 2);
    std::vector<double> tx = {r.witness_t * r.witness[0], r.witness_t * r.witness[1]};
    double dev = std::abs(quad.eval(tx) - r.witness_t * quad.eval(r.witness));
    CHECK(dev > 0.0);
}

TEST_CASE("reports are deterministic given the seed") {
    Combiner d = diamond(WeightVector{1.5, 1.5, 0.5, 0.5});
    AveragingReport a = check_averaging(d, 0.5, 2.0, 1000, 93);
    AveragingReport b = check_averaging(d, 0.5, 2.0, 1000, 93);
    CHECK(a.property1.min_margin == b.property1.min_margin);
    CHECK(a.strict1.min_margin == b.strict1.min_margin);
    CHECK(a.property3.min_margin == b.property3.min_margin);
    CHECK(a.homogeneity.max_rel_dev == b.homogeneity.max_rel_dev);
    AveragingReport c = check_averaging(d, 0.5, 2.0, 1000, 94);
    CHECK(a.property1.min_margin != c.property1.min_margin);
}

TEST_CASE("compositions of strictly averaging parts pass the strict checks") {
    // L1 over L-1 pairs (the lattice combiner) and the L2 / L-2 variant
    CompositionSpec spec1{lp_combiner(WeightVector{1, 1}, 1.0),
                          {lp_combiner(WeightVector{1, 1}, -1.0),
                           lp_combiner(WeightVector{1, 1}, -1.0)},
                          {{0, 1}, {2, 3}},
                          std::nullopt};
    CompositionSpec spec2{lp_combiner(WeightVector{1, 1}, 2.0),
                          {lp_combiner(WeightVector{1, 1}, -2.0),
                           lp_combiner(WeightVector{1, 1}, -2.0)},
                          {{0, 1}, {2, 3}},
                          std::nullopt};
    for (const auto& spec : {spec1, spec2}) {
        AveragingReport rep = check_averaging(compose(spec), 0.5, 2.0, 3000, 95);
        CHECK(rep.strictly_averaging());
        CHECK(rep.scaled_pass);
        CHECK(rep.homogeneity.pass);
    }
}

TEST_CASE("box validation") {
    Combiner d = diamond(WeightVector{1, 1, 1, 1});
    CHECK_THROWS_AS(check_averaging(d, -1.0, 2.0, 100, 1), std::domain_error);
    CHECK_THROWS_AS(check_averaging(d, 0.0, 2.0, 100, 1), std::domain_error);  // 0 excluded
    CHECK_THROWS_AS(check_averaging(d, 2.0, 0.5, 100, 1), std::invalid_argument);
}
