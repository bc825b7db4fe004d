#pragma once

#include <cstdint>
#include <vector>

#include "hierseq/combiner.hpp"

namespace hierseq {

/// Outcome of one randomized property check. A failed check always carries
/// a concrete input on which the violated inequality reproduces.
struct PropertyResult {
    bool pass = true;
    std::vector<double> witness;  // the offending input vector, empty when pass
    double witness_lo = 0.0;      // the x < y pair behind a property-3 witness
    double witness_hi = 0.0;
    int witness_i1 = -1;
    int witness_i2 = -1;
    double min_margin = std::numeric_limits<double>::infinity();
};

struct HomogeneityResult {
    bool pass = true;
    double max_rel_dev = 0.0;
    std::vector<double> witness;
    double witness_t = 1.0;
};

/// Certificate from the randomized averaging checker. This is a falsifier,
/// not a prover: passing flags mean no violation was found at the sample
/// budget, while failures are sound and reproducible from the witness.
struct AveragingReport {
    PropertyResult property1;  // min <= F <= max
    PropertyResult property2;  // coordinatewise monotone
    PropertyResult property3;  // strict betweenness selection
    PropertyResult strict1;    // strict form of 1 on nonconstant inputs
    PropertyResult strict2;    // strict form of 2 when a coordinate strictly grows
    bool scaled_pass = false;  // F / F(1) satisfies properties 1-3
    HomogeneityResult homogeneity;
    std::size_t samples_used = 0;
    std::uint64_t rng_seed = 0;

    bool averaging() const { return property1.pass && property2.pass && property3.pass; }
    bool strictly_averaging() const { return averaging() && strict1.pass && strict2.pass; }
};

/// Randomized check of the averaging axioms on box^k. Property 3 enumerates
/// all 2^(k-2) assignments of the free coordinates exactly. Strict
/// inequalities are asserted with margin 1e-12 * (b - a) so that rounding
/// cannot produce false failures. Deterministic given (combiner, box, seed).
AveragingReport check_averaging(const Combiner& c, double box_lo, double box_hi,
                                std::size_t n_samples = 10000, std::uint64_t seed = 1);

/// Verifies F(t x) = t F(x) over random t in [1/2, 2] and random x in the
/// box, reporting the worst relative deviation.
HomogeneityResult check_homogeneity(const Combiner& c, double box_lo, double box_hi,
                                    std::size_t n_samples = 10000, std::uint64_t seed = 1);

}  // namespace hierseq
