#pragma once

#include <random>
#include <vector>

#include "hierseq/rng.hpp"

namespace hierseq::testutil {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t k, double lo, double hi) {
    std::vector<double> x(k);
    for (auto& xi : x) xi = lo + uniform01(rng) * (hi - lo);
    return x;
}

/// Random convex weights: nonnegative entries summing to one.
inline std::vector<double> random_convex(std::mt19937_64& rng, std::size_t k) {
    std::vector<double> x(k);
    double s = 0.0;
    for (auto& xi : x) {
        xi = uniform01(rng);
        s += xi;
    }
    for (auto& xi : x) xi /= s;
    return x;
}

/// Random mean-zero discrete law with the requested number of atoms.
inline std::pair<std::vector<double>, std::vector<double>> random_centered_atoms(
    std::mt19937_64& rng, std::size_t n_atoms) {
    std::vector<double> atoms(n_atoms), probs(n_atoms);
    double prev = -5.0 + uniform01(rng);
    for (auto& a : atoms) {
        a = prev + 0.2 + 2.0 * uniform01(rng);
        prev = a;
    }
    double s = 0.0;
    for (auto& p : probs) {
        p = 0.05 + uniform01(rng);
        s += p;
    }
    for (auto& p : probs) p /= s;
    double mean = 0.0;
    for (std::size_t i = 0; i < n_atoms; ++i) mean += probs[i] * atoms[i];
    for (auto& a : atoms) a -= mean;
    return {atoms, probs};
}

}  // namespace hierseq::testutil
