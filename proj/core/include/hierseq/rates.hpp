#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hierseq/combiner.hpp"
#include "hierseq/dist.hpp"

namespace hierseq {

/// Convergence-rate constants of a combiner at its limiting mean.
///
/// phi is the cube-sum ratio sum|a_i|^3 / (sum a_i^2)^(3/2); it always lies
/// in [1/sqrt(k), 1], hits the lower bound iff all |a_i| are equal and the
/// upper bound iff alpha is a multiple of a standard basis vector. For
/// convex weights (a_i >= 0 summing to 1) additionally lambda <= phi.
struct RateReport {
    double limit_mean;             // NaN when not estimated
    std::vector<double> alpha;     // gradient at the limiting constant vector
    double lambda;                 // Euclidean norm of alpha
    double phi;                    // cube-sum ratio
    double phi_lower_bound;        // 1/sqrt(k)
    double phi_upper_bound;        // 1
    bool convex_weights;           // alpha_i >= 0 and sum alpha_i = 1
    bool lambda_le_phi;            // checked only when convex_weights
    bool basis_vector;             // alpha is (a multiple of) a basis vector
};

struct convergence_error : std::runtime_error {
    convergence_error(const std::string& what, std::vector<double> mean_path)
        : std::runtime_error(what), path(std::move(mean_path)) {}
    std::vector<double> path;
};

/// phi = sum|a_i|^3 / (sum a_i^2)^(3/2). Compensated summation keeps the
/// closed-form family values exact to 1e-12. Rejects the zero vector.
double phi_from_alpha(std::span<const double> alpha);
double phi_from_alpha(std::initializer_list<double> alpha);

/// Assembles a RateReport from a gradient vector.
RateReport rate_report_from_alpha(std::span<const double> alpha,
                                  double limit_mean = std::numeric_limits<double>::quiet_NaN());

/// Closed-form rate constants for the diamond lattice: the gradient at any
/// constant vector, lambda, and phi as explicit functions of the weights.
RateReport diamond_rates(const WeightVector& w);

/// Side-equally-weighted diamond family (w, w, 2-w, 2-w), w in [1, 2).
/// Satisfies F(1) = 1 exactly; w = 2 would zero a weight and is rejected.
WeightVector side_weighted_family(double w);

/// One-parameter diamond family (1 + 1/t, s, t, 1/t) with s chosen so that
/// F(1) = 1; phi sweeps from 11*sqrt(2)/27 at t = 1 toward 1 as t grows.
WeightVector t_family(double t);

/// phi_n along a mean path: phi of the gradient at each c_n * 1. Constant
/// for the diamond, whose diagonal gradient does not depend on c_n.
std::vector<double> phi_sequence(const Combiner& c, std::span<const double> mean_path);

struct LimitMeanOptions {
    std::size_t pool_size = 100000;
    int max_levels = 60;
    std::uint64_t seed = 20040914;
    int workers = 1;
};

struct LimitMeanResult {
    double limit;
    std::vector<double> path;  // simulated c_n, level 0 upward
};

/// Numerically converged limit of the simulated mean path. Simulation, not
/// fixed-point iteration: the limiting mean is a distributional quantity
/// and E F(X) differs from F(EX) for nonlinear F.
LimitMeanResult estimate_limit_mean(const Combiner& c, const DiscreteDist& x0, double tolerance,
                                    const LimitMeanOptions& opts = {});

}  // namespace hierseq
