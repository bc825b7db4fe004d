#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "hierseq/combiner.hpp"
#include "hierseq/dist.hpp"

namespace hierseq {

struct UniformInterval {
    double lo, hi;
};

using InitialDist = std::variant<DiscreteDist, UniformInterval>;

enum class SimMode { pooled, exact_tree };

/// One reproducible experiment: iterate the distributional recursion
/// levels-many times from x0.
struct SimConfig {
    Combiner combiner;
    InitialDist x0;
    int levels = 8;
    std::size_t pool_size = 100000;
    SimMode mode = SimMode::pooled;
    std::uint64_t seed = 1;
    int workers = 1;
    /// exact-tree mode refuses runs with k^levels above this many leaf
    /// draws per sample.
    std::size_t tree_budget = std::size_t{1} << 24;
};

/// Per-level record: sample mean and sd, the standardized pool, its
/// distance to the standard normal, the linearization-residual variance
/// ratio Var(Z_n)/Var(X_{n+1}), and phi of the gradient at the level mean.
struct LevelStats {
    int n;
    double c_n;
    double sigma_n;
    EmpiricalDist w_samples;
    double d_n;
    double z_var_ratio;
    double phi_n;
};

/// Empirical Wasserstein fluctuation scale for a standard-normal pool of
/// size N. The 1.2 constant was calibrated against repeated-seed runs of
/// the midpoint-quantile estimator on exact normal pools (see
/// benchmarks/calibration notes in the README).
double noise_floor(std::size_t pool_size);
double combined_noise_floor(std::size_t n1, std::size_t n2);

/// Geometric-decay fit of the per-level distances. Levels within 3x the
/// noise floor are excluded from the fit window.
struct RateFit {
    double gamma_hat;            // exp(least-squares slope of log d_n on n)
    std::vector<double> ratios;  // raw d_{n+1} / d_n for every level
    int n_min, n_max;            // fitted window
    double noise_floor_est;
};

/// Pooled-resampling realization of the recursion: level n+1 holds N
/// evaluations of F on k-tuples drawn with replacement (fresh indices per
/// output) from the level-n pool. Deterministic given (seed, workers);
/// chunked seeding actually makes the result independent of workers.
std::vector<LevelStats> run_pooled(const SimConfig& cfg);

/// Unbiased oracle: every level-n sample is built from k^n independent X_0
/// draws by bottom-up tree evaluation. Exponential cost, guarded by
/// cfg.tree_budget.
std::vector<LevelStats> run_exact_tree(const SimConfig& cfg);

/// Var(Z_n)/Var(X_{n+1}) per retained pool, with Z_n = F(X_n) - alpha_n . X_n
/// sampled on fresh k-tuples and alpha_n the gradient at the pool mean.
std::vector<double> perturbation_stats(std::span<const std::vector<double>> pools,
                                       const Combiner& combiner, std::uint64_t seed,
                                       std::size_t n_tuples, int workers = 1);

RateFit fit_rate(std::span<const LevelStats> stats,
                 std::optional<std::pair<int, int>> window = std::nullopt);

namespace detail {

/// N i.i.d. draws from the initial distribution (chunk-seeded).
std::vector<double> sample_initial_pool(const InitialDist& x0, std::size_t n, std::uint64_t seed,
                                        int workers);

/// One pooled transition. When `alpha` is nonempty, also emits the
/// linearization residuals Z = F(tuple) - alpha . tuple into z_out.
std::vector<double> advance_pool(std::span<const double> prev, const Combiner& combiner,
                                 std::size_t n_out, int level, std::uint64_t seed, int workers,
                                 std::vector<double>* z_out = nullptr,
                                 std::span<const double> alpha = {});

double pool_mean(std::span<const double> pool);
double pool_sd(std::span<const double> pool, double mean);

/// (x - mean)/sd with a single residual-mean correction pass so the result
/// has mean below 1e-12 even for large pools.
std::vector<double> standardize(std::span<const double> pool, double mean, double sd);

}  // namespace detail

}  // namespace hierseq
