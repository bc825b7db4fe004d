#include "hierseq/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hierseq/rates.hpp"
#include "hierseq/rng.hpp"

namespace hierseq {

namespace {

constexpr std::uint64_t kTagInit = 1, kTagAdvance = 2, kTagTree = 3, kTagPerturb = 4;

// Fixed chunk size: the work split (and thus every random stream) is
// independent of the worker count, so identical seeds give bit-identical
// pools no matter how many threads run.
constexpr std::size_t kChunk = 8192;

template <typename Fn>
void for_each_chunk(std::size_t total, int workers, Fn&& fn) {
    const std::size_t n_chunks = (total + kChunk - 1) / kChunk;
    if (workers <= 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c, c * kChunk, std::min(total, (c + 1) * kChunk));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            try {
                fn(c, c * kChunk, std::min(total, (c + 1) * kChunk));
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    int n_threads = std::min<int>(workers, static_cast<int>(n_chunks));
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failed.load()) std::rethrow_exception(error);
}

double draw_initial(const InitialDist& x0, std::mt19937_64& rng) {
    if (const auto* d = std::get_if<DiscreteDist>(&x0)) return d->quantile(uniform01(rng));
    const auto& u = std::get<UniformInterval>(x0);
    return u.lo + uniform01(rng) * (u.hi - u.lo);
}

std::string format_tuple(std::span<const double> x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

double pool_variance(std::span<const double> pool, double mean) {
    double ss = 0.0, c = 0.0;
    for (double x : pool) {
        double d = x - mean;
        double y = d * d - c;
        double t = ss + y;
        c = (t - ss) - y;
        ss = t;
    }
    return pool.size() > 1 ? ss / static_cast<double>(pool.size() - 1) : 0.0;
}

}  // namespace

namespace detail {

double pool_mean(std::span<const double> pool) {
    double s = 0.0, c = 0.0;
    for (double x : pool) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s / static_cast<double>(pool.size());
}

double pool_sd(std::span<const double> pool, double mean) {
    return std::sqrt(pool_variance(pool, mean));
}

std::vector<double> standardize(std::span<const double> pool, double mean, double sd) {
    std::vector<double> w(pool.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (pool[i] - mean) / sd;
    double resid = pool_mean(w);
    for (auto& wi : w) wi -= resid;
    return w;
}

std::vector<double> sample_initial_pool(const InitialDist& x0, std::size_t n, std::uint64_t seed,
                                        int workers) {
    if (const auto* u = std::get_if<UniformInterval>(&x0)) {
        if (!(u->lo < u->hi))
            throw std::invalid_argument("sample_initial_pool: uniform interval needs lo < hi");
    }
    std::vector<double> pool(n);
    for_each_chunk(n, workers, [&](std::size_t chunk, std::size_t b, std::size_t e) {
        std::mt19937_64 rng(derive_seed(seed, 0, chunk, kTagInit));
        for (std::size_t i = b; i < e; ++i) pool[i] = draw_initial(x0, rng);
    });
    return pool;
}

std::vector<double> advance_pool(std::span<const double> prev, const Combiner& combiner,
                                 std::size_t n_out, int level, std::uint64_t seed, int workers,
                                 std::vector<double>* z_out, std::span<const double> alpha) {
    if (prev.empty()) throw std::invalid_argument("advance_pool: empty source pool");
    const auto k = static_cast<std::size_t>(combiner.arity());
    std::vector<double> out(n_out);
    if (z_out) z_out->assign(n_out, 0.0);
    for_each_chunk(n_out, workers, [&](std::size_t chunk, std::size_t b, std::size_t e) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(level), chunk, kTagAdvance));
        std::vector<double> tuple(k);
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t j = 0; j < k; ++j)
                tuple[j] = prev[bounded_uint(rng, prev.size())];
            double v;
            try {
                v = combiner.eval(tuple);
            } catch (const std::domain_error& err) {
                throw std::domain_error("level " + std::to_string(level) + ", tuple " +
                                        format_tuple(tuple) + ": " + err.what());
            }
            out[i] = v;
            if (z_out) {
                double lin = 0.0;
                for (std::size_t j = 0; j < k; ++j) lin += alpha[j] * tuple[j];
                (*z_out)[i] = v - lin;
            }
        }
    });
    return out;
}

}  // namespace detail

double noise_floor(std::size_t pool_size) { return 1.2 / std::sqrt(static_cast<double>(pool_size)); }

double combined_noise_floor(std::size_t n1, std::size_t n2) { return noise_floor(std::min(n1, n2)); }

namespace {

void validate_config(const SimConfig& cfg) {
    if (cfg.levels < 0) throw std::invalid_argument("SimConfig: levels must be >= 0");
    if (cfg.mode == SimMode::pooled && cfg.pool_size < 1000)
        throw std::invalid_argument("SimConfig: pooled mode requires pool_size >= 1000");
    if (cfg.pool_size < 2) throw std::invalid_argument("SimConfig: pool_size too small");
    if (cfg.workers < 1) throw std::invalid_argument("SimConfig: workers must be >= 1");
    if (const auto* d = std::get_if<DiscreteDist>(&cfg.x0)) {
        for (double a : d->atoms())
            if (!cfg.combiner.domain().contains(a))
                throw std::domain_error("SimConfig: initial atom " + std::to_string(a) +
                                        " outside the combiner domain");
    } else {
        const auto& u = std::get<UniformInterval>(cfg.x0);
        if (!cfg.combiner.domain().contains(u.lo) || !cfg.combiner.domain().contains(u.hi))
            throw std::domain_error("SimConfig: initial interval outside the combiner domain");
    }
}

// Stats for the current raw pool plus the transition leaving it. The
// residual ratio of the final level comes from a fresh throwaway batch so
// every level records a finite value.
LevelStats make_level_stats(int n, std::span<const double> pool, std::span<const double> next_z,
                            std::span<const double> next_pool, double c_n, double sigma_n,
                            std::span<const double> alpha) {
    EmpiricalDist wd(detail::standardize(pool, c_n, sigma_n));
    double d_n = wasserstein_to_std_normal(wd);
    double z_var = pool_variance(next_z, detail::pool_mean(next_z));
    double x_var = pool_variance(next_pool, detail::pool_mean(next_pool));
    double ratio = x_var > 0.0 ? z_var / x_var : std::numeric_limits<double>::infinity();
    return LevelStats{n, c_n, sigma_n, std::move(wd), d_n, ratio, phi_from_alpha(alpha)};
}

std::vector<double> gradient_at_constant(const Combiner& c, double value) {
    std::vector<double> pt(static_cast<std::size_t>(c.arity()), value);
    return c.gradient(pt);
}

}  // namespace

std::vector<LevelStats> run_pooled(const SimConfig& cfg) {
    validate_config(cfg);
    std::vector<LevelStats> stats;
    stats.reserve(static_cast<std::size_t>(cfg.levels) + 1);

    std::vector<double> pool =
        detail::sample_initial_pool(cfg.x0, cfg.pool_size, cfg.seed, cfg.workers);
    for (int n = 0; n <= cfg.levels; ++n) {
        double c_n = detail::pool_mean(pool);
        double sigma_n = detail::pool_sd(pool, c_n);
        if (!(sigma_n > 0.0))
            throw std::domain_error("run_pooled: degenerate pool (zero variance) at level " +
                                    std::to_string(n) + "; cannot standardize");
        std::vector<double> alpha = gradient_at_constant(cfg.combiner, c_n);
        std::vector<double> z;
        std::vector<double> next = detail::advance_pool(pool, cfg.combiner, cfg.pool_size, n,
                                                        cfg.seed, cfg.workers, &z, alpha);
        stats.push_back(make_level_stats(n, pool, z, next, c_n, sigma_n, alpha));
        if (n < cfg.levels) pool = std::move(next);
    }
    return stats;
}

std::vector<LevelStats> run_exact_tree(const SimConfig& cfg) {
    validate_config(cfg);
    const auto k = static_cast<std::size_t>(cfg.combiner.arity());
    // Refuse k^levels beyond the leaf budget.
    std::size_t leaves = 1;
    for (int n = 0; n < cfg.levels; ++n) {
        if (leaves > cfg.tree_budget / k)
            throw std::invalid_argument("run_exact_tree: k^levels exceeds the tree budget (" +
                                        std::to_string(cfg.tree_budget) + " leaf draws)");
        leaves *= k;
    }

    std::vector<LevelStats> stats;
    stats.reserve(static_cast<std::size_t>(cfg.levels) + 1);
    std::size_t level_leaves = 1;
    for (int n = 0; n <= cfg.levels; ++n) {
        std::vector<double> pool(cfg.pool_size);
        for_each_chunk(cfg.pool_size, cfg.workers, [&](std::size_t chunk, std::size_t b, std::size_t e) {
            std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(n), chunk, kTagTree));
            std::vector<double> buf(level_leaves);
            for (std::size_t i = b; i < e; ++i) {
                for (auto& leaf : buf) leaf = draw_initial(cfg.x0, rng);
                std::size_t width = level_leaves;
                while (width > 1) {
                    width /= k;
                    for (std::size_t j = 0; j < width; ++j) {
                        std::span<const double> tuple(buf.data() + j * k, k);
                        try {
                            buf[j] = cfg.combiner.eval(tuple);
                        } catch (const std::domain_error& err) {
                            throw std::domain_error("level " + std::to_string(n) + ", tuple " +
                                                    format_tuple(tuple) + ": " + err.what());
                        }
                    }
                }
                pool[i] = buf[0];
            }
        });

        double c_n = detail::pool_mean(pool);
        double sigma_n = detail::pool_sd(pool, c_n);
        if (!(sigma_n > 0.0))
            throw std::domain_error("run_exact_tree: degenerate pool (zero variance) at level " +
                                    std::to_string(n) + "; cannot standardize");
        std::vector<double> alpha = gradient_at_constant(cfg.combiner, c_n);
        std::vector<double> z;
        std::vector<double> fresh = detail::advance_pool(pool, cfg.combiner, cfg.pool_size, n,
                                                          cfg.seed, cfg.workers, &z, alpha);
        stats.push_back(make_level_stats(n, pool, z, fresh, c_n, sigma_n, alpha));
        if (n < cfg.levels) level_leaves *= k;
    }
    return stats;
}

std::vector<double> perturbation_stats(std::span<const std::vector<double>> pools,
                                       const Combiner& combiner, std::uint64_t seed,
                                       std::size_t n_tuples, int workers) {
    std::vector<double> ratios;
    ratios.reserve(pools.size());
    for (std::size_t n = 0; n < pools.size(); ++n) {
        double c_n = detail::pool_mean(pools[n]);
        std::vector<double> alpha = gradient_at_constant(combiner, c_n);
        std::vector<double> z;
        std::vector<double> f = detail::advance_pool(pools[n], combiner, n_tuples,
                                                     static_cast<int>(n), splitmix64(seed ^ kTagPerturb),
                                                     workers, &z, alpha);
        double z_var = pool_variance(z, detail::pool_mean(z));
        double x_var = pool_variance(f, detail::pool_mean(f));
        ratios.push_back(x_var > 0.0 ? z_var / x_var : std::numeric_limits<double>::infinity());
    }
    return ratios;
}

RateFit fit_rate(std::span<const LevelStats> stats, std::optional<std::pair<int, int>> window) {
    if (stats.empty()) throw std::invalid_argument("fit_rate: no level statistics");
    const double floor = noise_floor(stats.front().w_samples.size());

    RateFit fit;
    fit.noise_floor_est = floor;
    fit.ratios.clear();
    for (std::size_t i = 0; i + 1 < stats.size(); ++i)
        fit.ratios.push_back(stats[i + 1].d_n / stats[i].d_n);

    std::vector<std::pair<int, double>> usable;
    for (const auto& s : stats) {
        if (window && (s.n < window->first || s.n > window->second)) continue;
        if (s.d_n > 3.0 * floor) usable.emplace_back(s.n, std::log(s.d_n));
    }
    if (usable.size() < 3)
        throw std::runtime_error("fit_rate: fewer than 3 levels above the noise floor (" +
                                 std::to_string(usable.size()) + " usable)");

    double sx = 0.0, sy = 0.0;
    for (auto [n, ld] : usable) {
        sx += n;
        sy += ld;
    }
    double mx = sx / static_cast<double>(usable.size());
    double my = sy / static_cast<double>(usable.size());
    double sxx = 0.0, sxy = 0.0;
    for (auto [n, ld] : usable) {
        sxx += (n - mx) * (n - mx);
        sxy += (n - mx) * (ld - my);
    }
    if (!(sxx > 0.0)) throw std::runtime_error("fit_rate: degenerate fit window");
    fit.gamma_hat = std::exp(sxy / sxx);
    fit.n_min = usable.front().first;
    fit.n_max = usable.back().first;
    return fit;
}

}  // namespace hierseq
