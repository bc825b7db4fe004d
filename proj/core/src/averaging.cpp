#include "hierseq/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "hierseq/rng.hpp"

namespace hierseq {

namespace {

constexpr std::uint64_t kTagProp1 = 101, kTagProp2 = 102, kTagProp3 = 103, kTagHomog = 104;

using EvalFn = std::function<double(std::span<const double>)>;

void validate_box(const Combiner& c, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("check_averaging: box must satisfy lo < hi");
    if (!c.domain().contains(lo) || !c.domain().contains(hi))
        throw std::domain_error("check_averaging: box [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "] not inside the combiner domain");
}

struct Battery {
    EvalFn f;
    int k;
    double lo, hi;
    std::size_t n_samples;
    std::uint64_t seed;
    double tau;  // strictness margin 1e-12 * (hi - lo)

    double draw(std::mt19937_64& rng) const { return lo + uniform01(rng) * (hi - lo); }

    // Property 1 (and its strict form on nonconstant inputs).
    void run_bounds(PropertyResult& p1, PropertyResult& s1) const {
        std::mt19937_64 rng(derive_seed(seed, 0, 0, kTagProp1));
        std::vector<double> x(static_cast<std::size_t>(k));
        for (std::size_t s = 0; s < n_samples; ++s) {
            for (auto& xi : x) xi = draw(rng);
            // A third of the draws get deliberate ties to exercise the
            // nonconstant-input qualifier.
            if (k >= 2 && s % 3 == 0) x[static_cast<std::size_t>(bounded_uint(rng, k))] = x[0];
            double v = f(x);
            auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
            double mn = *mn_it, mx = *mx_it;
            if (v < mn || v > mx) {
                p1.pass = false;
                p1.witness = x;
                p1.min_margin = std::min(v - mn, mx - v);
                return;
            }
            p1.min_margin = std::min(p1.min_margin, std::min(v - mn, mx - v));
            if (mx > mn) {
                double margin = std::min(v - mn, mx - v);
                if (s1.pass && margin <= tau) {
                    s1.pass = false;
                    s1.witness = x;
                    s1.min_margin = margin;
                } else {
                    s1.min_margin = std::min(s1.min_margin, margin);
                }
            }
        }
    }

    // Property 2 (and its strict form when some coordinate strictly grows).
    void run_monotone(PropertyResult& p2, PropertyResult& s2) const {
        std::mt19937_64 rng(derive_seed(seed, 0, 0, kTagProp2));
        std::vector<double> x(static_cast<std::size_t>(k)), y(static_cast<std::size_t>(k));
        for (std::size_t s = 0; s < n_samples; ++s) {
            for (auto& xi : x) xi = draw(rng);
            y = x;
            bool single = (s % 2 == 0);
            bool grew = false;
            if (single) {
                auto i = static_cast<std::size_t>(bounded_uint(rng, k));
                y[i] = x[i] + uniform01(rng) * (hi - x[i]);
                grew = y[i] > x[i];
            } else {
                for (std::size_t i = 0; i < y.size(); ++i) {
                    if (rng() & 1) {
                        y[i] = x[i] + uniform01(rng) * (hi - x[i]);
                        grew = grew || y[i] > x[i];
                    }
                }
            }
            double fx = f(x), fy = f(y);
            if (fx > fy) {
                p2.pass = false;
                p2.witness = x;
                p2.min_margin = fy - fx;
                return;
            }
            if (grew) {
                // Only well-separated pairs test strictness; a vanishing
                // increment legitimately moves F by less than the margin.
                double max_step = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) max_step = std::max(max_step, y[i] - x[i]);
                if (max_step >= 0.01 * (hi - lo)) {
                    if (s2.pass && fy - fx <= tau) {
                        s2.pass = false;
                        s2.witness = x;
                        s2.min_margin = fy - fx;
                    } else {
                        s2.min_margin = std::min(s2.min_margin, fy - fx);
                    }
                }
            }
        }
    }

    // Property 3: for random lo <= x < y <= hi and every ordered index pair
    // (i1, i2), some assignment of the remaining coordinates to {x, y} must
    // put F strictly between x and y. Assignments are enumerated exactly
    // (2^(k-2) of them).
    void run_selection(PropertyResult& p3) const {
        if (k < 2) return;  // vacuous without two distinct indices
        std::mt19937_64 rng(derive_seed(seed, 0, 0, kTagProp3));
        std::vector<double> v(static_cast<std::size_t>(k));
        std::vector<int> free_idx;
        const std::size_t masks = std::size_t{1} << (k - 2);
        // Enumeration dominates the cost, so the sample budget is spread
        // over the pair loop.
        std::size_t outer = std::max<std::size_t>(1, n_samples / masks);
        for (std::size_t s = 0; s < outer; ++s) {
            double a = draw(rng), b = draw(rng);
            if (a > b) std::swap(a, b);
            if (b - a < 0.01 * (hi - lo)) {
                b = std::min(hi, a + 0.01 * (hi - lo) + uniform01(rng) * (hi - lo) * 0.5);
                if (!(a < b)) continue;
            }
            for (int i1 = 0; i1 < k; ++i1) {
                for (int i2 = 0; i2 < k; ++i2) {
                    if (i1 == i2) continue;
                    free_idx.clear();
                    for (int i = 0; i < k; ++i)
                        if (i != i1 && i != i2) free_idx.push_back(i);
                    bool found = false;
                    double best_margin = -std::numeric_limits<double>::infinity();
                    std::vector<double> best = v;
                    for (std::size_t mask = 0; mask < masks && !found; ++mask) {
                        v[static_cast<std::size_t>(i1)] = a;
                        v[static_cast<std::size_t>(i2)] = b;
                        for (std::size_t j = 0; j < free_idx.size(); ++j)
                            v[static_cast<std::size_t>(free_idx[j])] = (mask >> j) & 1 ? b : a;
                        double fv = f(v);
                        double margin = std::min(fv - a, b - fv);
                        if (margin > best_margin) {
                            best_margin = margin;
                            best = v;
                        }
                        if (fv > a + tau && fv < b - tau) found = true;
                    }
                    if (!found) {
                        p3.pass = false;
                        p3.witness = best;
                        p3.witness_lo = a;
                        p3.witness_hi = b;
                        p3.witness_i1 = i1;
                        p3.witness_i2 = i2;
                        p3.min_margin = best_margin;
                        return;
                    }
                    p3.min_margin = std::min(p3.min_margin, best_margin);
                }
            }
        }
    }
};

}  // namespace

AveragingReport check_averaging(const Combiner& c, double box_lo, double box_hi,
                                std::size_t n_samples, std::uint64_t seed) {
    validate_box(c, box_lo, box_hi);
    if (n_samples < 1) throw std::invalid_argument("check_averaging: n_samples must be >= 1");

    AveragingReport rep;
    rep.samples_used = n_samples;
    rep.rng_seed = seed;

    const double tau = 1e-12 * (box_hi - box_lo);
    auto raw = [&c](std::span<const double> x) { return c.eval(x); };
    Battery battery{raw, c.arity(), box_lo, box_hi, n_samples, seed, tau};
    battery.run_bounds(rep.property1, rep.strict1);
    battery.run_monotone(rep.property2, rep.strict2);
    battery.run_selection(rep.property3);

    // Scaled averaging: the same axioms for F / F(1).
    rep.scaled_pass = false;
    try {
        std::vector<double> one(static_cast<std::size_t>(c.arity()), 1.0);
        double f1 = c.eval(one);
        if (f1 != 0.0) {
            auto scaled = [&c, f1](std::span<const double> x) { return c.eval(x) / f1; };
            PropertyResult p1, p2, p3, s1, s2;
            Battery sb{scaled, c.arity(), box_lo, box_hi, n_samples, seed, tau};
            sb.run_bounds(p1, s1);
            sb.run_monotone(p2, s2);
            sb.run_selection(p3);
            rep.scaled_pass = p1.pass && p2.pass && p3.pass;
        }
    } catch (const std::domain_error&) {
        // 1 outside the domain: scaled form not checkable.
    }

    rep.homogeneity = check_homogeneity(c, box_lo, box_hi, n_samples, seed);
    return rep;
}

HomogeneityResult check_homogeneity(const Combiner& c, double box_lo, double box_hi,
                                    std::size_t n_samples, std::uint64_t seed) {
    validate_box(c, box_lo, box_hi);
    std::mt19937_64 rng(derive_seed(seed, 0, 0, kTagHomog));
    HomogeneityResult res;
    std::vector<double> x(static_cast<std::size_t>(c.arity()));
    std::vector<double> tx(x.size());
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (auto& xi : x) xi = box_lo + uniform01(rng) * (box_hi - box_lo);
        // Confine t so that t*x stays inside the domain (cone domains leave
        // the full [1/2, 2] range available).
        double t_lo = 0.5, t_hi = 2.0;
        for (double xi : x) {
            if (xi > 0.0) {
                t_hi = std::min(t_hi, c.domain().hi / xi);
                if (c.domain().lo > 0.0) t_lo = std::max(t_lo, c.domain().lo / xi);
            } else if (xi < 0.0) {
                t_hi = std::min(t_hi, c.domain().lo / xi);
            }
        }
        if (!(t_lo < t_hi)) continue;
        double t = t_lo + uniform01(rng) * (t_hi - t_lo);
        for (std::size_t i = 0; i < x.size(); ++i) tx[i] = t * x[i];
        double lhs = c.eval(tx);
        double rhs = t * c.eval(x);
        double dev = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
        if (dev > res.max_rel_dev) {
            res.max_rel_dev = dev;
            res.witness = x;
            res.witness_t = t;
        }
    }
    res.pass = res.max_rel_dev <= 1e-9;
    return res;
}

}  // namespace hierseq
