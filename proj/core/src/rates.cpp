#include "hierseq/rates.hpp"

#include <cmath>
#include <stdexcept>

#include "hierseq/engine.hpp"

namespace hierseq {

namespace {

double kahan(std::span<const double> xs, double (*f)(double)) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = f(x) - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

double abs_cube(double x) { return std::abs(x) * x * x; }
double square(double x) { return x * x; }

}  // namespace

double phi_from_alpha(std::span<const double> alpha) {
    if (alpha.empty()) throw std::invalid_argument("phi_from_alpha: empty gradient");
    double s2 = kahan(alpha, square);
    if (!(s2 > 0.0)) throw std::invalid_argument("phi_from_alpha: zero gradient is degenerate");
    double s3 = kahan(alpha, abs_cube);
    return s3 / (s2 * std::sqrt(s2));
}

double phi_from_alpha(std::initializer_list<double> alpha) {
    return phi_from_alpha(std::span<const double>(alpha.begin(), alpha.size()));
}

RateReport rate_report_from_alpha(std::span<const double> alpha, double limit_mean) {
    RateReport r;
    r.limit_mean = limit_mean;
    r.alpha.assign(alpha.begin(), alpha.end());
    r.lambda = std::sqrt(kahan(alpha, square));
    r.phi = phi_from_alpha(alpha);
    r.phi_lower_bound = 1.0 / std::sqrt(static_cast<double>(alpha.size()));
    r.phi_upper_bound = 1.0;

    double sum = 0.0;
    bool nonneg = true;
    int nonzero = 0;
    for (double a : alpha) {
        sum += a;
        if (a < 0.0) nonneg = false;
        if (a != 0.0) ++nonzero;
    }
    r.convex_weights = nonneg && std::abs(sum - 1.0) <= 1e-9;
    r.lambda_le_phi = r.convex_weights && r.lambda <= r.phi + 1e-12;
    r.basis_vector = nonzero == 1;
    return r;
}

RateReport diamond_rates(const WeightVector& w) {
    if (w.size() != 4) throw std::invalid_argument("diamond_rates: needs exactly 4 weights");
    const double i1 = 1.0 / w[0], i2 = 1.0 / w[1], i3 = 1.0 / w[2], i4 = 1.0 / w[3];
    const double s12 = i1 + i2, s34 = i3 + i4;

    std::vector<double> alpha = {i1 / (s12 * s12), i2 / (s12 * s12), i3 / (s34 * s34),
                                 i4 / (s34 * s34)};

    // Closed forms: lambda^2 and phi as explicit weight functions.
    const double lambda2 =
        (i1 * i1 + i2 * i2) / (s12 * s12 * s12 * s12) + (i3 * i3 + i4 * i4) / (s34 * s34 * s34 * s34);
    const double lambda = std::sqrt(lambda2);
    const double cube_sum = (i1 * i1 * i1 + i2 * i2 * i2) / std::pow(s12, 6) +
                            (i3 * i3 * i3 + i4 * i4 * i4) / std::pow(s34, 6);
    const double phi = cube_sum / (lambda2 * lambda);

    RateReport r = rate_report_from_alpha(alpha);
    r.lambda = lambda;
    r.phi = phi;
    r.lambda_le_phi = r.convex_weights && r.lambda <= r.phi + 1e-12;
    return r;
}

WeightVector side_weighted_family(double w) {
    if (!(w >= 1.0) || !(w < 2.0))
        throw std::invalid_argument("side_weighted_family: w must lie in [1, 2); w = 2 zeroes a weight");
    return WeightVector({w, w, 2.0 - w, 2.0 - w});
}

WeightVector t_family(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("t_family: t must be positive");
    const double u = 1.0 / (1.0 / t + t);           // series branch value at 1
    const double inner = 1.0 / (1.0 - u) - t / (t + 1.0);
    if (!(inner > 0.0) || !std::isfinite(inner))
        throw std::invalid_argument("t_family: degenerate s at t = " + std::to_string(t));
    const double s = 1.0 / inner;
    return WeightVector({1.0 + 1.0 / t, s, t, 1.0 / t});
}

std::vector<double> phi_sequence(const Combiner& c, std::span<const double> mean_path) {
    std::vector<double> out;
    out.reserve(mean_path.size());
    std::vector<double> pt(static_cast<std::size_t>(c.arity()));
    for (double cn : mean_path) {
        if (!c.domain().contains_interior(cn))
            throw std::domain_error("phi_sequence: mean " + std::to_string(cn) +
                                    " not interior to the combiner domain");
        std::fill(pt.begin(), pt.end(), cn);
        out.push_back(phi_from_alpha(c.gradient(pt)));
    }
    return out;
}

LimitMeanResult estimate_limit_mean(const Combiner& c, const DiscreteDist& x0, double tolerance,
                                    const LimitMeanOptions& opts) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("estimate_limit_mean: tolerance must be positive");
    std::vector<double> pool =
        detail::sample_initial_pool(x0, opts.pool_size, opts.seed, opts.workers);
    std::vector<double> path = {detail::pool_mean(pool)};
    for (int n = 0; n < opts.max_levels; ++n) {
        pool = detail::advance_pool(pool, c, opts.pool_size, n, opts.seed, opts.workers);
        path.push_back(detail::pool_mean(pool));
        if (std::abs(path.back() - path[path.size() - 2]) < tolerance)
            return {path.back(), std::move(path)};
    }
    throw convergence_error("estimate_limit_mean: mean path did not settle within " +
                                std::to_string(opts.max_levels) + " levels",
                            std::move(path));
}

}  // namespace hierseq
