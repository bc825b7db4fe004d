#include "hierseq/dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hierseq {

namespace {

constexpr double kMassTol = 1e-12;

double kahan_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<double> atoms, std::vector<double> probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
    if (atoms_.empty() || atoms_.size() != probs_.size())
        throw std::invalid_argument("DiscreteDist: atoms and probs must be nonempty and equal-length");
    for (std::size_t i = 0; i + 1 < atoms_.size(); ++i)
        if (!(atoms_[i] < atoms_[i + 1]))
            throw std::invalid_argument("DiscreteDist: atoms must be strictly increasing");
    double total = 0.0;
    for (double p : probs_) {
        if (!(p > 0.0)) throw std::invalid_argument("DiscreteDist: probabilities must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > kMassTol)
        throw std::invalid_argument("DiscreteDist: probabilities sum to " + std::to_string(total) +
                                    ", expected 1");
    cum_.resize(probs_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        acc += probs_[i];
        cum_[i] = acc;
    }
    cum_.back() = 1.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) mean_ += probs_[i] * atoms_[i];
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        double dlt = atoms_[i] - mean_;
        variance_ += probs_[i] * dlt * dlt;
    }
}

DiscreteDist DiscreteDist::two_point(double a, double b) {
    return DiscreteDist({a, b}, {0.5, 0.5});
}

DiscreteDist DiscreteDist::constant(double c) { return DiscreteDist({c}, {1.0}); }

double DiscreteDist::cdf(double x) const {
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
    if (it == atoms_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double DiscreteDist::quantile(double u) const {
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) return atoms_.back();
    return atoms_[static_cast<std::size_t>(it - cum_.begin())];
}

DiscreteDist DiscreteDist::standardized() const {
    if (!(variance_ > 0.0)) throw std::domain_error("DiscreteDist: cannot standardize a degenerate law");
    double sd = std::sqrt(variance_);
    std::vector<double> a(atoms_.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (atoms_[i] - mean_) / sd;
    return DiscreteDist(std::move(a), probs_);
}

EmpiricalDist::EmpiricalDist(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw std::invalid_argument("EmpiricalDist: at least one sample required");
    std::sort(samples_.begin(), samples_.end());
    mean_ = kahan_sum(samples_) / static_cast<double>(samples_.size());
    if (samples_.size() > 1) {
        double ss = 0.0, c = 0.0;
        for (double x : samples_) {
            double d = x - mean_;
            double y = d * d - c;
            double t = ss + y;
            c = (t - ss) - y;
            ss = t;
        }
        sd_ = std::sqrt(ss / static_cast<double>(samples_.size() - 1));
    }
}

PiecewiseUniformDist::PiecewiseUniformDist(std::vector<double> knots, std::vector<double> densities)
    : knots_(std::move(knots)), densities_(std::move(densities)) {
    if (knots_.size() < 2 || densities_.size() + 1 != knots_.size())
        throw std::invalid_argument("PiecewiseUniformDist: need m+1 knots for m densities, m >= 1");
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
        if (!(knots_[i] < knots_[i + 1]))
            throw std::invalid_argument("PiecewiseUniformDist: knots must be strictly increasing");
    double total = 0.0;
    cum_.resize(knots_.size());
    cum_[0] = 0.0;
    for (std::size_t i = 0; i < densities_.size(); ++i) {
        if (densities_[i] < 0.0)
            throw std::invalid_argument("PiecewiseUniformDist: densities must be nonnegative");
        total += densities_[i] * (knots_[i + 1] - knots_[i]);
        cum_[i + 1] = total;
    }
    if (std::abs(total - 1.0) > kMassTol)
        throw std::invalid_argument("PiecewiseUniformDist: total mass " + std::to_string(total) +
                                    ", expected 1");
    cum_.back() = 1.0;
}

double PiecewiseUniformDist::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < densities_.size(); ++i) {
        double a = knots_[i], b = knots_[i + 1];
        m += densities_[i] * 0.5 * (b * b - a * a);
    }
    return m;
}

double PiecewiseUniformDist::cdf(double x) const {
    if (x <= knots_.front()) return 0.0;
    if (x >= knots_.back()) return 1.0;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    std::size_t j = static_cast<std::size_t>(it - knots_.begin()) - 1;
    return cum_[j] + densities_[j] * (x - knots_[j]);
}

double PiecewiseUniformDist::quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    for (std::size_t j = 0; j < densities_.size(); ++j) {
        if (u <= cum_[j + 1] && densities_[j] > 0.0)
            return knots_[j] + std::max(0.0, u - cum_[j]) / densities_[j];
    }
    return knots_.back();
}

QuantileFunction QuantileFunction::from_discrete(const DiscreteDist& d) {
    QuantileFunction q;
    double lo = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double hi = (i + 1 == d.size()) ? 1.0 : lo + d.probs()[i];
        q.segments_.push_back({lo, hi, d.atoms()[i], d.atoms()[i]});
        lo = hi;
    }
    return q;
}

QuantileFunction QuantileFunction::from_piecewise_uniform(const PiecewiseUniformDist& d) {
    QuantileFunction q;
    double lo = 0.0;
    for (std::size_t i = 0; i < d.densities().size(); ++i) {
        double mass = d.densities()[i] * (d.knots()[i + 1] - d.knots()[i]);
        if (mass <= 0.0) continue;  // zero-density piece is a jump in Q
        double hi = lo + mass;
        q.segments_.push_back({lo, hi, d.knots()[i], d.knots()[i + 1]});
        lo = hi;
    }
    if (!q.segments_.empty()) q.segments_.back().u1 = 1.0;
    return q;
}

QuantileFunction QuantileFunction::from_samples(const EmpiricalDist& d) {
    QuantileFunction q;
    const auto& xs = d.samples();
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double lo = static_cast<double>(i) / n;
        double hi = (i + 1 == xs.size()) ? 1.0 : static_cast<double>(i + 1) / n;
        q.segments_.push_back({lo, hi, xs[i], xs[i]});
    }
    return q;
}

double QuantileFunction::value(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    auto it = std::partition_point(segments_.begin(), segments_.end(),
                                   [u](const Segment& s) { return s.u1 < u; });
    if (it == segments_.end()) --it;
    const Segment& s = *it;
    if (s.u1 == s.u0) return s.v0;
    double t = (u - s.u0) / (s.u1 - s.u0);
    return s.v0 + t * (s.v1 - s.v0);
}

namespace {

// Linear extension of the quantile function to [a, b], taken from the
// segment that covers the midpoint.
std::pair<double, double> linear_on(const QuantileFunction& q, double a, double b) {
    double mid = 0.5 * (a + b);
    const auto& segs = q.segments();
    auto it = std::partition_point(segs.begin(), segs.end(),
                                   [mid](const QuantileFunction::Segment& s) { return s.u1 < mid; });
    if (it == segs.end()) --it;
    const auto& s = *it;
    if (s.u1 == s.u0) return {s.v0, s.v0};
    double slope = (s.v1 - s.v0) / (s.u1 - s.u0);
    return {s.v0 + slope * (a - s.u0), s.v0 + slope * (b - s.u0)};
}

// Exact integral of |d0 + (d1 - d0) t/len| over t in [0, len].
double integrate_abs_linear(double len, double d0, double d1) {
    if (len <= 0.0) return 0.0;
    if ((d0 >= 0.0 && d1 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0))
        return 0.5 * (std::abs(d0) + std::abs(d1)) * len;
    double t_cross = len * d0 / (d0 - d1);
    return 0.5 * std::abs(d0) * t_cross + 0.5 * std::abs(d1) * (len - t_cross);
}

}  // namespace

double wasserstein_exact(const QuantileFunction& q1, const QuantileFunction& q2) {
    std::vector<double> brk;
    brk.reserve(2 * (q1.segments().size() + q2.segments().size()));
    for (const auto& s : q1.segments()) {
        brk.push_back(s.u0);
        brk.push_back(s.u1);
    }
    for (const auto& s : q2.segments()) {
        brk.push_back(s.u0);
        brk.push_back(s.u1);
    }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

    double total = 0.0, comp = 0.0;
    for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
        double a = brk[i], b = brk[i + 1];
        if (!(b > a)) continue;
        auto [v1a, v1b] = linear_on(q1, a, b);
        auto [v2a, v2b] = linear_on(q2, a, b);
        double piece = integrate_abs_linear(b - a, v1a - v2a, v1b - v2b);
        double y = piece - comp;
        double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    return total;
}

double wasserstein_exact(const DiscreteDist& d1, const DiscreteDist& d2) {
    return wasserstein_exact(QuantileFunction::from_discrete(d1), QuantileFunction::from_discrete(d2));
}

double wasserstein_exact(const DiscreteDist& d1, const PiecewiseUniformDist& d2) {
    return wasserstein_exact(QuantileFunction::from_discrete(d1),
                             QuantileFunction::from_piecewise_uniform(d2));
}

double wasserstein_exact(const PiecewiseUniformDist& d1, const PiecewiseUniformDist& d2) {
    return wasserstein_exact(QuantileFunction::from_piecewise_uniform(d1),
                             QuantileFunction::from_piecewise_uniform(d2));
}

double wasserstein_paired(const EmpiricalDist& a, const EmpiricalDist& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("wasserstein_paired: sample counts differ (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double y = std::abs(a.samples()[i] - b.samples()[i]) - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s / static_cast<double>(a.size());
}

double wasserstein_to_std_normal(const EmpiricalDist& a) {
    const auto& xs = a.samples();
    const double n = static_cast<double>(xs.size());
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double z = normal_quantile((static_cast<double>(i) + 0.5) / n);
        double y = std::abs(xs[i] - z) - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s / n;
}

namespace {

// Antiderivative of Phi(x) - p.
double cdf_antideriv(double x, double p) { return x * normal_cdf(x) + normal_pdf(x) - p * x; }

// Integral of |Phi(x) - p| over [a, b] for constant p in (0, 1).
double abs_cdf_gap(double a, double b, double p) {
    double cross = normal_quantile(p);
    if (cross <= a) return cdf_antideriv(b, p) - cdf_antideriv(a, p);
    if (cross >= b) return cdf_antideriv(a, p) - cdf_antideriv(b, p);
    return (cdf_antideriv(a, p) - cdf_antideriv(cross, p)) +
           (cdf_antideriv(b, p) - cdf_antideriv(cross, p));
}

}  // namespace

double wasserstein_exact_to_normal(const DiscreteDist& d) {
    const auto& atoms = d.atoms();
    // Left tail: F_W = 0, integral of Phi up to the first atom.
    double total = cdf_antideriv(atoms.front(), 0.0);
    double p = 0.0;
    for (std::size_t j = 0; j + 1 < atoms.size(); ++j) {
        p += d.probs()[j];
        total += abs_cdf_gap(atoms[j], atoms[j + 1], p);
    }
    // Right tail: integral of 1 - Phi from the last atom.
    double b = atoms.back();
    total += normal_pdf(b) - b * (1.0 - normal_cdf(b));
    return total;
}

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("normal_quantile: p must lie strictly in (0, 1)");

    // Acklam's rational approximation (relative error < 1.15e-9).
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425, p_high = 1.0 - p_low;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    } else if (p <= p_high) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    // One Halley step against the erfc-based CDF. Skipped in the far tails
    // where the density underflows; the rational approximation alone is
    // already far below the 1e-12 absolute target there.
    double pdf = normal_pdf(x);
    if (pdf > 1e-280) {
        double e = normal_cdf(x) - p;
        double u = e / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

void write_samples(std::ostream& os, std::span<const double> samples) {
    char buf[40];
    for (double x : samples) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", x);
        os << buf;
    }
}

std::vector<double> read_samples(std::istream& is) {
    std::vector<double> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        out.push_back(std::stod(line));
    }
    return out;
}

void write_discrete_csv(std::ostream& os, const DiscreteDist& d) {
    char buf[96];
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", d.atoms()[i], d.probs()[i]);
        os << buf;
    }
}

DiscreteDist read_discrete_csv(std::istream& is) {
    std::vector<double> atoms, probs;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("read_discrete_csv: expected 'atom,prob' per line");
        atoms.push_back(std::stod(line.substr(0, comma)));
        probs.push_back(std::stod(line.substr(comma + 1)));
    }
    return DiscreteDist(std::move(atoms), std::move(probs));
}

}  // namespace hierseq
