#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace hierseq {

/// Finitely supported distribution: strictly increasing atoms with positive
/// probabilities summing to one (within 1e-12).
class DiscreteDist {
  public:
    DiscreteDist(std::vector<double> atoms, std::vector<double> probs);

    /// Uniform distribution on {a, b}.
    static DiscreteDist two_point(double a, double b);
    static DiscreteDist constant(double c);

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return atoms_.size(); }
    double mean() const { return mean_; }
    double variance() const { return variance_; }

    double cdf(double x) const;
    /// Left-continuous quantile: smallest atom with cumulative mass >= u.
    double quantile(double u) const;

    /// Same atoms shifted and scaled to mean 0, variance 1.
    DiscreteDist standardized() const;

  private:
    std::vector<double> atoms_;
    std::vector<double> probs_;
    std::vector<double> cum_;
    double mean_ = 0.0;
    double variance_ = 0.0;
};

/// Sorted sample container; all consumers need order statistics, so samples
/// are sorted once at construction and immutable afterwards.
class EmpiricalDist {
  public:
    explicit EmpiricalDist(std::vector<double> samples);

    const std::vector<double>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double mean() const { return mean_; }
    /// Sample standard deviation (n - 1 denominator).
    double sd() const { return sd_; }

  private:
    std::vector<double> samples_;
    double mean_ = 0.0;
    double sd_ = 0.0;
};

/// Density constant between consecutive knots; total mass 1 within 1e-12.
class PiecewiseUniformDist {
  public:
    PiecewiseUniformDist(std::vector<double> knots, std::vector<double> densities);

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& densities() const { return densities_; }
    double mean() const;
    double cdf(double x) const;
    double quantile(double u) const;

  private:
    std::vector<double> knots_;
    std::vector<double> densities_;
    std::vector<double> cum_;  // mass up to each knot
};

/// Piecewise-linear quantile function on (0, 1). Both discrete and
/// piecewise-uniform distributions reduce to this form, which makes the
/// order-1 transport distance an exact segment-by-segment integral.
class QuantileFunction {
  public:
    struct Segment {
        double u0, u1;  // probability interval
        double v0, v1;  // quantile values at u0 and u1 (equal for atoms)
    };

    static QuantileFunction from_discrete(const DiscreteDist& d);
    static QuantileFunction from_piecewise_uniform(const PiecewiseUniformDist& d);
    /// Empirical distribution as n equal-mass atoms.
    static QuantileFunction from_samples(const EmpiricalDist& d);

    const std::vector<Segment>& segments() const { return segments_; }
    double value(double u) const;

  private:
    std::vector<Segment> segments_;
};

/// Mean absolute difference of paired order statistics; the comonotone
/// pairing attains the order-1 transport infimum, so this is the exact
/// distance between the two empirical laws. Requires equal sample counts.
double wasserstein_paired(const EmpiricalDist& a, const EmpiricalDist& b);

/// Midpoint-quantile estimator of the distance to the standard normal:
/// (1/n) sum_i |x_(i) - Phi^{-1}((i - 1/2)/n)|.
double wasserstein_to_std_normal(const EmpiricalDist& a);

/// Exact integral of |Q_1(u) - Q_2(u)| du over (0, 1) by merged-segment
/// decomposition; exact because both quantile functions are piecewise
/// linear in u.
double wasserstein_exact(const QuantileFunction& q1, const QuantileFunction& q2);
double wasserstein_exact(const DiscreteDist& d1, const DiscreteDist& d2);
double wasserstein_exact(const DiscreteDist& d1, const PiecewiseUniformDist& d2);
double wasserstein_exact(const PiecewiseUniformDist& d1, const PiecewiseUniformDist& d2);

/// Exact distance from a discrete law to the standard normal, as the
/// integral of |F_W - Phi| split at the atoms and at the CDF crossings,
/// using the closed-form antiderivative x Phi(x) + phi(x); the unbounded
/// tails are handled analytically.
double wasserstein_exact_to_normal(const DiscreteDist& d);

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse standard normal CDF, |Phi(result) - p| <= 1e-12 on (0, 1).
/// Rational approximation polished by one Halley step against the
/// erfc-based CDF.
double normal_quantile(double p);

/// One-value-per-line text serialization for sample pools.
void write_samples(std::ostream& os, std::span<const double> samples);
std::vector<double> read_samples(std::istream& is);

/// atom,prob CSV serialization for discrete distributions.
void write_discrete_csv(std::ostream& os, const DiscreteDist& d);
DiscreteDist read_discrete_csv(std::istream& is);

}  // namespace hierseq
