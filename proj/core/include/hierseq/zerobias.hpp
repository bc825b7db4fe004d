#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hierseq/dist.hpp"

namespace hierseq {

/// Dense polynomial sum c_j x^j, used as the test-function family for the
/// zero-bias identity. Everything stays exact: evaluation, derivative and
/// piecewise integrals are all finite closed forms.
class Polynomial {
  public:
    Polynomial() : coeffs_{0.0} {}
    explicit Polynomial(std::vector<double> coeffs);

    const std::vector<double>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    double operator()(double x) const;
    Polynomial derivative() const;

  private:
    std::vector<double> coeffs_;
};

/// A mean-zero discrete law together with its exact zero-bias companion:
/// the density of the companion is piecewise constant between the atoms,
/// equal to E[W 1(W > w)] / sigma^2 there.
struct ZeroBiasPair {
    DiscreteDist base;
    PiecewiseUniformDist star;
    double sigma2;
};

/// Draws from a bivariate coupling; the comonotone (common-uniform through
/// both quantile functions) law attains the order-1 transport infimum.
struct CouplingSamples {
    std::vector<std::pair<double, double>> pairs;
    std::string law = "comonotone";

    double mean_abs_diff() const;
    /// Standard error of mean_abs_diff (sample sd / sqrt(n)).
    double stderr_abs_diff() const;
    std::vector<double> first_marginal() const;
    std::vector<double> second_marginal() const;
};

/// Exact zero-bias transform of a finitely supported mean-zero law.
/// Rejects laws whose mean exceeds 1e-12 in magnitude (caller must center)
/// and degenerate laws.
ZeroBiasPair zero_bias_exact(const DiscreteDist& d);

/// Max absolute defect of E[W f(W)] = sigma^2 E[f'(W^*)] over the given
/// test functions; both sides are finite sums, so a correct pair is exact
/// to rounding.
double verify_zero_bias_identity(const ZeroBiasPair& pair, std::span<const Polynomial> fs);

/// Comonotone draws of (W, W^*): one uniform pushed through both quantile
/// functions. Mean |W - W^*| converges to the exact transport distance.
CouplingSamples couple_comonotone(const ZeroBiasPair& pair, std::size_t n, std::uint64_t seed);

/// Coupling of Y = sum (a_i / lambda) W_i with its zero-biased version
/// Y^* = Y - (a_I / lambda)(W_I - W_I^*), where the random index I has
/// P(I = i) proportional to a_i^2. Requires the base law standardized to
/// variance 1. The construction makes E|Y - Y^*| equal phi * E|W - W^*|.
CouplingSamples y_star_coupling(std::span<const double> alpha, const ZeroBiasPair& pair,
                                std::size_t n, std::uint64_t seed);

struct Lemma21Report {
    double d_to_normal;          // exact quadrature value of d(W, N)
    double d_to_star;            // exact d(W, W^*)
    double ratio;                // d_to_normal / d_to_star
    bool holds;                  // d(W, N) <= 2 d(W, W^*) + tolerance
    double d_to_normal_sampled;  // midpoint-quantile estimate, NaN when n = 0
};

/// Numeric check of the coupling inequality d(W, N) <= 2 d(W, W^*) for a
/// standardized discrete law. Distances are exact; when n > 0 the quantile
/// estimator at n midpoints is reported alongside as a cross-check.
Lemma21Report check_lemma21(const DiscreteDist& base, std::size_t n = 0);

}  // namespace hierseq
