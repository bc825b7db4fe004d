#pragma once

#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hierseq {

/// Interval of admissible coordinate values for a combining function.
/// `open_lo` marks domains like (0, inf) where the left endpoint itself is
/// a rejected input (zero conductance is singular in the series rule).
struct Domain {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool open_lo = false;

    static Domain all_reals() { return Domain{}; }
    static Domain positive() { return Domain{0.0, std::numeric_limits<double>::infinity(), true}; }
    static Domain nonnegative() { return Domain{0.0, std::numeric_limits<double>::infinity(), false}; }
    static Domain box(double a, double b) { return Domain{a, b, false}; }

    bool contains(double x) const {
        if (open_lo ? !(x > lo) : !(x >= lo)) return false;
        return x <= hi;
    }
    bool contains_interior(double x) const { return x > lo && x < hi; }
};

/// Strictly positive weight vector (conductivity characteristics).
class WeightVector {
  public:
    explicit WeightVector(std::vector<double> w);
    WeightVector(std::initializer_list<double> w) : WeightVector(std::vector<double>(w)) {}

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& values() const { return w_; }

  private:
    std::vector<double> w_;
};

/// A k-ary combining function on a box domain.
///
/// Immutable after construction; eval and gradient are pure, so a Combiner
/// may be evaluated from many threads at once. The gradient is analytic
/// where the factory provides one and falls back to central finite
/// differences otherwise.
class Combiner {
  public:
    using EvalFn = std::function<double(std::span<const double>)>;
    using GradFn = std::function<std::vector<double>(std::span<const double>)>;

    Combiner(std::string label, int arity, Domain domain, EvalFn eval,
             GradFn analytic_gradient = nullptr, bool averaging = true);

    int arity() const { return arity_; }
    const Domain& domain() const { return domain_; }
    const std::string& label() const { return label_; }

    /// Built-ins that are known not to be averaging (coordinate min) carry
    /// `false` here; the checker module uses them as negative fixtures.
    bool flagged_averaging() const { return averaging_; }
    bool has_analytic_gradient() const { return static_cast<bool>(grad_); }

    /// Evaluates F(x). Rejects inputs outside domain^k; never returns NaN
    /// silently.
    double eval(std::span<const double> x) const;
    double operator()(std::span<const double> x) const { return eval(x); }
    double operator()(std::initializer_list<double> x) const {
        return eval(std::span<const double>(x.begin(), x.size()));
    }

    /// Gradient of F at an interior point. Uses the analytic form when
    /// available, otherwise central differences with step
    /// h = max(|x_i|, 1) * eps^(1/3), shrunk to stay inside the domain.
    std::vector<double> gradient(std::span<const double> x) const;
    std::vector<double> gradient(std::initializer_list<double> x) const {
        return gradient(std::span<const double>(x.begin(), x.size()));
    }

  private:
    void check_domain(std::span<const double> x) const;
    std::vector<double> fd_gradient(std::span<const double> x) const;

    std::string label_;
    int arity_;
    Domain domain_;
    EvalFn eval_;
    GradFn grad_;
    bool averaging_;
};

/// Diamond-lattice conductance: series rule on each branch, parallel rule
/// across branches. Arity 4, domain (0, inf)^4.
Combiner diamond(const WeightVector& w);

/// Weighted L^p combiner (sum_i (w_i x_i)^p)^(1/p). Domain [0, inf)^k for
/// p > 0 and (0, inf)^k for p < 0; p = 0 is rejected.
Combiner lp_combiner(const WeightVector& w, double p);

/// Arithmetic mean of k coordinates (the classical CLT combiner at k = 2).
Combiner arithmetic_mean(int k = 2);

/// Coordinate minimum. Satisfies the first two averaging properties but not
/// the third; kept as a negative fixture and flagged non-averaging.
Combiner coordinate_min(int k = 2);

/// Arity-1 identity, useful as a trivial composition component.
Combiner identity_combiner();

/// Composition recipe F_0(s_1 F_1(x_{I_1}), ..., s_m F_m(x_{I_m})). The
/// index sets are 0-based positions into the composed input vector; their
/// union must cover {0, ..., K-1} where K is the composed arity. `scale`
/// empty means "auto": the scale-normalized construction is used and the
/// result satisfies F(1) = 1.
struct CompositionSpec {
    Combiner outer;
    std::vector<Combiner> inner;
    std::vector<std::vector<int>> index_sets;
    std::optional<std::vector<double>> scale;  // explicit s with F_0(s) = 1
};

Combiner compose(const CompositionSpec& spec);

/// Absolute tolerance for the normalization identities F(1) = 1 and
/// F_0(s) = 1. Closed-form weights satisfy them exactly; this only absorbs
/// rounding.
inline constexpr double kNormalizationTol = 1e-9;

}  // namespace hierseq
