#include "hierseq/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hierseq {

namespace {

std::string format_point(std::span<const double> x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

std::vector<double> ones(int k) { return std::vector<double>(static_cast<std::size_t>(k), 1.0); }

}  // namespace

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw std::invalid_argument("WeightVector: empty");
    for (double wi : w_) {
        if (!(wi > 0.0) || !std::isfinite(wi))
            throw std::invalid_argument("WeightVector: weights must be strictly positive and finite");
    }
}

Combiner::Combiner(std::string label, int arity, Domain domain, EvalFn eval,
                   GradFn analytic_gradient, bool averaging)
    : label_(std::move(label)),
      arity_(arity),
      domain_(domain),
      eval_(std::move(eval)),
      grad_(std::move(analytic_gradient)),
      averaging_(averaging) {
    if (arity_ < 1) throw std::invalid_argument("Combiner: arity must be >= 1");
    if (!eval_) throw std::invalid_argument("Combiner: eval function required");
}

void Combiner::check_domain(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != arity_)
        throw std::invalid_argument("Combiner '" + label_ + "': expected " + std::to_string(arity_) +
                                    " coordinates, got " + std::to_string(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !domain_.contains(x[i]))
            throw std::domain_error("Combiner '" + label_ + "': coordinate " + std::to_string(i) +
                                    " of " + format_point(x) + " outside domain");
    }
}

double Combiner::eval(std::span<const double> x) const {
    check_domain(x);
    return eval_(x);
}

std::vector<double> Combiner::gradient(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != arity_)
        throw std::invalid_argument("Combiner '" + label_ + "': gradient arity mismatch");
    for (double xi : x) {
        if (!domain_.contains_interior(xi))
            throw std::domain_error("Combiner '" + label_ + "': gradient point " + format_point(x) +
                                    " not interior to domain");
    }
    if (grad_) return grad_(x);
    return fd_gradient(x);
}

std::vector<double> Combiner::fd_gradient(std::span<const double> x) const {
    static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
    std::vector<double> pt(x.begin(), x.end());
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = std::max(std::abs(x[i]), 1.0) * cbrt_eps;
        // Shrink the step so x_i +/- h stays strictly inside the domain.
        double room = std::min(domain_.hi - x[i], x[i] - domain_.lo);
        if (h >= room) h = 0.5 * room;
        if (!(h > 0.0) || x[i] + h == x[i])
            throw std::domain_error("Combiner '" + label_ + "': finite-difference step underflow at " +
                                    format_point(x));
        double saved = pt[i];
        pt[i] = saved + h;
        double fp = eval_(pt);
        pt[i] = saved - h;
        double fm = eval_(pt);
        pt[i] = saved;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

Combiner diamond(const WeightVector& w) {
    if (w.size() != 4) throw std::invalid_argument("diamond: needs exactly 4 weights");
    const std::vector<double> inv = {1.0 / w[0], 1.0 / w[1], 1.0 / w[2], 1.0 / w[3]};
    auto eval = [inv](std::span<const double> x) {
        double top = 1.0 / (inv[0] / x[0] + inv[1] / x[1]);
        double bot = 1.0 / (inv[2] / x[2] + inv[3] / x[3]);
        return top + bot;
    };
    // d/dx_1 of the series branch: (w_1 x_1^2)^{-1} / ((w_1 x_1)^{-1} + (w_2 x_2)^{-1})^2.
    auto grad = [inv](std::span<const double> x) {
        std::vector<double> g(4);
        double s01 = inv[0] / x[0] + inv[1] / x[1];
        double s23 = inv[2] / x[2] + inv[3] / x[3];
        g[0] = inv[0] / (x[0] * x[0]) / (s01 * s01);
        g[1] = inv[1] / (x[1] * x[1]) / (s01 * s01);
        g[2] = inv[2] / (x[2] * x[2]) / (s23 * s23);
        g[3] = inv[3] / (x[3] * x[3]) / (s23 * s23);
        return g;
    };
    std::ostringstream label;
    label << "diamond(w=" << w[0] << "," << w[1] << "," << w[2] << "," << w[3] << ")";
    return Combiner(label.str(), 4, Domain::positive(), eval, grad);
}

Combiner lp_combiner(const WeightVector& w, double p) {
    if (p == 0.0 || !std::isfinite(p)) throw std::invalid_argument("lp_combiner: exponent p must be nonzero and finite");
    const std::vector<double> wv = w.values();
    const int k = static_cast<int>(wv.size());
    auto eval = [wv, p](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(wv[i] * x[i], p);
        return std::pow(s, 1.0 / p);
    };
    auto grad = [wv, p](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(wv[i] * x[i], p);
        double outer = std::pow(s, 1.0 / p - 1.0);
        std::vector<double> g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = outer * wv[i] * std::pow(wv[i] * x[i], p - 1.0);
        return g;
    };
    Domain dom = p > 0.0 ? Domain::nonnegative() : Domain::positive();
    std::ostringstream label;
    label << "L" << p << "(k=" << k << ")";
    return Combiner(label.str(), k, dom, eval, grad);
}

Combiner arithmetic_mean(int k) {
    if (k < 1) throw std::invalid_argument("arithmetic_mean: arity must be >= 1");
    auto eval = [k](std::span<const double> x) {
        double s = 0.0;
        for (double xi : x) s += xi;
        return s / k;
    };
    auto grad = [k](std::span<const double> x) {
        return std::vector<double>(x.size(), 1.0 / k);
    };
    return Combiner("mean(k=" + std::to_string(k) + ")", k, Domain::all_reals(), eval, grad);
}

Combiner coordinate_min(int k) {
    if (k < 1) throw std::invalid_argument("coordinate_min: arity must be >= 1");
    auto eval = [](std::span<const double> x) { return *std::min_element(x.begin(), x.end()); };
    return Combiner("min(k=" + std::to_string(k) + ")", k, Domain::all_reals(), eval, nullptr,
                    /*averaging=*/false);
}

Combiner identity_combiner() {
    auto eval = [](std::span<const double> x) { return x[0]; };
    auto grad = [](std::span<const double>) { return std::vector<double>{1.0}; };
    return Combiner("identity", 1, Domain::all_reals(), eval, grad);
}

namespace {

struct ComposedParts {
    Combiner outer;
    std::vector<Combiner> inner;
    std::vector<std::vector<int>> index_sets;
    std::vector<double> scale;
    std::vector<double> outer_norm;  // divide F_0 output by this (1 unless auto)
    std::vector<double> inner_norm;  // divide F_i output by this (1 unless auto)
};

void validate_spec(const CompositionSpec& spec, int composed_arity) {
    const std::size_t m = spec.inner.size();
    if (static_cast<std::size_t>(spec.outer.arity()) != m)
        throw std::invalid_argument("compose: outer arity must equal the number of inner combiners");
    if (spec.index_sets.size() != m)
        throw std::invalid_argument("compose: need one index set per inner combiner");
    std::vector<bool> covered(static_cast<std::size_t>(composed_arity), false);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& set = spec.index_sets[i];
        if (set.empty()) throw std::invalid_argument("compose: index set " + std::to_string(i) + " is empty");
        if (static_cast<int>(set.size()) != spec.inner[i].arity())
            throw std::invalid_argument("compose: |I_" + std::to_string(i + 1) +
                                        "| must equal the arity of inner combiner " + std::to_string(i + 1));
        for (int j : set) {
            if (j < 0 || j >= composed_arity)
                throw std::invalid_argument("compose: index out of range in index set " + std::to_string(i));
            covered[static_cast<std::size_t>(j)] = true;
        }
    }
    if (!std::all_of(covered.begin(), covered.end(), [](bool b) { return b; }))
        throw std::invalid_argument("compose: index sets must cover every input coordinate");
}

Domain composed_domain(const CompositionSpec& spec) {
    Domain d = Domain::all_reals();
    for (const auto& c : spec.inner) {
        d.lo = std::max(d.lo, c.domain().lo);
        d.hi = std::min(d.hi, c.domain().hi);
        d.open_lo = d.open_lo || c.domain().open_lo;
    }
    return d;
}

}  // namespace

Combiner compose(const CompositionSpec& spec) {
    const std::size_t m = spec.inner.size();
    int composed_arity = 0;
    for (const auto& set : spec.index_sets)
        for (int j : set) composed_arity = std::max(composed_arity, j + 1);
    validate_spec(spec, composed_arity);

    ComposedParts parts{spec.outer, spec.inner, spec.index_sets, {}, {}, {}};
    parts.outer_norm = {1.0};
    parts.inner_norm.assign(m, 1.0);

    if (spec.scale.has_value()) {
        parts.scale = *spec.scale;
        if (parts.scale.size() != m)
            throw std::invalid_argument("compose: scale vector size must match outer arity");
        for (double si : parts.scale)
            if (!(si > 0.0)) throw std::invalid_argument("compose: scale entries must be positive");
        double f0s = spec.outer.eval(parts.scale);
        if (std::abs(f0s - 1.0) > kNormalizationTol)
            throw std::invalid_argument("compose: F_0(s) = " + std::to_string(f0s) +
                                        " violates the normalization F_0(s) = 1");
    } else {
        // Constructive scale of the scaled-averaging composition: normalize
        // each component by its value at 1 and set
        // s_i = F_i(1) F_0(1) / F_0(F_1(1), ..., F_m(1)).
        double f0_at_1 = spec.outer.eval(ones(static_cast<int>(m)));
        std::vector<double> fi_at_1(m);
        for (std::size_t i = 0; i < m; ++i) fi_at_1[i] = spec.inner[i].eval(ones(spec.inner[i].arity()));
        double denom = spec.outer.eval(fi_at_1);
        if (!(std::abs(denom) > 0.0))
            throw std::invalid_argument("compose: degenerate auto scale (F_0(F_1(1),...,F_m(1)) = 0)");
        parts.scale.resize(m);
        for (std::size_t i = 0; i < m; ++i) parts.scale[i] = fi_at_1[i] * f0_at_1 / denom;
        parts.outer_norm = {f0_at_1};
        parts.inner_norm = fi_at_1;
        // G_0(s) must be 1; fails only if the outer is not homogeneous.
        std::vector<double> check = parts.scale;
        double g0s = spec.outer.eval(check) / f0_at_1;
        if (std::abs(g0s - 1.0) > kNormalizationTol)
            throw std::invalid_argument("compose: auto scale failed normalization (G_0(s) = " +
                                        std::to_string(g0s) + "); outer combiner must be homogeneous");
    }

    auto eval = [parts](std::span<const double> x) {
        const std::size_t m = parts.inner.size();
        std::vector<double> z(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<double> xi(parts.index_sets[i].size());
            for (std::size_t j = 0; j < xi.size(); ++j)
                xi[j] = x[static_cast<std::size_t>(parts.index_sets[i][j])];
            z[i] = parts.scale[i] * parts.inner[i].eval(xi) / parts.inner_norm[i];
        }
        return parts.outer.eval(z) / parts.outer_norm[0];
    };

    // Chain rule over the component gradients.
    auto grad = [parts](std::span<const double> x) {
        const std::size_t m = parts.inner.size();
        std::vector<double> z(m);
        std::vector<std::vector<double>> inner_grads(m);
        for (std::size_t i = 0; i < m; ++i) {
            std::vector<double> xi(parts.index_sets[i].size());
            for (std::size_t j = 0; j < xi.size(); ++j)
                xi[j] = x[static_cast<std::size_t>(parts.index_sets[i][j])];
            z[i] = parts.scale[i] * parts.inner[i].eval(xi) / parts.inner_norm[i];
            inner_grads[i] = parts.inner[i].gradient(xi);
        }
        std::vector<double> outer_grad = parts.outer.gradient(z);
        std::vector<double> g(x.size(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double factor = outer_grad[i] / parts.outer_norm[0] * parts.scale[i] / parts.inner_norm[i];
            for (std::size_t j = 0; j < parts.index_sets[i].size(); ++j)
                g[static_cast<std::size_t>(parts.index_sets[i][j])] += factor * inner_grads[i][j];
        }
        return g;
    };

    std::string label = "compose(" + spec.outer.label();
    for (const auto& c : spec.inner) label += "; " + c.label();
    label += ")";
    return Combiner(std::move(label), composed_arity, composed_domain(spec), eval, grad);
}

}  // namespace hierseq
