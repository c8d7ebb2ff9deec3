#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "sis/common.hpp"

namespace sis {

// ---------------------------------------------------------------------------
// Generator component kinds
// ---------------------------------------------------------------------------

// Cardinal B-spline of order n: n+1-fold convolution of the unit-interval
// indicator, supported on [0, n+1]. Order 0 is the indicator itself and is
// the only non-continuous kind.
struct BSplineKind {
    int order = 1;
};

// exp(-|x|^2 / (2 sigma^2)) - exp(-radius^2 / (2 sigma^2)) inside |x| < radius,
// clamped at 0; the offset keeps the truncation continuous.
struct TruncatedGaussianKind {
    double sigma = 1.0;
    double radius = 4.0;
};

// scale * (1 + |x|)^(-exponent), global support; exponent > d gives a finite
// W^1 norm.
struct PolyDecayKind {
    double exponent = 2.0;
    double scale = 1.0;
};

// Piecewise-linear interpolation of tabulated values on a uniform grid,
// exactly 0 outside [origin, origin + (n-1) step].
struct TabulatedKind {
    double step = 1.0;
    std::vector<double> values;
    double origin = 0.0;
};

struct SupportHull {
    double lo = 0.0;
    double hi = 0.0;
    bool compact = true;
};

namespace detail {

inline double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

inline double bspline_eval1(int n, double x) {
    if (n == 0) return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;
    if (x <= 0.0 || x >= n + 1.0) return 0.0;
    double factorial = 1.0;
    for (int i = 2; i <= n; ++i) factorial *= i;
    double acc = 0.0;
    double sign = 1.0;
    for (int k = 0; k <= n + 1; ++k) {
        double u = x - k;
        if (u > 0.0) acc += sign * binomial(n + 1, k) * std::pow(u, n);
        sign = -sign;
    }
    return std::max(0.0, acc / factorial);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// GeneratorComponent
// ---------------------------------------------------------------------------

class GeneratorComponent {
public:
    using Kind = std::variant<BSplineKind, TruncatedGaussianKind, PolyDecayKind, TabulatedKind>;

    static GeneratorComponent bspline(int order, int dim = 1) {
        if (order < 0) throw Error("bspline order must be nonnegative");
        if (dim != 1 && dim != 2) throw Error("dimension must be 1 or 2");
        return GeneratorComponent(BSplineKind{order}, dim);
    }

    static GeneratorComponent truncated_gaussian(double sigma, double radius) {
        if (sigma <= 0.0 || radius <= 0.0) throw Error("gaussian parameters must be positive");
        return GeneratorComponent(TruncatedGaussianKind{sigma, radius}, 1);
    }

    static GeneratorComponent poly_decay(double exponent, double scale = 1.0) {
        if (exponent <= 1.0) throw Error("poly decay exponent must exceed the dimension");
        if (scale <= 0.0) throw Error("scale must be positive");
        return GeneratorComponent(PolyDecayKind{exponent, scale}, 1);
    }

    static GeneratorComponent tabulated(double step, std::vector<double> values, double origin) {
        if (step <= 0.0) throw Error("tabulated step must be positive");
        if (values.empty()) throw Error("tabulated values must be nonempty");
        for (double v : values)
            if (!std::isfinite(v)) throw Error("tabulated values must be finite");
        return GeneratorComponent(TabulatedKind{step, std::move(values), origin}, 1);
    }

    int dim() const { return dim_; }
    const Kind& kind() const { return kind_; }

    double eval(double x) const {
        if (dim_ != 1) throw DimensionMismatch("scalar eval on a 2-d generator");
        return eval1(x);
    }

    double eval(const Point& x) const {
        if (x.dim() != dim_) throw DimensionMismatch("point dimension mismatch");
        if (dim_ == 1) return eval1(x[0]);
        // d=2 is tensor-product BSpline only
        const auto* b = std::get_if<BSplineKind>(&kind_);
        if (!b) throw Error("d=2 supports tensor-product bspline generators only");
        return detail::bspline_eval1(b->order, x[0]) * detail::bspline_eval1(b->order, x[1]);
    }

    // Per-axis support hull (same on both axes for the tensor kind).
    SupportHull support() const {
        SupportHull h;
        if (const auto* b = std::get_if<BSplineKind>(&kind_)) {
            h.lo = 0.0;
            h.hi = b->order + 1.0;
        } else if (const auto* g = std::get_if<TruncatedGaussianKind>(&kind_)) {
            h.lo = -g->radius;
            h.hi = g->radius;
        } else if (std::get_if<PolyDecayKind>(&kind_)) {
            h.lo = -kInf;
            h.hi = kInf;
            h.compact = false;
        } else {
            const auto& t = std::get<TabulatedKind>(kind_);
            h.lo = t.origin;
            h.hi = t.origin + (static_cast<double>(t.values.size()) - 1.0) * t.step;
        }
        return h;
    }

    bool compact_support() const { return support().compact; }

    // Decay exponent for tail truncation of W-norm sums (inf for compact kinds).
    double tail_exponent() const {
        if (const auto* pd = std::get_if<PolyDecayKind>(&kind_)) return pd->exponent;
        return kInf;
    }

    double tail_scale() const {
        if (const auto* pd = std::get_if<PolyDecayKind>(&kind_)) return pd->scale;
        return 0.0;
    }

private:
    GeneratorComponent(Kind kind, int dim) : kind_(std::move(kind)), dim_(dim) {}

    double eval1(double x) const {
        if (const auto* b = std::get_if<BSplineKind>(&kind_)) {
            return detail::bspline_eval1(b->order, x);
        }
        if (const auto* g = std::get_if<TruncatedGaussianKind>(&kind_)) {
            if (std::abs(x) >= g->radius) return 0.0;
            double edge = std::exp(-g->radius * g->radius / (2.0 * g->sigma * g->sigma));
            return std::max(0.0, std::exp(-x * x / (2.0 * g->sigma * g->sigma)) - edge);
        }
        if (const auto* pd = std::get_if<PolyDecayKind>(&kind_)) {
            return pd->scale * std::pow(1.0 + std::abs(x), -pd->exponent);
        }
        const auto& t = std::get<TabulatedKind>(kind_);
        double u = (x - t.origin) / t.step;
        if (u < 0.0 || u > static_cast<double>(t.values.size()) - 1.0) return 0.0;
        auto i = static_cast<std::size_t>(u);
        if (i + 1 >= t.values.size()) return t.values.back();
        double frac = u - static_cast<double>(i);
        return t.values[i] * (1.0 - frac) + t.values[i + 1] * frac;
    }

    Kind kind_;
    int dim_;
};

// Materialize a callable as a Tabulated component on [lo, hi] with grid step
// `step` (the endpoints are snapped outward to the grid).
template <class F>
GeneratorComponent tabulate(F&& f, double lo, double hi, double step) {
    if (!(hi > lo)) throw Error("tabulate needs hi > lo");
    auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = f(lo + static_cast<double>(i) * step);
    return GeneratorComponent::tabulated(step, std::move(values), lo);
}

// g + scale * bump, materialized on the union hull. Both inputs must have
// compact support; exact when both are piecewise linear on the grid.
inline GeneratorComponent add_scaled(const GeneratorComponent& g, const GeneratorComponent& bump,
                                     double scale, double step) {
    auto hg = g.support();
    auto hb = bump.support();
    if (!hg.compact || !hb.compact) throw Error("add_scaled needs compact supports");
    double lo = std::min(hg.lo, hb.lo);
    double hi = std::max(hg.hi, hb.hi);
    return tabulate([&](double x) { return g.eval(x) + scale * bump.eval(x); }, lo, hi, step);
}

// ---------------------------------------------------------------------------
// GeneratorVector
// ---------------------------------------------------------------------------

class GeneratorVector {
public:
    explicit GeneratorVector(std::vector<GeneratorComponent> components)
        : components_(std::move(components)) {
        if (components_.empty()) throw Error("generator vector needs r >= 1 components");
        for (const auto& c : components_)
            if (c.dim() != components_.front().dim())
                throw DimensionMismatch("generator components must share dimension");
    }

    GeneratorVector(std::initializer_list<GeneratorComponent> components)
        : GeneratorVector(std::vector<GeneratorComponent>(components)) {}

    int r() const { return static_cast<int>(components_.size()); }
    int dim() const { return components_.front().dim(); }
    const GeneratorComponent& component(int i) const {
        return components_.at(static_cast<std::size_t>(i));
    }
    const std::vector<GeneratorComponent>& components() const { return components_; }

    SupportHull support() const {
        SupportHull h{kInf, -kInf, true};
        for (const auto& c : components_) {
            auto hc = c.support();
            h.lo = std::min(h.lo, hc.lo);
            h.hi = std::max(h.hi, hc.hi);
            h.compact = h.compact && hc.compact;
        }
        return h;
    }

private:
    std::vector<GeneratorComponent> components_;
};

}  // namespace sis
