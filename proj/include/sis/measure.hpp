#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "sis/amalgam.hpp"
#include "sis/common.hpp"
#include "sis/generator.hpp"

namespace sis {

// ---------------------------------------------------------------------------
// Finite complex Borel measures: atoms plus an optional piecewise-constant
// density on a uniform grid (d=1 for densities). Both parts absent is the
// zero measure.
// ---------------------------------------------------------------------------

struct Atom {
    Point location;
    Complex weight;
};

struct DensityGrid {
    double step = 1.0;
    double origin = 0.0;
    std::vector<Complex> values;  // value on [origin + i*step, origin + (i+1)*step)

    double lo() const { return origin; }
    double hi() const { return origin + step * static_cast<double>(values.size()); }
};

class MeasureComponent {
public:
    MeasureComponent() : dim_(1) {}
    explicit MeasureComponent(int dim) : dim_(dim) {}

    static MeasureComponent dirac(double location, Complex weight = 1.0) {
        MeasureComponent m(1);
        m.atoms_.push_back({Point(location), weight});
        return m;
    }

    static MeasureComponent from_atoms(std::vector<Atom> atoms, int dim = 1) {
        MeasureComponent m(dim);
        for (auto& a : atoms)
            if (a.location.dim() != dim) throw DimensionMismatch("atom dimension mismatch");
        m.atoms_ = std::move(atoms);
        return m;
    }

    static MeasureComponent zero(int dim = 1) { return MeasureComponent(dim); }

    MeasureComponent& add_atom(const Point& location, Complex weight) {
        if (location.dim() != dim_) throw DimensionMismatch("atom dimension mismatch");
        atoms_.push_back({location, weight});
        return *this;
    }

    MeasureComponent& set_density(DensityGrid grid) {
        if (dim_ != 1) throw Error("densities are supported at d=1 only");
        if (grid.step <= 0.0) throw Error("density step must be positive");
        density_ = std::move(grid);
        return *this;
    }

    // mu + scale * (density grid), used to build exact-TV perturbations
    MeasureComponent with_added_density(const DensityGrid& grid, double scale) const {
        MeasureComponent m = *this;
        if (m.density_) throw Error("measure already carries a density part");
        DensityGrid g = grid;
        for (auto& v : g.values) v *= scale;
        m.density_ = std::move(g);
        return m;
    }

    int dim() const { return dim_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::optional<DensityGrid>& density() const { return density_; }
    bool is_atomic() const { return !density_.has_value(); }
    bool is_zero() const { return atoms_.empty() && !density_.has_value(); }

    double total_variation() const {
        double tv = 0.0;
        for (const auto& a : atoms_) tv += std::abs(a.weight);
        if (density_)
            for (const auto& v : density_->values) tv += std::abs(v) * density_->step;
        return tv;
    }

    // integral of (1 + |x|)^s against |mu|; finite result certifies M_s
    double moment(double s) const {
        if (s < 0.0) throw Error("moment needs s >= 0");
        double total = 0.0;
        for (const auto& a : atoms_)
            total += std::abs(a.weight) * std::pow(1.0 + a.location.norm(), s);
        if (density_) {
            // exact antiderivative of (1+|x|)^s, split at 0
            auto F = [s](double x) {
                return x >= 0.0 ? std::pow(1.0 + x, s + 1.0) / (s + 1.0)
                                : -std::pow(1.0 - x, s + 1.0) / (s + 1.0);
            };
            for (std::size_t i = 0; i < density_->values.size(); ++i) {
                double a = density_->origin + density_->step * static_cast<double>(i);
                double b = a + density_->step;
                double mass = F(b) - F(a);
                if (a < 0.0 && b > 0.0) mass = (F(b) - F(0.0)) + (F(0.0) - F(a));
                total += std::abs(density_->values[i]) * mass;
            }
        }
        return total;
    }

    // support hull of the measure (atoms + density grid); zero measure -> {0,0}
    SupportHull support() const {
        SupportHull h{kInf, -kInf, true};
        for (const auto& a : atoms_) {
            h.lo = std::min(h.lo, a.location[0]);
            h.hi = std::max(h.hi, a.location[0]);
        }
        if (density_) {
            h.lo = std::min(h.lo, density_->lo());
            h.hi = std::max(h.hi, density_->hi());
        }
        if (h.lo > h.hi) h = {0.0, 0.0, true};
        return h;
    }

private:
    std::vector<Atom> atoms_;
    std::optional<DensityGrid> density_;
    int dim_;
};

class VecMeasure {
public:
    explicit VecMeasure(std::vector<MeasureComponent> components)
        : components_(std::move(components)) {
        if (components_.empty()) throw Error("vector measure needs t >= 1 components");
        for (const auto& c : components_)
            if (c.dim() != components_.front().dim())
                throw DimensionMismatch("measure components must share dimension");
    }

    VecMeasure(std::initializer_list<MeasureComponent> components)
        : VecMeasure(std::vector<MeasureComponent>(components)) {}

    int t() const { return static_cast<int>(components_.size()); }
    int dim() const { return components_.front().dim(); }
    const MeasureComponent& component(int l) const {
        return components_.at(static_cast<std::size_t>(l));
    }
    const std::vector<MeasureComponent>& components() const { return components_; }

    double total_variation() const {
        double tv = 0.0;
        for (const auto& c : components_) tv += c.total_variation();
        return tv;
    }

    double moment(double s) const {
        double total = 0.0;
        for (const auto& c : components_) total += c.moment(s);
        return total;
    }

    SupportHull support() const {
        SupportHull h{kInf, -kInf, true};
        for (const auto& c : components_) {
            auto hc = c.support();
            h.lo = std::min(h.lo, hc.lo);
            h.hi = std::max(h.hi, hc.hi);
        }
        return h;
    }

private:
    std::vector<MeasureComponent> components_;
};

// ---------------------------------------------------------------------------
// Convolution (f * mu)(x) = int f(x - y) dmu(y)
// ---------------------------------------------------------------------------

// Generic callable version: the atom part is an exact finite sum; the density
// part uses midpoint quadrature with the EsssupSpec refinement contract.
template <class F>
Complex convolve_fn(F&& f, const MeasureComponent& m, const Point& x,
                    const EsssupSpec& spec = {}) {
    Complex acc = 0.0;
    for (const auto& a : m.atoms()) acc += a.weight * f(x - a.location);
    if (m.density()) {
        const auto& g = *m.density();
        Complex prev = 0.0;
        Complex val = 0.0;
        int sub = std::max(1, spec.base_subdivisions / 4);
        for (int round = 0; round < spec.max_rounds; ++round) {
            val = 0.0;
            double h = g.step / sub;
            for (std::size_t i = 0; i < g.values.size(); ++i) {
                if (g.values[i] == 0.0) continue;
                double cell_lo = g.origin + g.step * static_cast<double>(i);
                Complex cell_acc = 0.0;
                for (int j = 0; j < sub; ++j)
                    cell_acc += f(x - Point(cell_lo + (j + 0.5) * h));
                val += g.values[i] * cell_acc * h;
            }
            if (round > 0 && std::abs(val - prev) <= spec.rel_tol * std::max(std::abs(val), 1e-300))
                break;
            prev = val;
            sub *= spec.refine_factor;
        }
        acc += val;
    }
    return acc;
}

inline Complex convolve(const GeneratorComponent& g, const MeasureComponent& m, const Point& x,
                        const EsssupSpec& spec = {}) {
    if (g.dim() != m.dim()) throw DimensionMismatch("generator/measure dimension mismatch");
    return convolve_fn([&](const Point& y) { return Complex(g.eval(y)); }, m, x, spec);
}

// ---------------------------------------------------------------------------
// The r x t convolution matrix Phi * mu, entry (i,l) = phi^i * mu^l, as a
// callable family with support bookkeeping and Tabulated materialization.
// ---------------------------------------------------------------------------

class ConvolvedGenerator {
public:
    ConvolvedGenerator(GeneratorVector phi, VecMeasure mu, EsssupSpec spec = {})
        : phi_(std::move(phi)), mu_(std::move(mu)), spec_(spec) {
        if (phi_.dim() != mu_.dim()) throw DimensionMismatch("generator/measure dimension mismatch");
    }

    int r() const { return phi_.r(); }
    int t() const { return mu_.t(); }

    Complex value(int i, int l, const Point& x) const {
        return convolve(phi_.component(i), mu_.component(l), x, spec_);
    }

    // supp(phi^i) + supp(mu^l) (Minkowski hull; non-compact passes through)
    SupportHull support(int i, int l) const {
        auto hg = phi_.component(i).support();
        auto hm = mu_.component(l).support();
        SupportHull h;
        h.compact = hg.compact && hm.compact;
        h.lo = h.compact ? hg.lo + hm.lo : -kInf;
        h.hi = h.compact ? hg.hi + hm.hi : kInf;
        return h;
    }

    // Real Tabulated snapshot of entry (i,l) on its support hull. The spec's
    // Tabulated kind is real-valued, so a materially complex convolution is
    // rejected rather than silently truncated.
    GeneratorComponent materialize(int i, int l, double step = 0.0,
                                   double imag_tol = 1e-9) const {
        auto hull = support(i, l);
        if (!hull.compact) throw Error("materialize needs a compactly supported convolution");
        if (step <= 0.0) step = 1.0 / spec_.base_subdivisions;
        double worst_imag = 0.0;
        auto comp = tabulate(
            [&](double x) {
                Complex v = value(i, l, Point(x));
                worst_imag = std::max(worst_imag, std::abs(v.imag()));
                return v.real();
            },
            hull.lo, hull.hi, step);
        if (worst_imag > imag_tol)
            throw Error("complex-valued convolution cannot be materialized as Tabulated");
        return comp;
    }

    const GeneratorVector& generator() const { return phi_; }
    const VecMeasure& measure() const { return mu_; }
    const EsssupSpec& spec() const { return spec_; }

private:
    GeneratorVector phi_;
    VecMeasure mu_;
    EsssupSpec spec_;
};

// ---------------------------------------------------------------------------
// Young-type bound ||phi * mu||_W1 <= 2^d ||phi||_W1 ||mu||
// ---------------------------------------------------------------------------

struct YoungBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

inline YoungBound check_young_bound(const GeneratorComponent& g, const MeasureComponent& m,
                                    const EsssupSpec& spec = {}, double rel_tol = 1e-6) {
    YoungBound out;
    out.rhs = std::pow(2.0, g.dim()) * w_norm(g, 1.0, spec).value * m.total_variation();
    if (m.is_zero()) {
        out.lhs = 0.0;
        out.pass = true;
        return out;
    }
    ConvolvedGenerator conv(GeneratorVector{{g}}, VecMeasure{{m}}, spec);
    auto tab = conv.materialize(0, 0);
    out.lhs = w_norm(tab, 1.0, spec).value;
    out.pass = out.lhs <= out.rhs * (1.0 + rel_tol);
    return out;
}

}  // namespace sis
