#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sis/common.hpp"
#include "sis/decay_fit.hpp"
#include "sis/generator.hpp"

namespace sis {

namespace detail {

// Polynomial tail majorant for one side of an infinite cell sum:
// per-cell sup over [k, k+1] is at most scale * (1 + k - shift)^(-exponent).
struct PolyTail {
    double scale = 0.0;
    double exponent = kInf;
    double shift = 0.0;

    bool present() const { return scale > 0.0 && std::isfinite(exponent); }

    // bound on sum_{k >= K} scale (1 + k - shift)^(-exponent)
    double sum_from(double K) const {
        if (!present()) return 0.0;
        double base = std::max(1.0, 1.0 + K - shift);
        return scale * (std::pow(base, -exponent) +
                        std::pow(base, 1.0 - exponent) / (exponent - 1.0));
    }

    double sup_from(double K) const {
        if (!present()) return 0.0;
        return scale * std::pow(std::max(1.0, 1.0 + K - shift), -exponent);
    }

    PolyTail pth_power(double p) const {
        if (!present()) return {};
        return PolyTail{std::pow(scale, p), exponent * p, shift};
    }
};

struct CellSup {
    double value = 0.0;
    double delta = 0.0;
    bool converged = true;
};

// Grid maximum of |f| over the closed cell [lo, lo+1]^d with geometric grid
// refinement. Continuous integrands make esssup = sup, so the refinement
// converges; endpoints are always sampled.
template <class F>
CellSup cell_sup(F&& absf, const Point& lo, const EsssupSpec& spec) {
    CellSup out;
    int m = spec.base_subdivisions;
    double prev = -1.0;
    for (int round = 0; round < spec.max_rounds; ++round) {
        double mx = 0.0;
        if (lo.dim() == 1) {
            for (int j = 0; j <= m; ++j)
                mx = std::max(mx, absf(Point(lo[0] + static_cast<double>(j) / m)));
        } else {
            for (int j0 = 0; j0 <= m; ++j0)
                for (int j1 = 0; j1 <= m; ++j1)
                    mx = std::max(mx, absf(Point(lo[0] + static_cast<double>(j0) / m,
                                                 lo[1] + static_cast<double>(j1) / m)));
        }
        if (round > 0) {
            out.delta = std::abs(mx - prev);
            out.value = mx;
            if (out.delta <= spec.rel_tol * std::max(mx, 1e-300)) return out;
        }
        prev = mx;
        m *= spec.refine_factor;
    }
    out.value = prev;
    out.converged = false;
    return out;
}

// Aggregates cell sups into a W^p norm: sum for p=1, sum of squares for
// p=2, running max for p=inf.
class WAccumulator {
public:
    explicit WAccumulator(double p) : p_(p) {}

    void add(double sup) {
        if (p_ == kInf)
            acc_ = std::max(acc_, sup);
        else
            acc_ += (p_ == 1.0) ? sup : sup * sup;
    }

    void add_delta(double d) { delta_ = std::max(delta_, d); }

    // remaining two-sided contribution of all cells |k| >= K
    double tail_contribution(const PolyTail& tail, double K) const {
        if (p_ == kInf) return tail.sup_from(K);
        if (p_ == 1.0) return 2.0 * tail.sum_from(K);
        return 2.0 * tail.pth_power(2.0).sum_from(K);  // bound on the remaining sum of squares
    }

    bool tail_negligible(const PolyTail& tail, double K, double rel_tol) const {
        return tail_contribution(tail, K) <= rel_tol * std::max(acc_, 1e-30);
    }

    NormEstimate finish(const PolyTail& tail, double tail_from) const {
        NormEstimate est;
        if (p_ == kInf) {
            est.value = tail.present() ? std::max(acc_, tail.sup_from(tail_from)) : acc_;
        } else {
            double total = acc_;
            if (tail.present()) total += tail_contribution(tail, tail_from);
            est.value = (p_ == 2.0) ? std::sqrt(total) : total;
        }
        est.refine_delta = delta_;
        return est;
    }

private:
    double p_;
    double acc_ = 0.0;
    double delta_ = 0.0;
};

// d=1 cell sum over [k, k+1], k in Z, for a callable with the given support
// hull (possibly infinite with a polynomial tail majorant). Cells that touch
// the support only at a boundary point are skipped: they contribute nothing
// to the esssup.
template <class F>
NormEstimate w_norm_cells_1d(F&& absf, double p, const EsssupSpec& spec, double sup_lo,
                             double sup_hi, const PolyTail& tail) {
    WAccumulator acc(p);
    auto add_cell = [&](long k) {
        auto cs = cell_sup(absf, Point(static_cast<double>(k)), spec);
        if (!cs.converged) throw NonConvergence("cell sup refinement did not converge");
        acc.add(cs.value);
        acc.add_delta(cs.delta);
    };

    if (std::isfinite(sup_lo) && std::isfinite(sup_hi)) {
        long k_lo = static_cast<long>(std::ceil(sup_lo)) - 1;
        if (std::ceil(sup_lo) == sup_lo) k_lo += 1;
        long k_hi = static_cast<long>(std::floor(sup_hi));
        if (std::floor(sup_hi) == sup_hi) k_hi -= 1;
        k_hi = std::max(k_hi, k_lo);
        for (long k = k_lo; k <= k_hi; ++k) add_cell(k);
        return acc.finish({}, 0.0);
    }

    // symmetric growth until the tail majorant is negligible
    const long hard_cap = 1 << 20;
    long K = 8;
    for (long k = -K; k < K; ++k) add_cell(k);
    while (!acc.tail_negligible(tail, static_cast<double>(K), spec.rel_tol)) {
        if (K >= hard_cap) throw NonConvergence("tail bound not reached within cell cap");
        for (long k = K; k < 2 * K; ++k) {
            add_cell(k);
            add_cell(-k - 1);
        }
        K *= 2;
    }
    return acc.finish(tail, static_cast<double>(K));
}

// d=2, compact support hull [lo, hi]^2 only.
template <class F>
NormEstimate w_norm_cells_2d(F&& absf, double p, const EsssupSpec& spec, double sup_lo,
                             double sup_hi) {
    if (!std::isfinite(sup_lo) || !std::isfinite(sup_hi))
        throw Error("2-d W-norms need compact support");
    WAccumulator acc(p);
    long k_lo = static_cast<long>(std::ceil(sup_lo)) - 1;
    if (std::ceil(sup_lo) == sup_lo) k_lo += 1;
    long k_hi = static_cast<long>(std::floor(sup_hi));
    if (std::floor(sup_hi) == sup_hi) k_hi -= 1;
    k_hi = std::max(k_hi, k_lo);
    for (long k0 = k_lo; k0 <= k_hi; ++k0)
        for (long k1 = k_lo; k1 <= k_hi; ++k1) {
            auto cs = cell_sup(absf, Point(static_cast<double>(k0), static_cast<double>(k1)), spec);
            if (!cs.converged)
                throw NonConvergence("cell sup refinement did not converge");
            acc.add(cs.value);
            acc.add_delta(cs.delta);
        }
    return acc.finish({}, 0.0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// W^p norms (Wiener amalgam): sum over integer cells of per-cell esssup.
// ---------------------------------------------------------------------------

inline NormEstimate w_norm_shifted(const GeneratorComponent& g, const Point& shift, double p,
                                   const EsssupSpec& spec = {}) {
    require_supported_p(p);
    auto hull = g.support();
    if (g.dim() == 2) {
        double s = std::max(std::abs(shift[0]), std::abs(shift[1]));
        return detail::w_norm_cells_2d([&](const Point& x) { return std::abs(g.eval(x - shift)); },
                                       p, spec, hull.lo - s, hull.hi + s);
    }
    detail::PolyTail tail{g.tail_scale(), g.tail_exponent(), std::abs(shift[0])};
    return detail::w_norm_cells_1d([&](const Point& x) { return std::abs(g.eval(x - shift)); }, p,
                                   spec, hull.compact ? hull.lo + shift[0] : -kInf,
                                   hull.compact ? hull.hi + shift[0] : kInf, tail);
}

inline NormEstimate w_norm(const GeneratorComponent& g, double p, const EsssupSpec& spec = {}) {
    return w_norm_shifted(g, Point::zero(g.dim()), p, spec);
}

// Vector norm convention: sum of component norms.
inline NormEstimate w_norm_vector(const GeneratorVector& phi, double p,
                                  const EsssupSpec& spec = {}) {
    NormEstimate total;
    for (const auto& c : phi.components()) {
        auto e = w_norm(c, p, spec);
        total.value += e.value;
        total.refine_delta = std::max(total.refine_delta, e.refine_delta);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Oscillation osc_gamma g(x) = sup_{|dx| < gamma} |g(x+dx) - g(x)| (d=1).
// ---------------------------------------------------------------------------

inline double osc(const GeneratorComponent& g, double gamma, const Point& x,
                  const EsssupSpec& spec = {}) {
    if (gamma <= 0.0) throw Error("osc needs gamma > 0");
    if (g.dim() != 1) throw Error("osc is implemented for d=1");
    double gx = g.eval(x[0]);
    int m = spec.base_subdivisions;
    double prev = -1.0;
    for (int round = 0; round < spec.max_rounds; ++round) {
        double mx = 0.0;
        for (int j = 0; j <= m; ++j) {
            double dx = -gamma + 2.0 * gamma * static_cast<double>(j) / m;
            mx = std::max(mx, std::abs(g.eval(x[0] + dx) - gx));
        }
        if (round > 0 && std::abs(mx - prev) <= spec.rel_tol * std::max(mx, 1e-300)) return mx;
        prev = mx;
        m *= spec.refine_factor;
    }
    return prev;  // best estimate; osc itself is total
}

// W^1 norm of x -> osc_gamma g(x), cell by cell.
inline NormEstimate osc_w1_norm(const GeneratorComponent& g, double gamma,
                                const EsssupSpec& spec = {}) {
    if (gamma <= 0.0) throw Error("osc needs gamma > 0");
    if (g.dim() != 1) throw Error("osc is implemented for d=1");
    auto hull = g.support();
    auto oscf = [&](const Point& x) { return osc(g, gamma, x, spec); };
    if (hull.compact)
        return detail::w_norm_cells_1d(oscf, 1.0, spec, hull.lo - gamma, hull.hi + gamma, {});
    // |osc_gamma g(x)| <= g(|x|-gamma) - g(|x|+gamma) <= 2 s gamma scale (1+|x|-gamma)^(-s-1)
    detail::PolyTail tail{2.0 * g.tail_exponent() * gamma * g.tail_scale(),
                          g.tail_exponent() + 1.0, gamma};
    return detail::w_norm_cells_1d(oscf, 1.0, spec, -kInf, kInf, tail);
}

// ---------------------------------------------------------------------------
// Pointwise decay certificate |g(x)| <= C0 (1+|x|)^(-s).
// ---------------------------------------------------------------------------

inline DecayFit verify_decay(const GeneratorComponent& g, double s, double max_offset = 64.0,
                             double sample_step = 0.25) {
    if (s <= 0.0) throw Error("verify_decay needs s > 0");
    auto hull = g.support();
    double reach = hull.compact ? std::max(std::abs(hull.lo), std::abs(hull.hi)) + 2.0 : max_offset;
    std::vector<DecaySample> samples;
    for (double x = 0.0; x <= reach; x += sample_step) {
        samples.push_back({x, std::abs(g.eval(x))});
        if (x > 0.0) samples.push_back({x, std::abs(g.eval(-x))});
    }
    return fit_decay(std::move(samples), s, 0.0);
}

}  // namespace sis
