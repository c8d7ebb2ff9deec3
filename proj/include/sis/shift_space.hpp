#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "sis/amalgam.hpp"
#include "sis/common.hpp"
#include "sis/generator.hpp"

namespace sis {

// ---------------------------------------------------------------------------
// Coefficient vectors on the truncated window [-K, K] (d=1): r complex
// sequences sharing the window.
// ---------------------------------------------------------------------------

class CoeffVector {
public:
    CoeffVector(int r, int K) : K_(K), data_(static_cast<std::size_t>(r)) {
        if (r < 1 || K < 0) throw Error("coefficient vector needs r >= 1, K >= 0");
        for (auto& seq : data_) seq = Eigen::VectorXcd::Zero(2 * K + 1);
    }

    static CoeffVector unit(int r, int K, int component, int k) {
        CoeffVector c(r, K);
        c.at(component, k) = 1.0;
        return c;
    }

    int r() const { return static_cast<int>(data_.size()); }
    int window() const { return K_; }
    int length() const { return 2 * K_ + 1; }

    Complex& at(int i, int k) { return data_[static_cast<std::size_t>(i)](k + K_); }
    Complex at(int i, int k) const { return data_[static_cast<std::size_t>(i)](k + K_); }

    const Eigen::VectorXcd& sequence(int i) const { return data_[static_cast<std::size_t>(i)]; }
    Eigen::VectorXcd& sequence(int i) { return data_[static_cast<std::size_t>(i)]; }

    CoeffVector operator+(const CoeffVector& o) const {
        require_compatible(o);
        CoeffVector out = *this;
        for (int i = 0; i < r(); ++i) out.data_[static_cast<std::size_t>(i)] += o.sequence(i);
        return out;
    }

    CoeffVector operator-(const CoeffVector& o) const {
        require_compatible(o);
        CoeffVector out = *this;
        for (int i = 0; i < r(); ++i) out.data_[static_cast<std::size_t>(i)] -= o.sequence(i);
        return out;
    }

    CoeffVector scaled(Complex a) const {
        CoeffVector out = *this;
        for (auto& seq : out.data_) seq *= a;
        return out;
    }

    void require_compatible(const CoeffVector& o) const {
        if (o.r() != r() || o.K_ != K_) throw DimensionMismatch("coefficient windows differ");
    }

private:
    int K_;
    std::vector<Eigen::VectorXcd> data_;
};

// f(x) = sum_{k in window} sum_i c^i_k phi^i(x - k); exact finite sum.
inline Complex synthesize(const CoeffVector& c, const GeneratorVector& phi, const Point& x) {
    if (phi.r() != c.r()) throw DimensionMismatch("generator/coefficient component mismatch");
    if (phi.dim() != 1) throw Error("synthesis is implemented for d=1");
    Complex acc = 0.0;
    for (int i = 0; i < phi.r(); ++i) {
        const auto& g = phi.component(i);
        auto hull = g.support();
        int k_lo = -c.window(), k_hi = c.window();
        if (hull.compact) {
            // phi(x-k) != 0 needs x - hi < k < x - lo
            k_lo = std::max(k_lo, static_cast<int>(std::ceil(x[0] - hull.hi)));
            k_hi = std::min(k_hi, static_cast<int>(std::floor(x[0] - hull.lo)));
        }
        for (int k = k_lo; k <= k_hi; ++k) {
            Complex w = c.at(i, k);
            if (w != 0.0) acc += w * g.eval(x[0] - k);
        }
    }
    return acc;
}

// ||C|| = sum_i ||c^i||_{l^p} (the summed-component convention).
inline double coeff_norm(const CoeffVector& c, double p) {
    require_supported_p(p);
    double total = 0.0;
    for (int i = 0; i < c.r(); ++i) {
        const auto& seq = c.sequence(i);
        if (p == 1.0)
            total += seq.cwiseAbs().sum();
        else if (p == 2.0)
            total += seq.norm();
        else
            total += seq.size() ? seq.cwiseAbs().maxCoeff() : 0.0;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Gram matrix <phi^i(.-k), phi^j(.-l)> on the window, assembled from the
// shift-invariant correlations rho_ij(m) = int phi^i(u) phi^j(u+m) du by
// per-unit-cell Gauss-Legendre quadrature.
// ---------------------------------------------------------------------------

namespace detail {

inline double correlation(const GeneratorComponent& a, const GeneratorComponent& b, double m,
                          const QuadRule& rule, double tail_tol = 1e-12) {
    auto ha = a.support();
    auto hb = b.support();
    double lo, hi;
    if (ha.compact && hb.compact) {
        lo = std::max(ha.lo, hb.lo - m);
        hi = std::min(ha.hi, hb.hi - m);
        if (hi <= lo) return 0.0;
    } else {
        // polynomial tails: truncate once the tail estimate is negligible
        double sa = ha.compact ? kInf : a.tail_exponent();
        double sb = hb.compact ? kInf : b.tail_exponent();
        double s = std::min(sa, sb);
        double scale = std::max(a.tail_scale(), 1.0) * std::max(b.tail_scale(), 1.0);
        double R = 64.0 + std::abs(m);
        while (scale * 2.0 * std::pow(1.0 + R - std::abs(m), 1.0 - s) / (s - 1.0) > tail_tol &&
               R < 1e7)
            R *= 2.0;
        lo = std::min(ha.compact ? ha.lo : -R, hb.compact ? hb.lo - m : -R - m);
        hi = std::max(ha.compact ? ha.hi : R, hb.compact ? hb.hi - m : R - m);
    }
    return integrate([&](double u) { return a.eval(u) * b.eval(u + m); }, lo, hi, rule);
}

}  // namespace detail

// Hermitian (real symmetric: all generator kinds are real-valued) block
// matrix of size r(2K+1) square; stacked index = i*(2K+1) + (k+K).
// Raises QuadratureFailure when doubling the quadrature order moves any
// correlation by more than quad_check_tol.
inline Eigen::MatrixXd gram_matrix(const GeneratorVector& phi, int K, int quad_order = 8,
                                   double quad_check_tol = 1e-8) {
    if (phi.dim() != 1) throw Error("gram matrix is implemented for d=1");
    const int n = 2 * K + 1;
    const int r = phi.r();
    auto rule = gauss_legendre(quad_order);
    auto rule2 = gauss_legendre(2 * quad_order);

    // correlations rho_ij(m), m in [-(n-1), n-1]
    std::vector<Eigen::MatrixXd> rho(static_cast<std::size_t>(2 * n - 1));
    for (int m = -(n - 1); m <= n - 1; ++m) {
        Eigen::MatrixXd block(r, r);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                double v = detail::correlation(phi.component(i), phi.component(j),
                                               static_cast<double>(m), rule);
                double v2 = detail::correlation(phi.component(i), phi.component(j),
                                                static_cast<double>(m), rule2);
                if (std::abs(v - v2) > quad_check_tol)
                    throw QuadratureFailure("gram entry moved when quadrature order doubled");
                block(i, j) = v2;
            }
        rho[static_cast<std::size_t>(m + n - 1)] = block;
    }

    Eigen::MatrixXd G(r * n, r * n);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = -K; k <= K; ++k)
                for (int l = -K; l <= K; ++l)
                    G(i * n + (k + K), j * n + (l + K)) =
                        rho[static_cast<std::size_t>((k - l) + n - 1)](i, j);
    return 0.5 * (G + G.transpose());
}

// ---------------------------------------------------------------------------
// Riesz bounds m_p, M_p of Eq-type (2.1.1)
// ---------------------------------------------------------------------------

struct RieszBounds {
    double p = 2.0;
    double m_p = 0.0;
    double M_p = 0.0;
    enum class Method { GramEigen, HeuristicSearch } method = Method::GramEigen;
};

inline int interior_margin(const GeneratorVector& phi) {
    auto hull = phi.support();
    if (!hull.compact) return 8;
    return static_cast<int>(std::ceil(std::max(std::abs(hull.lo), std::abs(hull.hi))));
}

// L^p norm of the synthesized function by composite Gauss-Legendre (finite p)
// or refined grid sup (p = inf) over the window's support hull.
inline double lp_norm_synthesized(const CoeffVector& c, const GeneratorVector& phi, double p,
                                  const EsssupSpec& spec = {}, int quad_order = 8) {
    require_supported_p(p);
    auto hull = phi.support();
    double lo = -c.window() + (hull.compact ? hull.lo : -16.0);
    double hi = c.window() + (hull.compact ? hull.hi : 16.0);
    if (p == kInf) {
        auto absf = [&](const Point& x) { return std::abs(synthesize(c, phi, x)); };
        return detail::w_norm_cells_1d(absf, kInf, spec, lo, hi, {}).value;
    }
    auto rule = gauss_legendre(quad_order);
    double integral = integrate(
        [&](double x) { return std::pow(std::abs(synthesize(c, phi, Point(x))), p); }, lo, hi,
        rule);
    return std::pow(integral, 1.0 / p);
}

inline RieszBounds riesz_bounds(const GeneratorVector& phi, int K, double p,
                                const EsssupSpec& spec = {}, int quad_order = 8,
                                std::uint64_t seed = 7) {
    require_supported_p(p);
    RieszBounds out;
    out.p = p;

    if (p == 2.0) {
        int margin = interior_margin(phi);
        int Ki = std::max(1, K - margin);
        Eigen::MatrixXd G = gram_matrix(phi, Ki, quad_order);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        double lmin = es.eigenvalues().minCoeff();
        double lmax = es.eigenvalues().maxCoeff();
        if (lmin < 1e-12 * lmax)
            throw DegenerateGram("gram matrix is numerically singular at this truncation");
        out.m_p = std::sqrt(std::max(lmin, 0.0));
        out.M_p = std::sqrt(lmax);
        // conservative conversion to the summed-component convention for r > 1
        if (phi.r() > 1) out.m_p /= std::sqrt(static_cast<double>(phi.r()));
        out.method = RieszBounds::Method::GramEigen;
        return out;
    }

    // p in {1, inf}: M_p is upper-bounded by ||Phi||_(W^1); m_p is a
    // heuristic upper estimate of the true lower bound, minimized over
    // canonical + structured + random sparse coefficient vectors.
    out.method = RieszBounds::Method::HeuristicSearch;
    out.M_p = w_norm_vector(phi, 1.0, spec).value;

    int margin = interior_margin(phi);
    int Ki = std::max(1, K - margin);
    double best = kInf;
    auto consider = [&](const CoeffVector& c) {
        double denom = coeff_norm(c, p);
        if (denom <= 0.0) return;
        best = std::min(best, lp_norm_synthesized(c, phi, p, spec) / denom);
    };

    for (int i = 0; i < phi.r(); ++i) consider(CoeffVector::unit(phi.r(), K, i, 0));
    for (int i = 0; i < phi.r(); ++i) {  // alternating signs probe symbol zeros at theta = pi
        CoeffVector c(phi.r(), K);
        for (int k = -Ki; k <= Ki; ++k) c.at(i, k) = (k % 2 == 0) ? 1.0 : -1.0;
        consider(c);
    }
    Rng rng(seed);
    for (int trial = 0; trial < 24; ++trial) {
        CoeffVector c(phi.r(), K);
        int fill = 1 + rng.index(std::max(1, Ki / 2));
        for (int q = 0; q < fill; ++q) {
            int i = rng.index(phi.r());
            int k = -Ki + rng.index(2 * Ki + 1);
            c.at(i, k) = rng.uniform(-1.0, 1.0);
        }
        consider(c);
    }
    out.m_p = std::isfinite(best) ? best : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Dual generator: solve G A = I on the truncated window; the dual basis
// element (j, n) expands as sum_{i,k} A[(i,k),(j,n)] phi^i(. - k). Only the
// interior columns (margin trimmed) are meaningful.
// ---------------------------------------------------------------------------

class DualGenerator {
public:
    DualGenerator(Eigen::MatrixXd coeffs, int r, int K, int margin)
        : coeffs_(std::move(coeffs)), r_(r), K_(K), margin_(margin) {}

    int window() const { return K_; }
    int interior_window() const { return std::max(0, K_ - margin_); }
    int r() const { return r_; }

    double coefficient(int i, int k, int j, int n) const {
        const int len = 2 * K_ + 1;
        return coeffs_(i * len + (k + K_), j * len + (n + K_));
    }

    // expansion coefficients of the dual element (j, n) as a CoeffVector
    CoeffVector dual_coeffs(int j, int n) const {
        CoeffVector c(r_, K_);
        for (int i = 0; i < r_; ++i)
            for (int k = -K_; k <= K_; ++k) c.at(i, k) = coefficient(i, k, j, n);
        return c;
    }

    const Eigen::MatrixXd& matrix() const { return coeffs_; }

private:
    Eigen::MatrixXd coeffs_;
    int r_;
    int K_;
    int margin_;
};

inline DualGenerator dual_generator(const GeneratorVector& phi, int K, int quad_order = 8) {
    Eigen::MatrixXd G = gram_matrix(phi, K, quad_order);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    double lmin = es.eigenvalues().minCoeff();
    double lmax = es.eigenvalues().maxCoeff();
    if (lmin < 1e-12 * lmax)
        throw DegenerateGram("gram matrix is numerically singular at this truncation");
    Eigen::MatrixXd A = G.ldlt().solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
    return DualGenerator(std::move(A), phi.r(), K, interior_margin(phi));
}

}  // namespace sis
