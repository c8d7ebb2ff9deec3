#pragma once

#include <cmath>
#include <utility>

#include "sis/amalgam.hpp"
#include "sis/common.hpp"
#include "sis/measure.hpp"
#include "sis/sampling.hpp"

namespace sis {

// ---------------------------------------------------------------------------
// Generator perturbation budget: epsilon0 is the positive root of
//   eps^2 + C_p eps - A_p m_p^2 / (2^d N ||mu||) = 0,
// with C_p = ||Phi||_W1 + A_p m_p / (2^d N ||mu||), capped below m_p.
// ---------------------------------------------------------------------------

struct GeneratorBudget {
    double C_p = 0.0;
    double epsilon0 = 0.0;
    // inputs echo
    double A_p = 0.0, m_p = 0.0, N = 1.0, mu_tv = 0.0, phi_w1 = 0.0;
    int d = 1;
    bool use_sharper_m = false;  // m'_p variant instead of m_p - eps (off by default)

    // (A'_p, B'_p) at a spent budget eps in (0, epsilon0)
    std::pair<double, double> bounds(double eps) const {
        if (eps >= epsilon0 || eps >= m_p)
            throw BudgetExceeded("generator perturbation exceeds epsilon0");
        double denom_m = m_p - eps;  // Lemma-type lower bound m'_p >= m_p - eps
        double pack = std::pow(2.0, d) * N * mu_tv;
        double a = A_p * m_p / (phi_w1 + eps) - pack * eps / denom_m;
        double b = pack * (phi_w1 + eps) / denom_m;
        return {a, b};
    }

    double quadratic_residual(double eps) const {
        return eps * eps + C_p * eps - A_p * m_p * m_p / (std::pow(2.0, d) * N * mu_tv);
    }
};

inline GeneratorBudget epsilon0_generator(double A_p, double m_p, double N, int d, double mu_tv,
                                          double phi_w1) {
    if (A_p <= 0.0 || m_p <= 0.0 || N <= 0.0 || mu_tv <= 0.0 || phi_w1 <= 0.0)
        throw Error("budget inputs must be positive");
    GeneratorBudget b;
    b.A_p = A_p;
    b.m_p = m_p;
    b.N = N;
    b.d = d;
    b.mu_tv = mu_tv;
    b.phi_w1 = phi_w1;
    double pack = std::pow(2.0, d) * N * mu_tv;
    double q = A_p * m_p * m_p / pack;
    b.C_p = phi_w1 + A_p * m_p / pack;
    b.epsilon0 = 0.5 * (std::sqrt(b.C_p * b.C_p + 4.0 * q) - b.C_p);
    b.epsilon0 = std::min(b.epsilon0, m_p);  // the proof requires eps < m_p as well
    return b;
}

// ---------------------------------------------------------------------------
// Measure perturbation budget: epsilon0 = A_p m_p / (2^d N ||Phi||_W1),
// bounds shift linearly.
// ---------------------------------------------------------------------------

struct MeasureBudget {
    double epsilon0 = 0.0;
    double A_p = 0.0, m_p = 0.0, N = 1.0, phi_w1 = 0.0;
    int d = 1;

    std::pair<double, double> bounds(double eps, double B_p) const {
        if (eps >= epsilon0) throw BudgetExceeded("measure perturbation exceeds epsilon0");
        double corr = std::pow(2.0, d) * N * phi_w1 * eps / m_p;
        return {A_p - corr, B_p + corr};
    }
};

inline MeasureBudget epsilon0_measure(double A_p, double m_p, double N, int d, double phi_w1) {
    if (A_p <= 0.0 || m_p <= 0.0 || N <= 0.0 || phi_w1 <= 0.0)
        throw Error("budget inputs must be positive");
    MeasureBudget b;
    b.A_p = A_p;
    b.m_p = m_p;
    b.N = N;
    b.d = d;
    b.phi_w1 = phi_w1;
    b.epsilon0 = A_p * m_p / (std::pow(2.0, d) * N * phi_w1);
    return b;
}

// ---------------------------------------------------------------------------
// Combined budget: a generator stage at eps1 followed by a measure stage
// with the intermediate bounds A'' and B''; epsilon0 = min{eps1, eps2}.
// With eps1 at the full generator root, A'' vanishes by construction and the
// combined budget degenerates to 0, so callers that need a usable combined
// budget pick eps1 strictly inside (the explicit-eps1 overload).
// ---------------------------------------------------------------------------

struct CombinedBudget {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double epsilon0 = 0.0;
    double A_pp = 0.0;  // intermediate bounds after the generator stage
    double B_pp = 0.0;
    double A_p = 0.0, m_p = 0.0, N = 1.0, mu_tv = 0.0, phi_w1 = 0.0;
    int d = 1;

    // (A'_p, B'_p) for actual magnitudes e_g <= eps1, e_m <= eps2
    std::pair<double, double> bounds(double e_g, double e_m) const {
        if (e_g > eps1 || e_m > eps2)
            throw BudgetExceeded("combined perturbation exceeds its stage budgets");
        double pack = std::pow(2.0, d) * N;
        double a2 = A_p * m_p / (phi_w1 + e_g) - pack * mu_tv * e_g / (m_p - e_g);
        double b2 = pack * mu_tv * (phi_w1 + e_g) / (m_p - e_g);
        double corr = pack * (phi_w1 + e_g) * e_m / (m_p - e_g);
        return {a2 - corr, b2 + corr};
    }
};

inline CombinedBudget epsilon0_combined_at(double A_p, double m_p, double N, int d, double mu_tv,
                                           double phi_w1, double eps1) {
    auto gen = epsilon0_generator(A_p, m_p, N, d, mu_tv, phi_w1);
    if (eps1 > gen.epsilon0) throw BudgetExceeded("eps1 beyond the generator root");
    CombinedBudget c;
    c.A_p = A_p;
    c.m_p = m_p;
    c.N = N;
    c.d = d;
    c.mu_tv = mu_tv;
    c.phi_w1 = phi_w1;
    c.eps1 = eps1;
    double pack = std::pow(2.0, d) * N;
    c.A_pp = A_p * m_p / (phi_w1 + eps1) - pack * mu_tv * eps1 / (m_p - eps1);
    c.B_pp = pack * mu_tv * (phi_w1 + eps1) / (m_p - eps1);
    c.eps2 = std::max(0.0, c.A_pp) * (m_p - eps1) / (pack * (phi_w1 + eps1));
    c.epsilon0 = std::min(c.eps1, c.eps2);
    return c;
}

inline CombinedBudget epsilon0_combined(double A_p, double m_p, double N, int d, double mu_tv,
                                        double phi_w1) {
    auto gen = epsilon0_generator(A_p, m_p, N, d, mu_tv, phi_w1);
    return epsilon0_combined_at(A_p, m_p, N, d, mu_tv, phi_w1, gen.epsilon0);
}

// ---------------------------------------------------------------------------
// Jitter: ||U - U_Delta|| <= N(delta, p, d) ||osc_{||Delta||inf} Phi * mu||_W1
// summed over the (i, l) entries. N uses the ORIGINAL set's separation.
// ---------------------------------------------------------------------------

inline double jitter_bound(const GeneratorVector& phi, const VecMeasure& mu, double delta_inf,
                           double sep_delta, double p, int d, const EsssupSpec& spec = {}) {
    if (delta_inf <= 0.0) throw Error("jitter bound needs ||Delta||inf > 0");
    ConvolvedGenerator conv(phi, mu, spec);
    double osc_total = 0.0;
    for (int l = 0; l < mu.t(); ++l)
        for (int i = 0; i < phi.r(); ++i) {
            if (mu.component(l).is_zero()) continue;
            auto tab = conv.materialize(i, l);
            osc_total += osc_w1_norm(tab, delta_inf, spec).value;
        }
    return mesh_constant(sep_delta, p, d) * osc_total;
}

// Power iteration on M*M for the largest singular value; same contract as
// op_norm(p=2) but for an explicit matrix (used on entrywise differences).
inline OpNormResult largest_singular_value_power(const Eigen::MatrixXcd& m, double tol = 1e-10,
                                                 int max_iters = 20000) {
    OpNormResult out;
    if (m.size() == 0) return out;
    Eigen::VectorXcd v(m.cols());
    for (int i = 0; i < m.cols(); ++i) v(i) = 1.0 + 1e-3 * static_cast<double>(i);
    v.normalize();
    double lambda = 0.0;
    for (int iter = 1; iter <= max_iters; ++iter) {
        Eigen::VectorXcd w = m.adjoint() * (m * v);
        double next = w.norm();
        out.iterations = iter;
        if (next == 0.0) return out;
        v = w / next;
        if (iter > 1 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
            out.value = std::sqrt(next);
            return out;
        }
        lambda = next;
    }
    out.value = std::sqrt(lambda);
    out.converged = false;
    return out;
}

// op-norm of the entrywise difference; index maps must align.
inline double operator_distance(const SamplingOperator& a, const SamplingOperator& b, double p) {
    if (a.r() != b.r() || a.t() != b.t() || a.rows() != b.rows() ||
        a.window() != b.window())
        throw DimensionMismatch("operators have different index maps");
    require_supported_p(p);
    Eigen::MatrixXcd diff = a.dense() - b.dense();
    if (p == 2.0) return largest_singular_value_power(diff).value;
    if (p == 1.0) {
        double best = 0.0;
        for (int c = 0; c < diff.cols(); ++c) best = std::max(best, diff.col(c).cwiseAbs().sum());
        return best;
    }
    double best = 0.0;
    for (int rrow = 0; rrow < diff.rows(); ++rrow)
        best = std::max(best, diff.row(rrow).cwiseAbs().sum());
    return best;
}

// ---------------------------------------------------------------------------
// Bound transfer: dist < eta_p gives the perturbed operator the bounds
// (eta_p - dist, eta_p + beta_p); otherwise the budget is exhausted.
// ---------------------------------------------------------------------------

struct NutshellTransfer {
    bool admissible = false;
    double eta_prime = 0.0;
    double beta_prime = 0.0;
};

inline NutshellTransfer nutshell_transfer(double eta_p, double beta_p, double dist) {
    if (dist < 0.0) throw Error("operator distance cannot be negative");
    NutshellTransfer t;
    if (dist < eta_p) {
        t.admissible = true;
        t.eta_prime = eta_p - dist;
        t.beta_prime = eta_p + beta_p;
    }
    return t;
}

}  // namespace sis
