#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sis {

using Complex = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct DegenerateGram : Error { using Error::Error; };
struct DegenerateOperator : Error { using Error::Error; };
struct SingularNormalEquations : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotSeparated : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct InadmissibleNu : Error { using Error::Error; };
struct InadmissibleEpsilon : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Points in R^d, d in {1, 2}
// ---------------------------------------------------------------------------

class Point {
public:
    explicit Point(double x) : dim_(1), c_{x, 0.0} {}
    Point(double x, double y) : dim_(2), c_{x, y} {}

    int dim() const { return dim_; }
    double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

    double norm() const {
        return dim_ == 1 ? std::abs(c_[0]) : std::hypot(c_[0], c_[1]);
    }

    Point operator-(const Point& o) const {
        require_same_dim(o);
        return dim_ == 1 ? Point(c_[0] - o.c_[0]) : Point(c_[0] - o.c_[0], c_[1] - o.c_[1]);
    }
    Point operator+(const Point& o) const {
        require_same_dim(o);
        return dim_ == 1 ? Point(c_[0] + o.c_[0]) : Point(c_[0] + o.c_[0], c_[1] + o.c_[1]);
    }

    static Point zero(int dim) { return dim == 1 ? Point(0.0) : Point(0.0, 0.0); }

private:
    void require_same_dim(const Point& o) const {
        if (dim_ != o.dim_) throw DimensionMismatch("point dimensions differ");
    }
    int dim_;
    std::array<double, 2> c_;
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

// ---------------------------------------------------------------------------
// p in {1, 2, inf}
// ---------------------------------------------------------------------------

inline bool is_supported_p(double p) { return p == 1.0 || p == 2.0 || p == kInf; }

inline void require_supported_p(double p) {
    if (!is_supported_p(p)) throw Error("p must be 1, 2, or inf");
}

inline std::string p_label(double p) {
    if (p == kInf) return "inf";
    return p == 1.0 ? "1" : "2";
}

// ---------------------------------------------------------------------------
// Refinement contract for numerical esssup / quadrature
// ---------------------------------------------------------------------------

struct EsssupSpec {
    int base_subdivisions = 16;  // samples per unit cell, first round
    int refine_factor = 2;
    double rel_tol = 1e-6;
    int max_rounds = 16;
};

// A refined numeric result together with the last refinement delta,
// which serves as the error estimate of the refinement contract.
struct NormEstimate {
    double value = 0.0;
    double refine_delta = 0.0;
    int rounds = 0;
};

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes on [-1, 1]
// ---------------------------------------------------------------------------

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Newton iteration on Legendre polynomials; exact for polynomials of
// degree <= 2n-1.
inline QuadRule gauss_legendre(int n) {
    if (n < 1) throw Error("quadrature order must be positive");
    QuadRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double pi = std::acos(-1.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

// Composite quadrature of f over [lo, hi], one panel per unit step
// (panels aligned to the integer grid so piecewise-polynomial integrands
// stay exact).
template <class F>
double integrate(F&& f, double lo, double hi, const QuadRule& rule) {
    if (hi <= lo) return 0.0;
    double total = 0.0;
    double a = std::floor(lo);
    while (a < hi) {
        double pa = std::max(a, lo);
        double pb = std::min(a + 1.0, hi);
        if (pb > pa) {
            double mid = 0.5 * (pa + pb);
            double half = 0.5 * (pb - pa);
            double acc = 0.0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                acc += rule.weights[q] * f(mid + half * rule.nodes[q]);
            total += half * acc;
        }
        a += 1.0;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix-seeded xorshift-free: std::mt19937_64 with
// explicit uniform mapping so byte-level determinism does not depend on
// distribution internals)
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    std::uint64_t next() {
        state_ = splitmix64(state_);
        return state_;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // symmetric uniform in [-amp, amp]
    double symmetric(double amp) { return uniform(-amp, amp); }

    int index(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

    // substream derived from a label, independent of draw order elsewhere
    Rng split(std::uint64_t label) const {
        return Rng(splitmix64(state_ ^ splitmix64(label)));
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace sis
