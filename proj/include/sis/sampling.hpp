#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "sis/common.hpp"
#include "sis/generator.hpp"
#include "sis/measure.hpp"
#include "sis/shift_space.hpp"

namespace sis {

// ---------------------------------------------------------------------------
// Sampling sets: sorted points with optional jitter; the separation constant
// is computed, never declared.
// ---------------------------------------------------------------------------

class SamplingSet {
public:
    static SamplingSet from_points(std::vector<double> points, double region) {
        SamplingSet s;
        std::sort(points.begin(), points.end());
        s.base_ = std::move(points);
        s.region_ = region;
        return s;
    }

    static SamplingSet integer_grid(double spacing, double offset, double region) {
        if (spacing <= 0.0) throw Error("grid spacing must be positive");
        std::vector<double> pts;
        long n_lo = static_cast<long>(std::ceil((-region - offset) / spacing));
        long n_hi = static_cast<long>(std::floor((region - offset) / spacing));
        for (long n = n_lo; n <= n_hi; ++n) pts.push_back(offset + spacing * static_cast<double>(n));
        return from_points(std::move(pts), region);
    }

    SamplingSet with_jitter(std::vector<double> jitter) const {
        if (jitter.size() != base_.size()) throw DimensionMismatch("jitter length mismatch");
        SamplingSet s = *this;
        s.jitter_ = std::move(jitter);
        return s;
    }

    // per-point deterministic jitter: independent of the region, so growing
    // windows keep earlier points' displacements
    SamplingSet with_uniform_jitter(double amplitude, std::uint64_t seed) const {
        std::vector<double> jitter(base_.size());
        for (std::size_t j = 0; j < base_.size(); ++j) {
            auto key = static_cast<std::uint64_t>(std::llround(base_[j] * 4096.0));
            jitter[j] = amplitude * (2.0 * to_unit(splitmix64(seed ^ splitmix64(key))) - 1.0);
        }
        return with_jitter(std::move(jitter));
    }

    std::size_t size() const { return base_.size(); }
    double base(std::size_t j) const { return base_[j]; }
    double effective(std::size_t j) const {
        return base_[j] + (jitter_.empty() ? 0.0 : jitter_[j]);
    }
    bool has_jitter() const { return !jitter_.empty(); }
    double jitter_sup() const {
        double m = 0.0;
        for (double d : jitter_) m = std::max(m, std::abs(d));
        return m;
    }
    double region() const { return region_; }

    // separation constant of the effective (jittered) set
    double separation() const { return separation_impl(true); }
    double base_separation() const { return separation_impl(false); }

private:
    static double to_unit(std::uint64_t v) { return static_cast<double>(v >> 11) * 0x1.0p-53; }

    double separation_impl(bool effective_pts) const {
        if (base_.size() < 2) throw Error("separation needs at least two points");
        std::vector<double> pts(base_.size());
        for (std::size_t j = 0; j < base_.size(); ++j)
            pts[j] = effective_pts ? effective(j) : base_[j];
        std::sort(pts.begin(), pts.end());
        double delta = kInf;
        for (std::size_t j = 1; j < pts.size(); ++j) delta = std::min(delta, pts[j] - pts[j - 1]);
        if (delta <= 0.0) throw NotSeparated("sampling points coincide");
        return delta;
    }

    std::vector<double> base_;
    std::vector<double> jitter_;
    double region_ = 0.0;
};

// d=2 separation via grid bucketing (points far apart never compared).
inline double separation_of(const std::vector<Point>& points) {
    if (points.size() < 2) throw Error("separation needs at least two points");
    if (points.front().dim() == 1) {
        std::vector<double> xs;
        xs.reserve(points.size());
        for (const auto& p : points) xs.push_back(p[0]);
        return SamplingSet::from_points(std::move(xs), 0.0).separation();
    }
    // bucket by unit cell, compare within 3x3 neighborhoods
    struct Cell {
        long cx, cy;
        bool operator<(const Cell& o) const { return cx != o.cx ? cx < o.cx : cy < o.cy; }
    };
    std::vector<std::pair<Cell, std::size_t>> buckets;
    buckets.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        buckets.push_back({{static_cast<long>(std::floor(points[i][0])),
                            static_cast<long>(std::floor(points[i][1]))},
                           i});
    std::sort(buckets.begin(), buckets.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    auto find_range = [&](long cx, long cy) {
        Cell key{cx, cy};
        auto lo = std::lower_bound(buckets.begin(), buckets.end(), key,
                                   [](const auto& a, const Cell& c) { return a.first < c; });
        auto hi = lo;
        while (hi != buckets.end() && !(key < hi->first)) ++hi;
        return std::pair(lo, hi);
    };
    double best = kInf;
    for (const auto& [cell, i] : buckets) {
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy) {
                auto [lo, hi] = find_range(cell.cx + dx, cell.cy + dy);
                for (auto it = lo; it != hi; ++it) {
                    if (it->second == i) continue;
                    best = std::min(best, distance(points[i], points[it->second]));
                }
            }
    }
    if (best <= 0.0) throw NotSeparated("sampling points coincide");
    if (!std::isfinite(best)) {
        // sparse set: fall back to all pairs (still fine at desk scale)
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j)
                best = std::min(best, distance(points[i], points[j]));
    }
    return best;
}

// N(delta, p, d) = (sqrt(d)/delta + 1)^(d/p); exponent 0 at p = inf.
inline double mesh_constant(double delta, double p, int d) {
    if (delta <= 0.0) throw Error("mesh constant needs delta > 0");
    require_supported_p(p);
    if (p == kInf) return 1.0;
    return std::pow(std::sqrt(static_cast<double>(d)) / delta + 1.0,
                    static_cast<double>(d) / p);
}

// ---------------------------------------------------------------------------
// Truncation window: coefficient indices [-K, K]; margin >= support width of
// Phi * mu (plus jitter slack) so interior rows and columns are exact.
// ---------------------------------------------------------------------------

struct TruncationWindow {
    int K = 0;
    double support_lo = 0.0;  // hull of Phi * mu over all (i, l)
    double support_hi = 0.0;
    bool compact = true;
    int margin = 0;

    int interior_lo() const { return -K + margin; }
    int interior_hi() const { return K - margin; }
};

inline TruncationWindow make_window(const GeneratorVector& phi, const VecMeasure& mu, int K,
                                    double jitter_slack = 0.0) {
    if (K < 1) throw Error("window needs K >= 1");
    TruncationWindow w;
    w.K = K;
    auto hg = phi.support();
    auto hm = mu.support();
    w.compact = hg.compact && hm.compact;
    if (w.compact) {
        w.support_lo = hg.lo + hm.lo;
        w.support_hi = hg.hi + hm.hi;
        w.margin = static_cast<int>(std::ceil(w.support_hi - w.support_lo + jitter_slack));
    } else {
        w.support_lo = -kInf;
        w.support_hi = kInf;
        w.margin = std::max(2, K / 4);
    }
    if (w.margin >= K) throw Error("window too small for the generator/measure support");
    return w;
}

// ---------------------------------------------------------------------------
// The truncated sampling operator: t x r blocks, block (l, i) holding
// (phi^i * mu^l)(x_j - k) over retained sample rows and window columns.
// ---------------------------------------------------------------------------

enum class RowPolicy {
    InteriorExact,  // keep samples whose full stencil lies inside the window
    AllInRegion,    // keep every sample in the region (non-compact generators)
};

class SamplingOperator {
public:
    struct BlockRow {
        int k_begin = 0;
        std::vector<Complex> values;
    };

    int r() const { return r_; }
    int t() const { return t_; }
    int rows() const { return static_cast<int>(row_positions_.size()); }
    int window() const { return window_.K; }
    int cols_per_component() const { return 2 * window_.K + 1; }
    const TruncationWindow& truncation() const { return window_; }
    const std::vector<double>& row_positions() const { return row_positions_; }
    const std::vector<std::size_t>& sample_indices() const { return sample_indices_; }
    bool exact_rows() const { return exact_rows_; }

    const GeneratorVector& generator() const { return phi_; }
    const VecMeasure& measure() const { return mu_; }
    const SamplingSet& sampling_set() const { return set_; }
    const EsssupSpec& spec() const { return spec_; }

    Complex entry(int l, int i, int row, int k) const {
        const auto& br = block(l, i)[static_cast<std::size_t>(row)];
        int idx = k - br.k_begin;
        if (idx < 0 || idx >= static_cast<int>(br.values.size())) return 0.0;
        return br.values[static_cast<std::size_t>(idx)];
    }

    const std::vector<BlockRow>& block(int l, int i) const {
        return blocks_[static_cast<std::size_t>(l * r_ + i)];
    }

    std::size_t stored_entries() const {
        std::size_t n = 0;
        for (const auto& b : blocks_)
            for (const auto& row : b) n += row.values.size();
        return n;
    }

    // block matrix-vector product: D_l(j) = sum_{i,k} U^{i,l}_{j,k} c^i_k
    std::vector<Eigen::VectorXcd> apply(const CoeffVector& c) const {
        if (c.r() != r_ || c.window() != window_.K)
            throw DimensionMismatch("coefficient vector does not match the operator window");
        std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(t_),
                                          Eigen::VectorXcd::Zero(rows()));
        for (int l = 0; l < t_; ++l)
            for (int i = 0; i < r_; ++i) {
                const auto& blk = block(l, i);
                for (int j = 0; j < rows(); ++j) {
                    const auto& br = blk[static_cast<std::size_t>(j)];
                    Complex acc = 0.0;
                    for (std::size_t q = 0; q < br.values.size(); ++q)
                        acc += br.values[q] * c.at(i, br.k_begin + static_cast<int>(q));
                    out[static_cast<std::size_t>(l)](j) += acc;
                }
            }
        return out;
    }

    // adjoint: conjugate transposed blocks in the r x t layout
    CoeffVector apply_adjoint(const std::vector<Eigen::VectorXcd>& d) const {
        if (static_cast<int>(d.size()) != t_)
            throw DimensionMismatch("sample vector does not match the operator layout");
        CoeffVector out(r_, window_.K);
        for (int l = 0; l < t_; ++l) {
            if (d[static_cast<std::size_t>(l)].size() != rows())
                throw DimensionMismatch("sample vector length mismatch");
            for (int i = 0; i < r_; ++i) {
                const auto& blk = block(l, i);
                for (int j = 0; j < rows(); ++j) {
                    const auto& br = blk[static_cast<std::size_t>(j)];
                    Complex dj = d[static_cast<std::size_t>(l)](j);
                    for (std::size_t q = 0; q < br.values.size(); ++q)
                        out.at(i, br.k_begin + static_cast<int>(q)) += std::conj(br.values[q]) * dj;
                }
            }
        }
        return out;
    }

    // stacked dense form: rows grouped by sample component l, columns by
    // generator component i
    Eigen::MatrixXcd dense() const {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(t_ * rows(), r_ * cols_per_component());
        for (int l = 0; l < t_; ++l)
            for (int i = 0; i < r_; ++i) {
                const auto& blk = block(l, i);
                for (int j = 0; j < rows(); ++j) {
                    const auto& br = blk[static_cast<std::size_t>(j)];
                    for (std::size_t q = 0; q < br.values.size(); ++q)
                        m(l * rows() + j,
                          i * cols_per_component() + (br.k_begin + static_cast<int>(q) + window_.K)) =
                            br.values[q];
                }
            }
        return m;
    }

    std::vector<int> interior_columns() const {
        std::vector<int> ks;
        for (int k = window_.interior_lo(); k <= window_.interior_hi(); ++k) ks.push_back(k);
        return ks;
    }

    Eigen::MatrixXcd dense_interior() const {
        auto ks = interior_columns();
        Eigen::MatrixXcd full = dense();
        Eigen::MatrixXcd m(full.rows(), r_ * static_cast<int>(ks.size()));
        for (int i = 0; i < r_; ++i)
            for (std::size_t q = 0; q < ks.size(); ++q)
                m.col(i * static_cast<int>(ks.size()) + static_cast<int>(q)) =
                    full.col(i * cols_per_component() + (ks[q] + window_.K));
        return m;
    }

    friend SamplingOperator assemble(const GeneratorVector&, const VecMeasure&,
                                     const SamplingSet&, const TruncationWindow&,
                                     const EsssupSpec&, std::optional<RowPolicy>);

private:
    SamplingOperator(GeneratorVector phi, VecMeasure mu, SamplingSet set, TruncationWindow window,
                     EsssupSpec spec)
        : phi_(std::move(phi)),
          mu_(std::move(mu)),
          set_(std::move(set)),
          window_(window),
          spec_(spec),
          r_(phi_.r()),
          t_(mu_.t()) {}

    GeneratorVector phi_;
    VecMeasure mu_;
    SamplingSet set_;
    TruncationWindow window_;
    EsssupSpec spec_;
    int r_;
    int t_;
    std::vector<double> row_positions_;        // effective sample locations
    std::vector<std::size_t> sample_indices_;  // indices into the sampling set
    std::vector<std::vector<BlockRow>> blocks_;
    bool exact_rows_ = true;
};

inline SamplingOperator assemble(const GeneratorVector& phi, const VecMeasure& mu,
                                 const SamplingSet& set, const TruncationWindow& window,
                                 const EsssupSpec& spec = {},
                                 std::optional<RowPolicy> policy = std::nullopt) {
    if (phi.dim() != 1 || mu.dim() != 1) throw Error("operator assembly is implemented for d=1");
    RowPolicy pol =
        policy.value_or(window.compact ? RowPolicy::InteriorExact : RowPolicy::AllInRegion);

    SamplingOperator op(phi, mu, set, window, spec);
    const double K = window.K;
    for (std::size_t j = 0; j < set.size(); ++j) {
        double x = set.effective(j);
        bool keep = true;
        if (pol == RowPolicy::InteriorExact)
            keep = (x - window.support_hi >= -K) && (x - window.support_lo <= K);
        if (keep) {
            op.row_positions_.push_back(x);
            op.sample_indices_.push_back(j);
        }
    }
    op.exact_rows_ = (pol == RowPolicy::InteriorExact) && window.compact;

    ConvolvedGenerator conv(phi, mu, spec);
    op.blocks_.resize(static_cast<std::size_t>(phi.r() * mu.t()));
    for (int l = 0; l < mu.t(); ++l)
        for (int i = 0; i < phi.r(); ++i) {
            auto hull = conv.support(i, l);
            auto& blk = op.blocks_[static_cast<std::size_t>(l * phi.r() + i)];
            blk.resize(op.row_positions_.size());
            for (std::size_t row = 0; row < op.row_positions_.size(); ++row) {
                double x = op.row_positions_[row];
                int k_lo = -window.K, k_hi = window.K;
                if (hull.compact) {
                    // (phi^i * mu^l)(x - k) != 0 needs x - hi <= k <= x - lo
                    k_lo = std::max(k_lo, static_cast<int>(std::ceil(x - hull.hi)));
                    k_hi = std::min(k_hi, static_cast<int>(std::floor(x - hull.lo)));
                }
                auto& br = blk[row];
                if (k_hi < k_lo) continue;  // row sees nothing in the window
                br.k_begin = k_lo;
                br.values.resize(static_cast<std::size_t>(k_hi - k_lo + 1));
                for (int k = k_lo; k <= k_hi; ++k)
                    br.values[static_cast<std::size_t>(k - k_lo)] =
                        conv.value(i, l, Point(x - k));
            }
        }
    return op;
}

// Direct sampling path: (f * mu^l)(x_j) computed from the synthesized f, as
// a cross-check of apply(assemble(...), C).
inline std::vector<Eigen::VectorXcd> sample_signal(const CoeffVector& c,
                                                   const GeneratorVector& phi, const VecMeasure& mu,
                                                   const SamplingSet& set,
                                                   const EsssupSpec& spec = {}) {
    auto f = [&](const Point& y) { return synthesize(c, phi, y); };
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(mu.t()),
                                      Eigen::VectorXcd::Zero(static_cast<int>(set.size())));
    for (int l = 0; l < mu.t(); ++l)
        for (std::size_t j = 0; j < set.size(); ++j)
            out[static_cast<std::size_t>(l)](static_cast<int>(j)) =
                convolve_fn(f, mu.component(l), Point(set.effective(j)), spec);
    return out;
}

// ---------------------------------------------------------------------------
// Operator norms under Eq (5.1)
// ---------------------------------------------------------------------------

struct OpNormResult {
    double value = 0.0;
    bool converged = true;
    int iterations = 0;
};

namespace detail {

inline Eigen::VectorXcd stack_coeff(const CoeffVector& c) {
    Eigen::VectorXcd v(c.r() * c.length());
    for (int i = 0; i < c.r(); ++i) v.segment(i * c.length(), c.length()) = c.sequence(i);
    return v;
}

inline CoeffVector unstack_coeff(const Eigen::VectorXcd& v, int r, int K) {
    CoeffVector c(r, K);
    for (int i = 0; i < r; ++i) c.sequence(i) = v.segment(i * (2 * K + 1), 2 * K + 1);
    return c;
}

}  // namespace detail

// p=1: max column absolute sum of the stacked block matrix (exact: the unit
// ball's extreme points are the canonical vectors). p=inf: max row absolute
// sum. p=2: power iteration on U*U with relative-change tolerance.
inline OpNormResult op_norm(const SamplingOperator& u, double p, double tol = 1e-10,
                            int max_iters = 20000) {
    require_supported_p(p);
    OpNormResult out;
    const int n = u.cols_per_component();

    if (p == 1.0) {
        std::vector<double> colsum(static_cast<std::size_t>(u.r() * n), 0.0);
        for (int l = 0; l < u.t(); ++l)
            for (int i = 0; i < u.r(); ++i) {
                const auto& blk = u.block(l, i);
                for (const auto& br : blk)
                    for (std::size_t q = 0; q < br.values.size(); ++q)
                        colsum[static_cast<std::size_t>(
                            i * n + br.k_begin + static_cast<int>(q) + u.window())] +=
                            std::abs(br.values[q]);
            }
        for (double s : colsum) out.value = std::max(out.value, s);
        return out;
    }

    if (p == kInf) {
        for (int l = 0; l < u.t(); ++l)
            for (int j = 0; j < u.rows(); ++j) {
                double s = 0.0;
                for (int i = 0; i < u.r(); ++i) {
                    const auto& br = u.block(l, i)[static_cast<std::size_t>(j)];
                    for (const auto& v : br.values) s += std::abs(v);
                }
                out.value = std::max(out.value, s);
            }
        return out;
    }

    // p = 2: power iteration on U*U
    CoeffVector v(u.r(), u.window());
    for (int i = 0; i < u.r(); ++i)
        for (int k = -u.window(); k <= u.window(); ++k)
            v.at(i, k) = 1.0 + 1e-3 * static_cast<double>(k + u.window() + i);
    double norm0 = std::sqrt(detail::stack_coeff(v).squaredNorm());
    if (norm0 == 0.0) return out;
    double lambda = 0.0;
    for (int iter = 1; iter <= max_iters; ++iter) {
        auto uv = u.apply(v);
        CoeffVector sv = u.apply_adjoint(uv);
        Eigen::VectorXcd flat = detail::stack_coeff(sv);
        double next = flat.norm();
        if (next == 0.0) {
            out.value = 0.0;
            out.iterations = iter;
            return out;
        }
        v = detail::unstack_coeff(flat / next, u.r(), u.window());
        out.iterations = iter;
        if (iter > 1 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
            out.value = std::sqrt(next);
            return out;
        }
        lambda = next;
    }
    out.value = std::sqrt(lambda);
    out.converged = false;  // stalled: best estimate
    return out;
}

// The paper's block-sum value sum_l sum_i ||U^{i,l}|| (upper-bounds the
// stacked norm; reported alongside, not used for verdicts).
inline double block_sum_norm(const SamplingOperator& u, double p) {
    require_supported_p(p);
    double total = 0.0;
    for (int l = 0; l < u.t(); ++l)
        for (int i = 0; i < u.r(); ++i) {
            double nrm = 0.0;
            if (p == 1.0) {
                std::vector<double> colsum(static_cast<std::size_t>(u.cols_per_component()), 0.0);
                for (const auto& br : u.block(l, i))
                    for (std::size_t q = 0; q < br.values.size(); ++q)
                        colsum[static_cast<std::size_t>(br.k_begin + static_cast<int>(q) +
                                                        u.window())] += std::abs(br.values[q]);
                for (double s : colsum) nrm = std::max(nrm, s);
            } else if (p == kInf) {
                for (const auto& br : u.block(l, i)) {
                    double s = 0.0;
                    for (const auto& val : br.values) s += std::abs(val);
                    nrm = std::max(nrm, s);
                }
            } else {
                Eigen::MatrixXcd blk = Eigen::MatrixXcd::Zero(u.rows(), u.cols_per_component());
                for (int j = 0; j < u.rows(); ++j) {
                    const auto& br = u.block(l, i)[static_cast<std::size_t>(j)];
                    for (std::size_t q = 0; q < br.values.size(); ++q)
                        blk(j, br.k_begin + static_cast<int>(q) + u.window()) = br.values[q];
                }
                nrm = blk.jacobiSvd().singularValues()(0);
            }
            total += nrm;
        }
    return total;
}

// Smallest singular value of U restricted to interior columns (dense SVD at
// desk scale). Certified for p=2 only.
inline double lower_bound(const SamplingOperator& u, double p = 2.0) {
    if (p != 2.0) throw Error("certified lower bounds exist for p=2 only");
    Eigen::MatrixXcd m = u.dense_interior();
    if (m.rows() == 0 || m.cols() == 0) throw DegenerateOperator("empty interior block");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    double smax = svd.singularValues()(0);
    if (smax > 0.0 && smin < 1e-12 * smax)
        throw DegenerateOperator("operator lower bound below conditioning floor");
    return smin;
}

// Heuristic lower estimate for p in {1, inf}: minimize ||UC||_p / ||C||_p
// over canonical, alternating-sign, and random sparse interior candidates.
inline double lower_bound_heuristic(const SamplingOperator& u, double p, std::uint64_t seed = 11) {
    require_supported_p(p);
    const int K = u.window();
    int ki_lo = u.truncation().interior_lo();
    int ki_hi = u.truncation().interior_hi();
    auto sample_norm = [&](const std::vector<Eigen::VectorXcd>& d) {
        double total = 0.0;
        for (const auto& blockvec : d) {
            if (p == 1.0)
                total += blockvec.cwiseAbs().sum();
            else if (p == 2.0)
                total += blockvec.norm();
            else
                total += blockvec.size() ? blockvec.cwiseAbs().maxCoeff() : 0.0;
        }
        return total;
    };
    double best = kInf;
    auto consider = [&](const CoeffVector& c) {
        double denom = coeff_norm(c, p);
        if (denom <= 0.0) return;
        best = std::min(best, sample_norm(u.apply(c)) / denom);
    };
    for (int i = 0; i < u.r(); ++i) {
        for (int k = ki_lo; k <= ki_hi; ++k) consider(CoeffVector::unit(u.r(), K, i, k));
        CoeffVector alt(u.r(), K);
        for (int k = ki_lo; k <= ki_hi; ++k) alt.at(i, k) = (k % 2 == 0) ? 1.0 : -1.0;
        consider(alt);
    }
    Rng rng(seed);
    for (int trial = 0; trial < 32; ++trial) {
        CoeffVector c(u.r(), K);
        int fill = 1 + rng.index(std::max(1, (ki_hi - ki_lo) / 2 + 1));
        for (int q = 0; q < fill; ++q)
            c.at(rng.index(u.r()), ki_lo + rng.index(ki_hi - ki_lo + 1)) = rng.uniform(-1.0, 1.0);
        consider(c);
    }
    return std::isfinite(best) ? best : 0.0;
}

// ---------------------------------------------------------------------------
// Sampling models and the window-doubling stability verdict
// ---------------------------------------------------------------------------

struct SamplingSetSpec {
    double spacing = 1.0;
    double offset = 0.0;
    std::vector<double> explicit_points;  // overrides the grid rule when nonempty
    std::vector<double> explicit_jitter;
    double jitter_amplitude = 0.0;
    std::uint64_t jitter_seed = 0;

    SamplingSet materialize(double region) const {
        SamplingSet s = explicit_points.empty()
                            ? SamplingSet::integer_grid(spacing, offset, region)
                            : SamplingSet::from_points(explicit_points, region);
        if (!explicit_jitter.empty()) return s.with_jitter(explicit_jitter);
        if (jitter_amplitude > 0.0) return s.with_uniform_jitter(jitter_amplitude, jitter_seed);
        return s;
    }

    double jitter_sup_hint() const {
        if (!explicit_jitter.empty()) {
            double m = 0.0;
            for (double d : explicit_jitter) m = std::max(m, std::abs(d));
            return m;
        }
        return jitter_amplitude;
    }
};

struct SamplingModel {
    GeneratorVector phi;
    VecMeasure mu;
    SamplingSetSpec set;
};

inline SamplingOperator assemble_model(const SamplingModel& model, int K,
                                       const EsssupSpec& spec = {},
                                       std::optional<RowPolicy> policy = std::nullopt) {
    auto window = make_window(model.phi, model.mu, K, model.set.jitter_sup_hint());
    double reach = window.compact
                       ? std::max(std::abs(window.support_lo), std::abs(window.support_hi))
                       : 0.0;
    double region = K + reach + model.set.jitter_sup_hint() + 2.0;
    return assemble(model.phi, model.mu, model.set.materialize(region), window, spec, policy);
}

struct StabilityReport {
    double p = 2.0;
    double eta = 0.0;   // at the largest window
    double beta = 0.0;
    bool eta_heuristic = false;
    std::vector<int> windows;
    std::vector<double> eta_trace;
    std::vector<double> beta_trace;
    enum class Verdict { Stable, Unstable, Inconclusive } verdict = Verdict::Inconclusive;
};

inline const char* to_string(StabilityReport::Verdict v) {
    switch (v) {
        case StabilityReport::Verdict::Stable: return "stable";
        case StabilityReport::Verdict::Unstable: return "unstable";
        default: return "inconclusive";
    }
}

struct StabilityOptions {
    int base_window = 16;
    int doublings = 3;
    double stable_ratio = 0.9;
    double unstable_ratio = 0.7;
};

// Trace-based verdict: any single truncation of an unstable model still has
// eta > 0, so stability is judged by how eta behaves as the window doubles.
inline StabilityReport stability_check(const SamplingModel& model, double p,
                                       const StabilityOptions& opts = {},
                                       const EsssupSpec& spec = {}) {
    require_supported_p(p);
    StabilityReport rep;
    rep.p = p;
    rep.eta_heuristic = (p != 2.0);
    for (int step = 0; step <= opts.doublings; ++step) {
        int K = opts.base_window << step;
        auto u = assemble_model(model, K, spec);
        double eta = (p == 2.0) ? lower_bound(u, 2.0)
                                : lower_bound_heuristic(u, p, 101 + static_cast<std::uint64_t>(K));
        double beta = op_norm(u, p).value;
        rep.windows.push_back(K);
        rep.eta_trace.push_back(eta);
        rep.beta_trace.push_back(beta);
    }
    rep.eta = rep.eta_trace.back();
    rep.beta = rep.beta_trace.back();

    bool all_stable = true, all_unstable = true;
    for (std::size_t i = 1; i < rep.eta_trace.size(); ++i) {
        double ratio = rep.eta_trace[i] / std::max(rep.eta_trace[i - 1], 1e-300);
        all_stable = all_stable && ratio >= opts.stable_ratio;
        all_unstable = all_unstable && ratio <= opts.unstable_ratio;
    }
    rep.verdict = all_stable     ? StabilityReport::Verdict::Stable
                  : all_unstable ? StabilityReport::Verdict::Unstable
                                 : StabilityReport::Verdict::Inconclusive;
    return rep;
}

}  // namespace sis
