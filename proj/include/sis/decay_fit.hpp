#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sis/common.hpp"

namespace sis {

struct DecaySample {
    double offset = 0.0;     // |x| or |x_j - k|
    double magnitude = 0.0;  // |value| at that offset
};

// Sup-type decay certificate against C (1 + offset)^(-s). C_hat is the
// largest observed ratio |value| (1+offset)^s; the fit passes when the far
// half of the offset range does not push that ratio more than 5% above the
// near half (ratio growth means the claimed exponent is too optimistic).
struct DecayFit {
    double s = 0.0;
    double c_hat = 0.0;
    double near_max = 0.0;
    double tail_max = 0.0;
    double fitted_exponent = 0.0;  // log-log regression over nonzero samples
    bool pass = false;
    std::size_t sample_count = 0;
};

// Exponential model |value| ~= c * rate^offset via log-linear regression.
struct ExpFit {
    double rate = 0.0;
    double log_c = 0.0;
    std::size_t sample_count = 0;
};

namespace detail {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    if (x.size() < 2) return {};
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) return {};
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

}  // namespace detail

// Near-diagonal offsets carry no decay information; fits exclude them.
inline DecayFit fit_decay(std::vector<DecaySample> samples, double s, double min_offset = 2.0) {
    DecayFit fit;
    fit.s = s;
    std::erase_if(samples, [&](const DecaySample& d) { return d.offset < min_offset; });
    std::sort(samples.begin(), samples.end(),
              [](const DecaySample& a, const DecaySample& b) { return a.offset < b.offset; });
    fit.sample_count = samples.size();
    if (samples.empty()) {
        fit.pass = true;  // nothing beyond the near range: vacuous
        return fit;
    }

    double off_lo = samples.front().offset;
    double off_hi = samples.back().offset;
    double split = 0.5 * (off_lo + off_hi);

    std::vector<double> logs_x, logs_y;
    for (const auto& d : samples) {
        double ratio = d.magnitude * std::pow(1.0 + d.offset, s);
        fit.c_hat = std::max(fit.c_hat, ratio);
        (d.offset <= split ? fit.near_max : fit.tail_max) =
            std::max(d.offset <= split ? fit.near_max : fit.tail_max, ratio);
        if (d.magnitude > 0.0) {
            logs_x.push_back(std::log(1.0 + d.offset));
            logs_y.push_back(std::log(d.magnitude));
        }
    }
    fit.fitted_exponent = -detail::least_squares_line(logs_x, logs_y).slope;
    fit.pass = fit.tail_max <= 1.05 * fit.near_max;
    return fit;
}

inline ExpFit fit_exponential(const std::vector<DecaySample>& samples, double min_offset = 1.0) {
    std::vector<double> x, y;
    for (const auto& d : samples) {
        if (d.offset >= min_offset && d.magnitude > 0.0) {
            x.push_back(d.offset);
            y.push_back(std::log(d.magnitude));
        }
    }
    ExpFit fit;
    fit.sample_count = x.size();
    if (x.size() < 2) return fit;
    auto line = detail::least_squares_line(x, y);
    fit.rate = std::exp(line.slope);
    fit.log_c = line.intercept;
    return fit;
}

}  // namespace sis
