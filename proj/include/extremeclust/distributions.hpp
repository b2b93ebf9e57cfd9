#pragma once
// Scalar log-densities and small statistical helpers shared by the prior,
// likelihood and summary code. Conventions: Gamma and Exponential take a
// RATE, Inverse-Gamma takes (shape, scale), Normal and Lognormal take a
// VARIANCE as second argument.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace extremeclust {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

inline double normal_logpdf(double x, double mean, double variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("normal_logpdf: variance must be positive");
    const double z = x - mean;
    return -0.5 * std::log(2.0 * M_PI * variance) - 0.5 * z * z / variance;
}

inline double lognormal_logpdf(double x, double mu, double variance) {
    if (!(x > 0.0)) return neg_inf;
    const double lx = std::log(x);
    return normal_logpdf(lx, mu, variance) - lx;
}

inline double exponential_logpdf(double x, double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential_logpdf: rate must be positive");
    if (x < 0.0) return neg_inf;
    return std::log(rate) - rate * x;
}

inline double gamma_logpdf(double x, double shape, double rate) {
    if (!(x > 0.0)) return neg_inf;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

inline double inverse_gamma_logpdf(double x, double shape, double scale) {
    if (!(x > 0.0)) return neg_inf;
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

inline double poisson_logpmf(int n, double rate) {
    if (n < 0) return neg_inf;
    if (!(rate > 0.0)) return n == 0 ? 0.0 : neg_inf;
    return n * std::log(rate) - rate - std::lgamma(n + 1.0);
}

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Linear interpolation of order statistics (the common "type 7" rule),
// used for thresholds, empirical CDF summaries and credible intervals.
inline double quantile_type7(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile_type7: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile_type7: p outside [0,1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

}  // namespace extremeclust
