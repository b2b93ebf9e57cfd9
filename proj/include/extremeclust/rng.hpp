#pragma once
// Deterministic random number streams. A single root seed spawns named,
// statistically independent substreams so that inserting or removing a
// consumer never perturbs the draws seen by the others. The generator is
// xoshiro256++ seeded through splitmix64; all samplers are implemented here
// rather than with std::<random> distributions, whose output is
// implementation-defined and would break cross-platform reproducibility.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace extremeclust {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

class RngStream {
public:
    RngStream() : RngStream(0) {}

    explicit RngStream(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : state_) w = detail::splitmix64(x);
    }

    // Substream derived from a root seed and a stream name.
    static RngStream derive(std::uint64_t root_seed, std::string_view name) {
        return RngStream(root_seed ^ detail::fnv1a64(name));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0,1); never returns 0 or 1 so logs are always finite.
    double uniform01() {
        double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n), rejection-free of modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Standard normal via the Marsaglia polar method (second value discarded).
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    double normal(double mean, double variance) {
        return mean + std::sqrt(variance) * normal();
    }

    double exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
        return -std::log(uniform01()) / rate;
    }

    double lognormal(double mu, double variance) {
        return std::exp(normal(mu, variance));
    }

    // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
    double gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0))
            throw std::invalid_argument("gamma: shape and rate must be positive");
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0, 1.0);
            return g * std::pow(uniform01(), 1.0 / shape) / rate;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / (3.0 * std::sqrt(d));
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

    double inverse_gamma(double shape, double scale) {
        return 1.0 / gamma(shape, scale);
    }

    double beta(double a, double b) {
        const double x = gamma(a, 1.0);
        const double y = gamma(b, 1.0);
        const double s = x + y;
        if (s <= 0.0) return a / (a + b);  // both underflowed; return the mean
        return x / s;
    }

    // CDF inversion; n is small in this codebase (counts of joint exceedances).
    int binomial(int n, double p) {
        if (n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
        if (p <= 0.0) return 0;
        if (p >= 1.0) return n;
        const double u = uniform01();
        double pmf = std::pow(1.0 - p, n);
        double cdf = pmf;
        int k = 0;
        const double odds = p / (1.0 - p);
        while (cdf < u && k < n) {
            pmf *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
            cdf += pmf;
            ++k;
        }
        return k;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace extremeclust
