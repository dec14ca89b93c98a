#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "pdeconv/errors.hpp"

namespace pdeconv {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stable per-run seed: FNV-1a over the labels, mixed with the base seed.
/// Adding a run never perturbs the seeds of existing runs.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::string_view> parts) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::string_view part : parts) {
        for (char c : part) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        h ^= 0x1f; // separator so ("ab","c") != ("a","bc")
        h *= 0x100000001b3ULL;
    }
    return splitmix64(base ^ h);
}

/// Deterministic random stream: mt19937_64 with fixed mappings to uniform,
/// normal (Box-Muller), and Poisson variates, so identical seeds reproduce
/// identical draws on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform double in [0,1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Poisson variate. Knuth's product-of-uniforms scheme is exact and is
    /// used at low rates; larger rates use Hormann's transformed-rejection
    /// sampler (PTRS). The switch at 30 keeps the low-count regime exact.
    std::uint64_t poisson(double lambda) {
        if (!(lambda >= 0.0)) throw DomainError("poisson: rate must be nonnegative");
        if (lambda == 0.0) return 0;
        if (lambda <= 30.0) return poisson_knuth(lambda);
        return poisson_ptrs(lambda);
    }

private:
    std::uint64_t poisson_knuth(double lambda) {
        const double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double prod = 1.0;
        while (true) {
            prod *= uniform();
            if (prod <= limit) return k;
            ++k;
        }
    }

    std::uint64_t poisson_ptrs(double lambda) {
        // Hormann's PTRS dominating-curve constants, valid for lambda >= 10.
        const double log_lambda = std::log(lambda);
        const double b = 0.931 + 2.53 * std::sqrt(lambda);
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);

        while (true) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
            if (kf < 0.0) continue;

            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (us < 0.013 && v > us) continue;

            const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            const double rhs = -lambda + kf * log_lambda - std::lgamma(kf + 1.0);
            if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
        }
    }

    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace pdeconv
