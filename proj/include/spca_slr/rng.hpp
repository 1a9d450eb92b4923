#ifndef SPCA_SLR_RNG_HPP
#define SPCA_SLR_RNG_HPP

// Seeded random streams whose output is identical on every platform.
//
// std::mt19937_64 is bit-exactly specified by the standard, but the
// std::*_distribution adaptors are not, so normals and bounded integers are
// derived here from the raw 64-bit engine output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spca_slr {

using Seed = std::uint64_t;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for trial `trial` of an experiment: base_seed XOR mix64(trial).
constexpr Seed trial_seed(Seed base_seed, std::uint64_t trial) noexcept {
    return base_seed ^ mix64(trial);
}

/// Independent named sub-stream of a seed (spike, H0 data, H1 data, ...).
constexpr Seed stream_seed(Seed seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream + 0x5851f42d4c957f2dULL));
}

class Rng {
public:
    explicit Rng(Seed seed) : engine_(mix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t uniform_index(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % bound;
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double a, b, s;
        do {
            a = 2.0 * uniform() - 1.0;
            b = 2.0 * uniform() - 1.0;
            s = a * a + b * b;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = b * f;
        has_spare_ = true;
        return a * f;
    }

    /// Sorted uniformly random subset of size k from {0..n-1} (partial Fisher-Yates).
    template <typename Index>
    std::vector<Index> subset(Index n, Index k) {
        std::vector<Index> pool(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            pool[static_cast<std::size_t>(i)] = i;
        }
        for (Index i = 0; i < k; ++i) {
            const auto j = i + static_cast<Index>(uniform_index(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(k));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace spca_slr

#endif
