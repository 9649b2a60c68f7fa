#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <random>
#include <vector>

#include "common.hpp"

namespace evselca {

// Deterministic RNG wrapper. All distribution logic lives here instead of
// <random> distribution classes, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], inclusive. Rejection-free modulo bias is
    // negligible for the ranges used here, but use Lemire-style rejection to
    // keep draws exact anyway.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        assert(lo <= hi);
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_());
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return lo + static_cast<std::int64_t>(x % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Index drawn proportionally to non-negative weights.
    size_t weighted_index(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        if (!(total > 0)) throw InputError("weighted draw requires a positive total weight");
        double r = uniform() * total;
        for (size_t i = 0; i + 1 < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0) return i;
        }
        return weights.size() - 1;
    }

    // k distinct indices from [0, n), ascending.
    std::vector<int> sample_indices(int n, int k) {
        assert(k <= n);
        std::vector<int> pool(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<size_t>(i)] = i;
        for (int i = 0; i < k; ++i) {
            const int j = static_cast<int>(uniform_int(i, n - 1));
            std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
        }
        pool.resize(static_cast<size_t>(k));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

// Stable substream derivation so parallel evaluation order never matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t h = fnv1a64_mix(master, kFnvOffset);
    h = fnv1a64_mix(a, h);
    h = fnv1a64_mix(b, h);
    h = fnv1a64_mix(c, h);
    // splitmix64 finalizer to spread FNV output across the full state space
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebull;
    h ^= h >> 31;
    return h;
}

}  // namespace evselca
