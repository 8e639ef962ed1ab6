#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "reflectron/errors.hpp"

namespace reflectron {

/*
 * Thin sampling helpers over std::mt19937_64.
 *
 * The standard <random> distributions are implementation-defined, so two
 * stdlibs fed the same seed may disagree. Everything downstream promises
 * byte-identical ledgers and CSVs per seed, hence these fixed algorithms.
 */

// Uniform double in [0, 1) using the top 53 bits of the generator output.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in {0, ..., n-1} by rejection on the top of the range.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw DimensionMismatch("uniform_index: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % n;
}

// Sample an index from an (unnormalized) nonnegative weight vector.
inline std::size_t sample_weights(std::mt19937_64& rng, const std::vector<double>& w) {
    double total = 0.0;
    for (double v : w) total += v;
    if (!(total > 0.0)) throw DegenerateBranch("sample_weights: total weight is zero");
    double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        acc += w[i];
        if (u < acc) return i;
    }
    return w.size() - 1;
}

// Derive a child seed from a parent seed and a lane index (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t lane) {
    std::uint64_t z = parent + 0x9e3779b97f4a7c15ULL * (lane + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seeded derangement (permutation without fixed points) via Sattolo's
// algorithm, which produces a uniform random n-cycle.
inline std::vector<int> random_derangement(std::mt19937_64& rng, int n) {
    if (n < 2) throw DimensionMismatch("random_derangement: need n >= 2");
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(i)));
        std::swap(p[i], p[j]);
    }
    return p;
}

}  // namespace reflectron
