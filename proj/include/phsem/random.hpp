#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace phsem {

// All randomness in the library flows from a user seed through named
// substreams, so that every component (graph draw, weights, noise, search
// restarts, ...) is reproducible independently of the others.
//
// std::mt19937_64 itself is fully specified by the standard, but the std
// distributions are not; the helpers below replace them so that a given
// seed yields the same values on every toolchain.

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
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

// Derives a child seed from (seed, tag, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t state = seed ^ detail::fnv1a64(tag);
    std::uint64_t a = detail::splitmix64(state);
    state ^= index * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = detail::splitmix64(state);
    return a ^ b;
}

// Named substream generator.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view tag,
                                   std::uint64_t index = 0) {
    return std::mt19937_64(derive_seed(seed, tag, index));
}

// Uniform double in [0, 1) with 53 random bits.
inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rand_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * rand_unit(rng);
}

// Unbiased integer in [0, n) by rejection.
inline std::size_t rand_index(std::mt19937_64& rng, std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

// Standard normal via Box-Muller; consumes exactly two uniforms per call.
inline double rand_normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - rand_unit(rng);  // in (0, 1], keeps the log finite
    const double u2 = rand_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
}

// Uniform random permutation of 0..n-1 (Fisher-Yates).
inline std::vector<int> rand_permutation(std::mt19937_64& rng, int n) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) {
        std::size_t j = rand_index(rng, static_cast<std::size_t>(i) + 1);
        std::swap(perm[i], perm[static_cast<int>(j)]);
    }
    return perm;
}

// Uniform subset of size k from 0..n-1 (without replacement), returned sorted.
inline std::vector<std::size_t> rand_subset(std::mt19937_64& rng,
                                            std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        std::size_t j = i + rand_index(rng, n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace phsem
