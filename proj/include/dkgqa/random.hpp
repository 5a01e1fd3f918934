#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace dkgqa {

/// Uniform integer in [0, n) by rejection sampling over raw mt19937_64 output.
/// Unlike std::uniform_int_distribution, the result sequence is fixed by the
/// standard engine alone, so shuffles agree across standard libraries.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

/// Fisher-Yates, high index down.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

}  // namespace dkgqa
