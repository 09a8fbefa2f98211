#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "kpsd/random.hpp"
#include "kpsd/symmat.hpp"

namespace kpsd {

/// Largest C(n, k) that exhaustive enumeration will visit.
inline constexpr std::uint64_t enumeration_cap = 2'000'000;

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // result * num / i is exact at every step; guard the product
        if (result > std::numeric_limits<std::uint64_t>::max() / num)
            return std::numeric_limits<std::uint64_t>::max();
        result = result * num / i;
    }
    return result;
}

/// Visits every k-subset of [n] in lexicographic order. The callback receives
/// the current indices and the first position that differs from the previous
/// set (0 for the first set) and returns false to stop early.
template <typename Visitor>
void for_each_kset(std::size_t n, std::size_t k, Visitor&& visit)
{
    if (k == 0 || k > n) return;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::size_t changed = 0;
    while (true) {
        if (!visit(static_cast<const std::vector<std::size_t>&>(idx), changed)) return;
        std::size_t pos = k;
        while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
        if (pos == 0) return;
        --pos;
        ++idx[pos];
        for (std::size_t a = pos + 1; a < k; ++a) idx[a] = idx[a - 1] + 1;
        changed = pos;
    }
}

inline std::vector<KSet> all_ksets(std::size_t n, std::size_t k)
{
    std::vector<KSet> out;
    for_each_kset(n, k, [&](const std::vector<std::size_t>& idx, std::size_t) {
        out.push_back(KSet{idx});
        return true;
    });
    return out;
}

/// Uniform k-subset by a partial Fisher-Yates shuffle of [n], sorted.
inline KSet draw_kset(std::size_t n, std::size_t k, Rng& rng)
{
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(k);
    std::sort(perm.begin(), perm.end());
    return KSet{std::move(perm)};
}

} // namespace kpsd
