#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "kpsd/error.hpp"
#include "kpsd/ksets.hpp"
#include "kpsd/symmat.hpp"

namespace kpsd {

/// A 2-design (balanced incomplete block design) on points {0, ..., n-1}:
/// every point lies in r blocks and every pair in lambda blocks.
struct Design {
    std::size_t n = 0;
    std::size_t k = 0;
    std::size_t r = 0;
    std::size_t lambda = 0;
    std::vector<KSet> blocks;

    std::size_t b() const noexcept { return blocks.size(); }
    bool symmetric() const noexcept { return blocks.size() == n; }
};

/// Counts replications and pair coverage exhaustively and returns the design
/// parameters, or throws DesignError naming the first violated condition.
inline Design verify_2design(std::vector<KSet> blocks, std::size_t n)
{
    if (blocks.empty()) throw DesignError("verify_2design: no blocks");
    const std::size_t k = blocks.front().size();
    for (const auto& blk : blocks) {
        if (blk.size() != k) throw DesignError("verify_2design: blocks have different sizes");
        try {
            blk.validate(n);
        } catch (const PreconditionError& e) {
            throw DesignError(std::string("verify_2design: invalid block: ") + e.what());
        }
    }

    std::vector<std::size_t> point(n, 0);
    std::vector<std::size_t> pair(n * n, 0);
    for (const auto& blk : blocks) {
        for (std::size_t a = 0; a < k; ++a) {
            ++point[blk[a]];
            for (std::size_t c = a + 1; c < k; ++c) ++pair[blk[a] * n + blk[c]];
        }
    }
    const std::size_t r = point[0];
    for (std::size_t i = 0; i < n; ++i)
        if (point[i] != r)
            throw DesignError("verify_2design: unequal replication at point "
                              + std::to_string(i + 1));
    const std::size_t lambda = n >= 2 ? pair[0 * n + 1] : 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (pair[i * n + j] != lambda)
                throw DesignError("verify_2design: unequal pair coverage at {"
                                  + std::to_string(i + 1) + ", " + std::to_string(j + 1) + "}");

    const std::size_t b = blocks.size();
    if (b * k != n * r) throw DesignError("verify_2design: b*k != n*r");
    if (lambda * (n - 1) != r * (k - 1)) throw DesignError("verify_2design: lambda(n-1) != r(k-1)");

    return Design{n, k, r, lambda, std::move(blocks)};
}

/// All k-subsets of [n].
inline Design complete_design(std::size_t n, std::size_t k)
{
    detail::require(k >= 2 && k <= n, "complete_design: need 2 <= k <= n");
    if (binomial(n, k) > enumeration_cap)
        throw EnumerationCapError("complete_design: C(n, k) exceeds the enumeration cap");
    return verify_2design(all_ksets(n, k), n);
}

/// The Fano plane with its canonical block list.
inline Design fano()
{
    static constexpr std::array<std::array<std::size_t, 3>, 7> lines{{
        {1, 2, 3}, {1, 4, 5}, {1, 6, 7}, {2, 4, 6}, {2, 5, 7}, {3, 4, 7}, {3, 5, 6},
    }};
    std::vector<KSet> blocks;
    for (const auto& line : lines) blocks.push_back(KSet{{line[0] - 1, line[1] - 1, line[2] - 1}});
    return verify_2design(std::move(blocks), 7);
}

inline bool is_prime(std::size_t q)
{
    if (q < 2) return false;
    for (std::size_t d = 2; d * d <= q; ++d)
        if (q % d == 0) return false;
    return true;
}

/// PG(2, q) for prime q <= 31. Points and lines are the normalized nonzero
/// vectors of GF(q)^3 (first nonzero coordinate 1) in lexicographic order;
/// a point lies on a line when their dot product vanishes mod q.
inline Design projective_plane(std::size_t q)
{
    detail::require(is_prime(q), "projective_plane: order must be prime");
    detail::require(q <= 31, "projective_plane: order must be at most 31");

    std::vector<std::array<std::size_t, 3>> pts;
    for (std::size_t x = 0; x < q; ++x)
        for (std::size_t y = 0; y < q; ++y)
            for (std::size_t z = 0; z < q; ++z) {
                const std::array<std::size_t, 3> v{x, y, z};
                const auto lead = std::find_if(v.begin(), v.end(), [](auto c) { return c != 0; });
                if (lead != v.end() && *lead == 1) pts.push_back(v);
            }

    std::vector<KSet> blocks;
    for (const auto& line : pts) {
        KSet blk;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& p = pts[i];
            if ((p[0] * line[0] + p[1] * line[1] + p[2] * line[2]) % q == 0)
                blk.indices.push_back(i);
        }
        blocks.push_back(std::move(blk));
    }
    return verify_2design(std::move(blocks), pts.size());
}

// ---------------------------------------------------------------------------
// Text format: "n k b r lambda", then b lines of k 1-based indices.

inline void write_design(std::ostream& os, const Design& d)
{
    os << d.n << ' ' << d.k << ' ' << d.b() << ' ' << d.r << ' ' << d.lambda << '\n';
    for (const auto& blk : d.blocks) {
        for (std::size_t a = 0; a < blk.size(); ++a) os << (a ? " " : "") << blk[a] + 1;
        os << '\n';
    }
}

/// Parses and re-verifies; the header must match the counted parameters.
inline Design read_design(std::istream& is)
{
    std::string line;
    if (!detail::next_content_line(is, line)) throw ParseError("design: missing header");
    const auto head = detail::split_spaces(line);
    if (head.size() != 5) throw ParseError("design: header must be 'n k b r lambda'");
    std::array<std::size_t, 5> p{};
    for (std::size_t i = 0; i < 5; ++i) p[i] = detail::parse_number<std::size_t>(head[i], "design header");
    const auto [n, k, b, r, lambda] = p;

    std::vector<KSet> blocks;
    for (std::size_t t = 0; t < b; ++t) {
        if (!detail::next_content_line(is, line)) throw ParseError("design: missing block line");
        const auto toks = detail::split_spaces(line);
        if (toks.size() != k) throw ParseError("design: block has wrong size");
        KSet blk;
        for (auto tok : toks) {
            const auto idx = detail::parse_number<std::size_t>(tok, "block index");
            if (idx == 0) throw ParseError("design: indices are 1-based");
            blk.indices.push_back(idx - 1);
        }
        blocks.push_back(std::move(blk));
    }
    Design d = verify_2design(std::move(blocks), n);
    if (d.r != r || d.lambda != lambda) throw ParseError("design: header disagrees with blocks");
    return d;
}

} // namespace kpsd
