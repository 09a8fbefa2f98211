#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kpsd/designs.hpp"
#include "kpsd/error.hpp"
#include "kpsd/ksets.hpp"
#include "kpsd/symmat.hpp"

namespace kpsd {

/// A sequence of k-sets of [n]; duplicates are kept (multiset semantics).
struct KSetSample {
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<KSet> sets;

    std::size_t m() const noexcept { return sets.size(); }
};

/// Per-entry containment fractions of a sample and their worst deviation
/// from the full-average factors, measured in units of gamma.
struct FractionStats {
    std::vector<double> f_diag;    ///< f_ii
    std::vector<double> f_offdiag; ///< f_ij for i < j, row-major
    double gamma = 0.0;
    double epsilon_achieved = 0.0;
};

/// M and a PSD-candidate alpha * average(M) with the Frobenius gap between them.
struct AveragingWitness {
    SymMatrix witness;
    double alpha = 0.0;
    double bound = 0.0;
};

/// alpha = 2n(n-1) / (k(n+k-2)); equalizes the diagonal and off-diagonal
/// averaging factors.
inline double alpha(std::size_t n, std::size_t k)
{
    detail::require(k >= 2 && k <= n, "alpha: need 2 <= k <= n");
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    return 2.0 * nn * (nn - 1.0) / (kk * (nn + kk - 2.0));
}

/// (n - k) / (n + k - 2)
inline double averaging_ratio(std::size_t n, std::size_t k)
{
    return static_cast<double>(n - k) / static_cast<double>(n + k - 2);
}

/// Average of M^I over all k-sets I, in closed form: diagonal scaled by k/n,
/// off-diagonal by k(k-1)/(n(n-1)).
inline SymMatrix full_average(const SymMatrix& m, std::size_t k)
{
    const std::size_t n = m.size();
    detail::require(k >= 2 && k <= n, "full_average: need 2 <= k <= n");
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double diag = kk / nn;
    const double off = kk * (kk - 1.0) / (nn * (nn - 1.0));
    SymMatrix out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) out(i, j) = (i == j ? diag : off) * m(i, j);
    return out;
}

inline KSetSample sample_ksets(std::size_t n, std::size_t k, std::size_t m, std::uint64_t seed)
{
    detail::require(k >= 2 && k <= n, "sample_ksets: need 2 <= k <= n");
    detail::require(m >= 1, "sample_ksets: need m >= 1");
    KSetSample s{n, k, seed, {}};
    s.sets.reserve(m);
    Rng rng(seed);
    for (std::size_t t = 0; t < m; ++t) s.sets.push_back(draw_kset(n, k, rng));
    return s;
}

/// Fraction of sets containing each pair {i, j} (i == j for single points),
/// stored as a symmetric matrix.
inline SymMatrix containment_fractions(std::size_t n, std::span<const KSet> sets)
{
    detail::require(!sets.empty(), "containment_fractions: empty set list");
    std::vector<std::uint64_t> count(n * n, 0);
    for (const auto& s : sets) {
        s.validate(n);
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = a; b < s.size(); ++b) ++count[s[a] * n + s[b]];
    }
    const double inv = 1.0 / static_cast<double>(sets.size());
    SymMatrix f(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) f(i, j) = static_cast<double>(count[i * n + j]) * inv;
    return f;
}

namespace detail {

inline SymMatrix hadamard(const SymMatrix& a, const SymMatrix& b)
{
    SymMatrix out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i; j < a.size(); ++j) out(i, j) = a(i, j) * b(i, j);
    return out;
}

inline void require_sample_matches(const SymMatrix& m, const KSetSample& s, const char* who)
{
    require(s.n == m.size(), std::string(who) + ": sample dimension differs from matrix");
    require(!s.sets.empty(), std::string(who) + ": empty sample");
}

} // namespace detail

/// T_I(M) = (1/|I|) sum_{I in sample} M^I, i.e. (T_I(M))_ij = f_ij M_ij.
inline SymMatrix partial_average(const SymMatrix& m, const KSetSample& sample)
{
    detail::require_sample_matches(m, sample, "partial_average");
    return detail::hadamard(containment_fractions(m.size(), sample.sets), m);
}

/// ceil(12 n (n-1)^2 / (eps^2 (n-k)^2 k) * ln(2 n^2 / delta))
inline std::uint64_t sample_size(std::size_t n, std::size_t k, double epsilon, double delta)
{
    detail::require(k >= 2 && k + 1 <= n, "sample_size: need 2 <= k <= n - 1");
    detail::require(epsilon > 0.0 && delta > 0.0, "sample_size: epsilon and delta must be positive");
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double gap = nn - kk;
    const double m = 12.0 * nn * (nn - 1.0) * (nn - 1.0) / (epsilon * epsilon * gap * gap * kk)
                     * std::log(2.0 * nn * nn / delta);
    return static_cast<std::uint64_t>(std::ceil(m));
}

/// The sampled bound (1 + eps)(n-k)/(n+k-2) beats the trivial bound 1 only
/// when eps <= (2k - 2)/(n - k).
inline bool sampling_bound_nontrivial(std::size_t n, std::size_t k, double epsilon)
{
    detail::require(k >= 2 && k < n, "sampling_bound_nontrivial: need 2 <= k < n");
    return epsilon <= static_cast<double>(2 * k - 2) / static_cast<double>(n - k);
}

/// gamma = k(n-k) / (2n(n-1))
inline double fraction_gamma(std::size_t n, std::size_t k)
{
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    return kk * (nn - kk) / (2.0 * nn * (nn - 1.0));
}

inline FractionStats fraction_stats(const KSetSample& sample)
{
    const std::size_t n = sample.n;
    const std::size_t k = sample.k;
    detail::require(n >= 2 && k >= 1 && k <= n, "fraction_stats: invalid sample shape");
    const SymMatrix f = containment_fractions(n, sample.sets);
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double expect_diag = kk / nn;
    const double expect_off = kk * (kk - 1.0) / (nn * (nn - 1.0));

    FractionStats stats;
    stats.gamma = fraction_gamma(n, k);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stats.f_diag.push_back(f(i, i));
        worst = std::max(worst, std::abs(f(i, i) - expect_diag));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            stats.f_offdiag.push_back(f(i, j));
            worst = std::max(worst, std::abs(f(i, j) - expect_off));
        }
    // gamma vanishes at k == n, where every fraction is exact
    stats.epsilon_achieved = stats.gamma > 0.0 ? worst / stats.gamma : 0.0;
    return stats;
}

/// Witness alpha * average and bound ||M - witness||_F. Without a sample the
/// full average is used and the bound equals (n-k)/(n+k-2) ||M||_F; with a
/// sample the partial average is scaled by the same alpha.
inline AveragingWitness upper_bound_certificate(const SymMatrix& m, std::size_t k,
                                                const std::optional<KSetSample>& sample = std::nullopt)
{
    const std::size_t n = m.size();
    detail::require(k >= 2 && k <= n, "upper_bound_certificate: need 2 <= k <= n");
    if (sample) {
        detail::require(sample->k == k, "upper_bound_certificate: sample has a different k");
    }
    const double a = alpha(n, k);
    SymMatrix avg = sample ? partial_average(m, *sample) : full_average(m, k);
    avg *= a;
    const double bound = frobenius_norm(m - avg);
    return {std::move(avg), a, bound};
}

/// alpha_D = 2b / (r + lambda)
inline double design_alpha(const Design& d)
{
    return 2.0 * static_cast<double>(d.b()) / static_cast<double>(d.r + d.lambda);
}

/// Averages M^B over the blocks B of a 2-design (diagonal factor r/b,
/// off-diagonal lambda/b) and scales by alpha_D, which again makes
/// M - witness a uniform-magnitude rescaling of M.
inline AveragingWitness design_average(const SymMatrix& m, const Design& design)
{
    detail::require(design.n == m.size(), "design_average: design dimension differs from matrix");
    const Design checked = verify_2design(design.blocks, design.n);
    if (checked.r != design.r || checked.lambda != design.lambda)
        throw DesignError("design_average: stated parameters disagree with the blocks");
    const double a = design_alpha(design);
    SymMatrix avg = detail::hadamard(containment_fractions(m.size(), design.blocks), m);
    avg *= a;
    const double bound = frobenius_norm(m - avg);
    return {std::move(avg), a, bound};
}

// ---------------------------------------------------------------------------
// Text format: "n k m seed", then m lines of k 1-based indices.

inline void write_sample(std::ostream& os, const KSetSample& s)
{
    os << s.n << ' ' << s.k << ' ' << s.m() << ' ' << s.seed << '\n';
    for (const auto& set : s.sets) {
        for (std::size_t a = 0; a < set.size(); ++a) os << (a ? " " : "") << set[a] + 1;
        os << '\n';
    }
}

inline KSetSample read_sample(std::istream& is)
{
    std::string line;
    if (!detail::next_content_line(is, line)) throw ParseError("sample: missing header");
    const auto head = detail::split_spaces(line);
    if (head.size() != 4) throw ParseError("sample: header must be 'n k m seed'");
    KSetSample s;
    s.n = detail::parse_number<std::size_t>(head[0], "n");
    s.k = detail::parse_number<std::size_t>(head[1], "k");
    const auto m = detail::parse_number<std::size_t>(head[2], "m");
    s.seed = detail::parse_number<std::uint64_t>(head[3], "seed");
    if (m == 0) throw ParseError("sample: m must be positive");
    for (std::size_t t = 0; t < m; ++t) {
        if (!detail::next_content_line(is, line)) throw ParseError("sample: missing set line");
        const auto toks = detail::split_spaces(line);
        if (toks.size() != s.k) throw ParseError("sample: set has wrong size");
        KSet set;
        for (auto tok : toks) {
            const auto idx = detail::parse_number<std::size_t>(tok, "index");
            if (idx == 0) throw ParseError("sample: indices are 1-based");
            set.indices.push_back(idx - 1);
        }
        try {
            set.validate(s.n);
        } catch (const PreconditionError& e) {
            throw ParseError(std::string("sample: ") + e.what());
        }
        s.sets.push_back(std::move(set));
    }
    return s;
}

} // namespace kpsd
