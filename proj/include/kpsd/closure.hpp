#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpsd/error.hpp"
#include "kpsd/ksets.hpp"
#include "kpsd/symmat.hpp"

namespace kpsd {

enum class MembershipMode { exact, sampled };

inline const char* to_string(MembershipMode m)
{
    return m == MembershipMode::exact ? "exact" : "sampled";
}

struct MembershipVerdict {
    bool member = true;
    MembershipMode mode = MembershipMode::exact;
    std::uint64_t sets_checked = 0;
    /// k-sparse x with x^T M x < 0, present only for non-members.
    std::optional<std::vector<double>> certificate;
    /// Violated set with the most negative minimum eigenvalue.
    std::optional<KSet> worst_set;
    double worst_eigenvalue = 0.0;
    double witness_value = 0.0; ///< x^T M x for the certificate
};

namespace detail {

/// Cholesky factorization of M_J + shift*I that keeps the leading rows of the
/// previous factor. Row i of L depends only on J[0..i], so when a
/// lexicographic successor changes J from position p on, rows < p are reused.
class PrefixCholesky {
public:
    PrefixCholesky(std::span<const double> dense, std::size_t n, std::size_t k)
        : a_(dense), n_(n), k_(k), l_(k * k, 0.0), inv_diag_(k, 0.0)
    {}

    /// True iff M_J + shift*I factored with positive pivots.
    bool factor(std::span<const std::size_t> idx, std::size_t from, double shift)
    {
        for (std::size_t i = std::min(from, valid_); i < k_; ++i) {
            double* row = l_.data() + i * k_;
            const double* arow = a_.data() + idx[i] * n_;
            for (std::size_t j = 0; j < i; ++j) {
                const double* lj = l_.data() + j * k_;
                double s0 = 0.0, s1 = 0.0;
                std::size_t t = 0;
                for (; t + 1 < j; t += 2) {
                    s0 += row[t] * lj[t];
                    s1 += row[t + 1] * lj[t + 1];
                }
                if (t < j) s0 += row[t] * lj[t];
                row[j] = (arow[idx[j]] - (s0 + s1)) * inv_diag_[j];
            }
            double d = arow[idx[i]] + shift;
            for (std::size_t t = 0; t < i; ++t) d -= row[t] * row[t];
            if (!(d > 0.0)) {
                valid_ = i;
                return false;
            }
            row[i] = std::sqrt(d);
            inv_diag_[i] = 1.0 / row[i];
        }
        valid_ = k_;
        return true;
    }

    void invalidate() { valid_ = 0; }

private:
    std::span<const double> a_;
    std::size_t n_, k_;
    std::vector<double> l_;
    std::vector<double> inv_diag_;
    std::size_t valid_ = 0;
};

inline SymMatrix gather(std::span<const double> dense, std::size_t n,
                        std::span<const std::size_t> idx)
{
    const std::size_t k = idx.size();
    SymMatrix sub(k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) sub(a, b) = dense[idx[a] * n + idx[b]];
    return sub;
}

/// Lower bound on ||M_J||_F over all k-sets J: the k smallest squared diagonals.
inline double min_subnorm_lower_bound(const SymMatrix& m, std::size_t k)
{
    std::vector<double> d(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) d[i] = m(i, i) * m(i, i);
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += d[i];
    return std::sqrt(s);
}

/// Exact PSD test of one submatrix (after the screen failed). Updates the
/// verdict when the set is violated and worse than what was seen so far.
inline void check_set(const SymMatrix& m, std::span<const double> dense,
                      std::span<const std::size_t> idx, double tol, MembershipVerdict& verdict)
{
    const SymMatrix sub = gather(dense, m.size(), idx);
    const auto eig = eigendecompose(sub);
    const double lambda_min = eig.min_value();
    if (lambda_min >= -tol * std::max(1.0, frobenius_norm(sub))) return;
    if (verdict.member || lambda_min < verdict.worst_eigenvalue) {
        KSet set{std::vector<std::size_t>(idx.begin(), idx.end())};
        auto x = embed(eig.vector(idx.size() - 1), set, m.size());
        verdict.member = false;
        verdict.worst_eigenvalue = lambda_min;
        verdict.witness_value = m.quadratic_form(x);
        verdict.certificate = std::move(x);
        verdict.worst_set = std::move(set);
    }
}

inline void require_order(const SymMatrix& m, std::size_t k, const char* who)
{
    require(k >= 2 && k <= m.size(), std::string(who) + ": need 2 <= k <= n");
}

inline void require_enumerable(std::size_t n, std::size_t k, const char* who)
{
    if (binomial(n, k) > enumeration_cap)
        throw EnumerationCapError(std::string(who) + ": C(" + std::to_string(n) + ", "
                                  + std::to_string(k)
                                  + ") exceeds the enumeration cap; use member_sampled");
}

} // namespace detail

/// Exact membership in the k-PSD closure: every k x k principal submatrix
/// must satisfy lambda_min >= -tol * max(1, ||M_J||_F).
///
/// All C(n, k) sets are visited in lexicographic order. A shifted Cholesky
/// screen clears most sets; the rest go through the eigensolver, which also
/// yields the certificate (minimum eigenvector of the worst submatrix,
/// embedded in R^n). Ties in the worst eigenvalue keep the earlier set.
inline MembershipVerdict member_exact(const SymMatrix& m, std::size_t k,
                                      double tol = default_psd_tolerance)
{
    detail::require_order(m, k, "member_exact");
    const std::size_t n = m.size();
    detail::require_enumerable(n, k, "member_exact");

    const std::vector<double> dense = m.dense();
    // passing the screen implies lambda_min > -screen >= -tol * max(1, ||M_J||_F)
    const double screen = 0.5 * tol * std::max(1.0, detail::min_subnorm_lower_bound(m, k));
    detail::PrefixCholesky chol(dense, n, k);

    MembershipVerdict verdict;
    verdict.mode = MembershipMode::exact;
    for_each_kset(n, k, [&](const std::vector<std::size_t>& idx, std::size_t changed) {
        ++verdict.sets_checked;
        if (!chol.factor(idx, changed, screen)) detail::check_set(m, dense, idx, tol, verdict);
        return true;
    });
    return verdict;
}

/// One-sided screen over `trials` uniformly sampled k-sets (the same sets
/// sample_ksets(n, k, trials, seed) produces). member == true only means no
/// sampled submatrix was violated.
inline MembershipVerdict member_sampled(const SymMatrix& m, std::size_t k, std::size_t trials,
                                        std::uint64_t seed, double tol = default_psd_tolerance)
{
    detail::require_order(m, k, "member_sampled");
    detail::require(trials >= 1, "member_sampled: trials must be positive");
    const std::size_t n = m.size();
    const std::vector<double> dense = m.dense();
    const double screen = 0.5 * tol * std::max(1.0, detail::min_subnorm_lower_bound(m, k));
    detail::PrefixCholesky chol(dense, n, k);

    MembershipVerdict verdict;
    verdict.mode = MembershipMode::sampled;
    Rng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const KSet set = draw_kset(n, k, rng);
        ++verdict.sets_checked;
        if (!chol.factor(set.indices, 0, screen))
            detail::check_set(m, dense, set.indices, tol, verdict);
    }
    return verdict;
}

/// Random search for a k-sparse x with x^T M x < 0: samples k-sets and
/// returns the minimum eigenvector of the first violated submatrix.
inline std::optional<std::vector<double>> certificate_search(const SymMatrix& m, std::size_t k,
                                                             std::size_t trials,
                                                             std::uint64_t seed,
                                                             double tol = default_psd_tolerance)
{
    detail::require_order(m, k, "certificate_search");
    detail::require(trials >= 1, "certificate_search: trials must be positive");
    const std::size_t n = m.size();
    Rng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const KSet set = draw_kset(n, k, rng);
        const SymMatrix sub = principal_submatrix(m, set);
        const auto eig = eigendecompose(sub);
        if (eig.min_value() >= -tol * std::max(1.0, frobenius_norm(sub))) continue;
        auto x = embed(eig.vector(k - 1), set, n);
        if (m.quadratic_form(x) < 0.0) return x;
    }
    return std::nullopt;
}

struct LiftResult {
    double shift = 0.0;
    SymMatrix lifted;
};

/// Smallest t >= 0 with M + t*I in the k-PSD closure, i.e.
/// t = max(0, -min_J lambda_min(M_J)), computed exactly over all k-sets.
/// A running maximum lets a Cholesky test of M_J + t*I skip sets that cannot
/// raise t. Returns t = 0 and M itself when M already passes member_exact.
inline LiftResult lift_to_closure(const SymMatrix& m, std::size_t k,
                                  double tol = default_psd_tolerance)
{
    detail::require_order(m, k, "lift_to_closure");
    const std::size_t n = m.size();
    detail::require_enumerable(n, k, "lift_to_closure");

    const std::vector<double> dense = m.dense();
    detail::PrefixCholesky chol(dense, n, k);
    double shift = 0.0;
    for_each_kset(n, k, [&](const std::vector<std::size_t>& idx, std::size_t changed) {
        if (chol.factor(idx, changed, shift)) return true;
        const double lambda_min = eigendecompose(detail::gather(dense, n, idx)).min_value();
        if (-lambda_min > shift) {
            shift = -lambda_min;
            chol.invalidate();
        }
        return true;
    });

    // every submatrix slack is at least tol, so shift <= tol means M passes as is
    if (shift <= tol) return {0.0, m};
    SymMatrix lifted = m;
    lifted.shift_diagonal(shift);
    return {shift, std::move(lifted)};
}

/// Same shift rule over `trials` sampled k-sets (the sets of
/// sample_ksets(n, k, trials, seed)). The result is only screened: sets that
/// were not drawn may still be violated.
inline LiftResult lift_sampled(const SymMatrix& m, std::size_t k, std::size_t trials,
                               std::uint64_t seed, double tol = default_psd_tolerance)
{
    detail::require_order(m, k, "lift_sampled");
    detail::require(trials >= 1, "lift_sampled: trials must be positive");
    const std::size_t n = m.size();
    const std::vector<double> dense = m.dense();
    detail::PrefixCholesky chol(dense, n, k);
    Rng rng(seed);
    double shift = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const KSet set = draw_kset(n, k, rng);
        if (chol.factor(set.indices, 0, shift)) continue;
        const double lambda_min = eigendecompose(detail::gather(dense, n, set.indices)).min_value();
        shift = std::max(shift, -lambda_min);
    }
    if (shift <= tol) return {0.0, m};
    SymMatrix lifted = m;
    lifted.shift_diagonal(shift);
    return {shift, std::move(lifted)};
}

/// S^{n,k} is contained in S^{n,k'} for k' <= k: re-tests at k'.
inline bool member_monotone_check(const SymMatrix& m, std::size_t k, std::size_t kprime)
{
    detail::require(kprime >= 2 && kprime <= k && k <= m.size(),
                    "member_monotone_check: need 2 <= k' <= k <= n");
    return member_exact(m, kprime).member;
}

} // namespace kpsd
