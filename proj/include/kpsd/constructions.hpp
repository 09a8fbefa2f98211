#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "kpsd/cone.hpp"
#include "kpsd/error.hpp"
#include "kpsd/random.hpp"
#include "kpsd/symmat.hpp"

namespace kpsd {

// ---------------------------------------------------------------------------
// G(a, b, n) = (a + b) I - a 11^T: diagonal b, off-diagonal -a.

struct GabSpec {
    double a = 0.0;
    double b = 0.0;
    std::size_t n = 2;

    void validate() const
    {
        detail::require(a >= 0.0 && b >= 0.0, "GabSpec: a and b must be nonnegative");
        detail::require(n >= 2, "GabSpec: need n >= 2");
    }
};

struct GabEigenvalues {
    double lonely = 0.0;   ///< b - (n-1)a, multiplicity 1 (eigenvector 1)
    double repeated = 0.0; ///< b + a, multiplicity n - 1
};

inline SymMatrix gab_matrix(const GabSpec& spec)
{
    spec.validate();
    SymMatrix g(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = i; j < spec.n; ++j) g(i, j) = i == j ? spec.b : -spec.a;
    return g;
}

inline GabEigenvalues gab_eigenvalues(const GabSpec& spec)
{
    spec.validate();
    return {spec.b - static_cast<double>(spec.n - 1) * spec.a, spec.b + spec.a};
}

/// G(a, b, n) is in S^{n,k} iff b >= (k-1)a.
inline bool gab_membership(const GabSpec& spec, std::size_t k)
{
    spec.validate();
    detail::require(k >= 2 && k <= spec.n, "gab_membership: need 2 <= k <= n");
    return spec.b >= static_cast<double>(k - 1) * spec.a;
}

/// max((n-1)a - b, 0)
inline double gab_distance(const GabSpec& spec)
{
    spec.validate();
    return std::max(static_cast<double>(spec.n - 1) * spec.a - spec.b, 0.0);
}

/// a = 1/sqrt((k-1)^2 n + n(n-1)), b = (k-1)a: unit norm, on the boundary of S^{n,k}.
inline GabSpec gab_extremal_spec(std::size_t n, std::size_t k)
{
    detail::require(k >= 2 && k < n, "gab_extremal: need 2 <= k < n");
    const double nn = static_cast<double>(n);
    const double km1 = static_cast<double>(k - 1);
    const double a = 1.0 / std::sqrt(km1 * km1 * nn + nn * (nn - 1.0));
    return {a, km1 * a, n};
}

inline SymMatrix gab_extremal(std::size_t n, std::size_t k)
{
    return gab_matrix(gab_extremal_spec(n, k));
}

/// (n-k) / sqrt((k-1)^2 n + n(n-1)), the distance of gab_extremal(n, k).
inline double closure_lower_bound(std::size_t n, std::size_t k)
{
    detail::require(k >= 2 && k < n, "closure_lower_bound: need 2 <= k < n");
    const double nn = static_cast<double>(n);
    const double km1 = static_cast<double>(k - 1);
    return (nn - static_cast<double>(k)) / std::sqrt(km1 * km1 * nn + nn * (nn - 1.0));
}

// ---------------------------------------------------------------------------
// RIP construction: M = -(1 - delta) I + W^T W with W an m x n sign matrix.

/// Row-major dense matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct RipSpec {
    std::size_t n = 0;
    std::size_t k = 2;
    std::size_t m = 0;
    double delta = 0.9;
    std::uint64_t seed = 0;

    /// m = 93k, delta = 0.9
    static RipSpec standard(std::size_t n, std::size_t k, std::uint64_t seed)
    {
        return {n, k, 93 * k, 0.9, seed};
    }

    void validate() const
    {
        detail::require(k >= 2, "RipSpec: need k >= 2");
        detail::require(m >= 1 && n >= 1, "RipSpec: need m, n >= 1");
        detail::require(delta > 0.0 && delta < 1.0, "RipSpec: delta must lie in (0, 1)");
    }
};

namespace detail {

/// One fair coin per entry, row-major, +1 or -1.
inline std::vector<std::int8_t> rip_signs(std::size_t m, std::size_t n, std::uint64_t seed)
{
    std::vector<std::int8_t> s(m * n);
    Rng rng(seed);
    for (auto& x : s) x = rng.coin() ? 1 : -1;
    return s;
}

} // namespace detail

/// m x n matrix of independent +-1/sqrt(m) entries.
inline DenseMatrix rip_bernoulli(std::size_t m, std::size_t n, std::uint64_t seed)
{
    detail::require(m >= 1 && n >= 1, "rip_bernoulli: need m, n >= 1");
    const auto signs = detail::rip_signs(m, n, seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    DenseMatrix w{m, n, std::vector<double>(m * n)};
    for (std::size_t i = 0; i < signs.size(); ++i) w.data[i] = signs[i] * scale;
    return w;
}

/// 1 - 2 (12/delta)^k exp(-(delta^2/16 - delta^3/48) m); may be negative.
inline double rip_success_probability(std::size_t k, double delta, std::size_t m)
{
    detail::require(delta > 0.0 && delta < 1.0, "rip_success_probability: delta must lie in (0, 1)");
    const double c = delta * delta / 16.0 - delta * delta * delta / 48.0;
    return 1.0 - 2.0 * std::pow(12.0 / delta, static_cast<double>(k))
                     * std::exp(-c * static_cast<double>(m));
}

/// Diagonal exactly delta; M_ij = <C^i, C^j>, computed from the integer sign
/// products so the value is exact up to one division.
inline SymMatrix rip_member_matrix(const RipSpec& spec)
{
    spec.validate();
    const std::size_t n = spec.n, m = spec.m;
    const auto signs = detail::rip_signs(m, n, spec.seed);
    std::vector<std::int8_t> cols(n * m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) cols[c * m + r] = signs[r * n + c];

    const double inv_m = 1.0 / static_cast<double>(m);
    SymMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = spec.delta;
        const std::int8_t* ci = cols.data() + i * m;
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::int8_t* cj = cols.data() + j * m;
            std::int32_t acc = 0;
            for (std::size_t r = 0; r < m; ++r) acc += ci[r] * cj[r];
            out(i, j) = static_cast<double>(acc) * inv_m;
        }
    }
    return out;
}

/// sqrt(r - 93 r^2) / sqrt(162 r + 3) for 0 < r < 1/93.
inline double rip_lower_bound(double r)
{
    detail::require(r > 0.0 && r < 1.0 / 93.0, "rip_lower_bound: need 0 < r < 1/93");
    return std::sqrt(r - 93.0 * r * r) / std::sqrt(162.0 * r + 3.0);
}

/// 2 n delta^2 + 2 n (n-1) / m
inline double rip_norm_bound(std::size_t n, std::size_t m, double delta)
{
    const double nn = static_cast<double>(n);
    return 2.0 * nn * delta * delta + 2.0 * nn * (nn - 1.0) / static_cast<double>(m);
}

// ---------------------------------------------------------------------------
// Randomized sparsification of the minimum eigenvector.

struct SparsifierOutcome {
    std::vector<double> V;
    std::size_t support_size = 0;
    double inner_v1 = 0.0;
    /// sum of mu_i <V, w^i>^2 over nonnegative eigenpairs; NaN when no
    /// eigendecomposition was supplied
    double positive_part = std::numeric_limits<double>::quiet_NaN();
    double p = 1.0;
};

/// 96 (n-k) / n^{3/2}
inline double lambda1_bound(std::size_t n, std::size_t k)
{
    const double nn = static_cast<double>(n);
    return 96.0 * static_cast<double>(n - k) / std::pow(nn, 1.5);
}

/// 96 ((n-k)/n)^{3/2}
inline double sparsifier_distance_bound(std::size_t n, std::size_t k)
{
    return 96.0 * std::pow(static_cast<double>(n - k) / static_cast<double>(n), 1.5);
}

/// 24 (n-k) / n^{3/2}
inline double positive_part_threshold(std::size_t n, std::size_t k)
{
    return lambda1_bound(n, k) / 4.0;
}

/// Keeps v_i when v_i^2 > 2/n; otherwise V_i = v_i / p with probability p and
/// 0 otherwise, p = 1 - 2(n-k)/n. Randomized coordinates consume one uniform
/// each, in index order.
inline SparsifierOutcome sparsify_vector(std::span<const double> v, std::size_t k,
                                         std::uint64_t seed)
{
    const std::size_t n = v.size();
    detail::require(n >= 1 && k <= n, "sparsify_vector: need k <= n");
    detail::require(4 * k >= 3 * n, "sparsify_vector: need k >= 3n/4");
    double sq = 0.0;
    for (double x : v) sq += x * x;
    detail::require(std::abs(std::sqrt(sq) - 1.0) <= 1e-10, "sparsify_vector: v must have unit norm");

    SparsifierOutcome out;
    out.p = 1.0 - 2.0 * static_cast<double>(n - k) / static_cast<double>(n);
    out.V.assign(n, 0.0);
    const double cut = 2.0 / static_cast<double>(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] * v[i] > cut)
            out.V[i] = v[i];
        else if (rng.bernoulli(out.p))
            out.V[i] = v[i] / out.p;
    }
    out.support_size = static_cast<std::size_t>(
        std::count_if(out.V.begin(), out.V.end(), [](double x) { return x != 0.0; }));
    out.inner_v1 = dot(out.V, v);
    return out;
}

/// sum over eigenpairs with mu >= 0 of mu <x, w>^2
inline double positive_part(const EigenDecomposition& eig, std::span<const double> x)
{
    double s = 0.0;
    for (std::size_t e = 0; e < eig.n && eig.values[e] >= 0.0; ++e) {
        const double c = dot(eig.vector(e), x);
        s += eig.values[e] * c * c;
    }
    return s;
}

/// Sparsifies the eigenvector of the smallest eigenvalue and fills in the
/// positive part.
inline SparsifierOutcome sparsify_min_eigenvector(const EigenDecomposition& eig, std::size_t k,
                                                  std::uint64_t seed)
{
    detail::require(eig.n >= 1, "sparsify_min_eigenvector: empty decomposition");
    auto out = sparsify_vector(eig.vector(eig.n - 1), k, seed);
    out.positive_part = positive_part(eig, out.V);
    return out;
}

/// The three events whose joint occurrence yields the lambda_1 bound.
inline bool sparsifier_good(const SparsifierOutcome& o, std::size_t n, std::size_t k)
{
    return o.support_size <= k && o.inner_v1 >= 0.5
           && o.positive_part <= positive_part_threshold(n, k);
}

struct Lambda1Certificate {
    double lambda1 = 0.0;
    double bound = 0.0;
    bool holds = false;
    std::size_t trials = 0;
    std::size_t good_trials = 0;
    /// Good trial with the smallest V^T M V (a negative value would refute membership).
    std::optional<SparsifierOutcome> best;
    double best_quadratic_form = std::numeric_limits<double>::quiet_NaN();
};

/// lambda_1 <= 96(n-k)/n^{3/2} for unit-norm members with n >= 97, k >= 3n/4.
/// The trials re-run the sparsification with seeds split_seed(seed, t).
inline Lambda1Certificate lambda1_certificate(const SymMatrix& m, std::size_t k,
                                              std::size_t trials = 256, std::uint64_t seed = 0)
{
    const std::size_t n = m.size();
    detail::require(n >= 97, "lambda1_certificate: need n >= 97");
    detail::require(k <= n && 4 * k >= 3 * n, "lambda1_certificate: need 3n/4 <= k <= n");
    detail::require(std::abs(frobenius_norm(m) - 1.0) <= 1e-9,
                    "lambda1_certificate: M must have unit Frobenius norm");
    const auto eig = eigendecompose(m);
    if (eig.min_value() >= -negative_clamp_threshold(m))
        throw PreconditionError("lambda1_certificate: matrix has no negative eigenvalue");

    Lambda1Certificate cert;
    cert.lambda1 = -eig.min_value();
    cert.bound = lambda1_bound(n, k);
    cert.holds = cert.lambda1 <= cert.bound;
    cert.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        auto o = sparsify_min_eigenvector(eig, k, split_seed(seed, t));
        if (!sparsifier_good(o, n, k)) continue;
        ++cert.good_trials;
        const double q = m.quadratic_form(o.V);
        if (!cert.best || q < cert.best_quadratic_form) {
            cert.best_quadratic_form = q;
            cert.best = std::move(o);
        }
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Matrices with a prescribed spectrum.

/// Orthonormal rows from modified Gram-Schmidt on a Gaussian matrix (Haar
/// distributed). Row-major n x n.
inline std::vector<double> random_orthogonal(std::size_t n, Rng& rng)
{
    std::vector<double> q(n * n);
    for (;;) {
        for (auto& x : q) x = rng.normal();
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            double* qi = q.data() + i * n;
            for (std::size_t j = 0; j < i; ++j) {
                const double* qj = q.data() + j * n;
                double c = 0.0;
                for (std::size_t t = 0; t < n; ++t) c += qi[t] * qj[t];
                for (std::size_t t = 0; t < n; ++t) qi[t] -= c * qj[t];
            }
            double norm = 0.0;
            for (std::size_t t = 0; t < n; ++t) norm += qi[t] * qi[t];
            norm = std::sqrt(norm);
            ok = norm > 1e-8;
            for (std::size_t t = 0; t < n && ok; ++t) qi[t] /= norm;
        }
        if (ok) return q;
    }
}

struct SpectralMatrix {
    SymMatrix matrix;
    EigenDecomposition eig; ///< the prescribed eigenpairs, values descending
};

/// sum_i values[i] q_i q_i^T for a random orthonormal basis q.
inline SpectralMatrix matrix_with_spectrum(std::vector<double> values, std::uint64_t seed)
{
    const std::size_t n = values.size();
    detail::require(n >= 1, "matrix_with_spectrum: empty spectrum");
    detail::require(std::is_sorted(values.rbegin(), values.rend()),
                    "matrix_with_spectrum: values must be in descending order");
    Rng rng(seed);
    auto q = random_orthogonal(n, rng);
    SymMatrix mat(n);
    for (std::size_t e = 0; e < n; ++e) {
        const double* v = q.data() + e * n;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) mat(i, j) += values[e] * v[i] * v[j];
    }
    return {std::move(mat), EigenDecomposition{n, std::move(values), std::move(q)}};
}

} // namespace kpsd
