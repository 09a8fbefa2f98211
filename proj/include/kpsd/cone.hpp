#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "kpsd/error.hpp"
#include "kpsd/symmat.hpp"

namespace kpsd {

/// Frobenius distance to the PSD cone together with the spectrum that
/// produces it.
struct ConeDistanceReport {
    double distance = 0.0;
    std::vector<double> negative_eigenvalues; ///< increasing, most negative first
    std::size_t negative_count = 0;
};

/// Eigenvalues above -1e-12 * max(1, ||M||_F) count as non-negative.
inline double negative_clamp_threshold(const SymMatrix& m)
{
    return 1e-12 * std::max(1.0, frobenius_norm(m));
}

inline ConeDistanceReport dist_to_psd(const EigenDecomposition& eig, double clamp)
{
    ConeDistanceReport report;
    for (std::size_t i = eig.n; i-- > 0;) {
        if (eig.values[i] > -clamp) break;
        report.negative_eigenvalues.push_back(eig.values[i]);
    }
    double sq = 0.0;
    for (double x : report.negative_eigenvalues) sq += x * x;
    report.distance = std::sqrt(sq);
    report.negative_count = report.negative_eigenvalues.size();
    return report;
}

/// dist_F(M, S^n_+) = sqrt(sum of squared negative eigenvalues).
inline ConeDistanceReport dist_to_psd(const SymMatrix& m)
{
    return dist_to_psd(eigendecompose(m), negative_clamp_threshold(m));
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues set to zero.
inline SymMatrix project_psd(const SymMatrix& m)
{
    const auto eig = eigendecompose(m);
    const std::size_t n = m.size();
    SymMatrix out(n);
    for (std::size_t e = 0; e < n; ++e) {
        const double lambda = eig.values[e];
        if (lambda <= 0.0) break;
        const auto v = eig.vector(e);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) out(i, j) += lambda * v[i] * v[j];
    }
    return out;
}

/// Members of the k-PSD closure have at most n - k negative eigenvalues.
/// Meaningful only when M is a certified member.
inline bool check_negative_count_bound(const SymMatrix& m, std::size_t k)
{
    detail::require(k >= 1 && k <= m.size(), "check_negative_count_bound: need 1 <= k <= n");
    return dist_to_psd(m).negative_count <= m.size() - k;
}

/// sqrt(n - k) * lambda_1 where -lambda_1 is the smallest eigenvalue.
inline double dist_bound_from_lambda1(const SymMatrix& m, std::size_t k)
{
    detail::require(k >= 2 && k <= m.size(), "dist_bound_from_lambda1: need 2 <= k <= n");
    const auto report = dist_to_psd(m);
    if (report.negative_count == 0)
        throw PreconditionError("dist_bound_from_lambda1: matrix has no negative eigenvalue");
    const double lambda1 = -report.negative_eigenvalues.front();
    return std::sqrt(static_cast<double>(m.size() - k)) * lambda1;
}

} // namespace kpsd
