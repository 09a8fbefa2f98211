#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kpsd/error.hpp"
#include "kpsd/random.hpp"

namespace kpsd {

/// Dense real symmetric matrix. Only the upper triangle is stored, so
/// M(i, j) == M(j, i) holds structurally.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(std::size_t n) : n_(n), data_(n * (n + 1) / 2, 0.0)
    {
        detail::require(n >= 1, "SymMatrix: dimension must be positive");
    }

    static SymMatrix identity(std::size_t n)
    {
        SymMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static SymMatrix diagonal(std::span<const double> values)
    {
        SymMatrix m(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
        return m;
    }

    /// Builds from a full row-major n x n array, symmetrizing by averaging.
    static SymMatrix from_dense(std::size_t n, std::span<const double> rowmajor)
    {
        detail::require(rowmajor.size() == n * n, "SymMatrix::from_dense: size mismatch");
        SymMatrix m(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j)
                m(i, j) = 0.5 * (rowmajor[i * n + j] + rowmajor[j * n + i]);
        return m;
    }

    std::size_t size() const noexcept { return n_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[offset(i, j)]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[offset(i, j)]; }

    /// Full row-major copy.
    std::vector<double> dense() const
    {
        std::vector<double> out(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i; j < n_; ++j)
                out[i * n_ + j] = out[j * n_ + i] = (*this)(i, j);
        return out;
    }

    SymMatrix& operator+=(const SymMatrix& o)
    {
        detail::require(o.n_ == n_, "SymMatrix: dimension mismatch");
        for (std::size_t t = 0; t < data_.size(); ++t) data_[t] += o.data_[t];
        return *this;
    }
    SymMatrix& operator-=(const SymMatrix& o)
    {
        detail::require(o.n_ == n_, "SymMatrix: dimension mismatch");
        for (std::size_t t = 0; t < data_.size(); ++t) data_[t] -= o.data_[t];
        return *this;
    }
    SymMatrix& operator*=(double s)
    {
        for (double& x : data_) x *= s;
        return *this;
    }
    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
    friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

    /// Adds `shift` to every diagonal entry.
    SymMatrix& shift_diagonal(double shift)
    {
        for (std::size_t i = 0; i < n_; ++i) (*this)(i, i) += shift;
        return *this;
    }

    /// x^T M x
    double quadratic_form(std::span<const double> x) const
    {
        detail::require(x.size() == n_, "quadratic_form: dimension mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (x[i] == 0.0) continue;
            double row = 0.0;
            for (std::size_t j = 0; j < n_; ++j) row += (*this)(i, j) * x[j];
            acc += x[i] * row;
        }
        return acc;
    }

    bool all_finite() const
    {
        return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
    }

    friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

private:
    std::size_t offset(std::size_t i, std::size_t j) const noexcept
    {
        if (i > j) std::swap(i, j);
        // row-major upper triangle: rows 0..i-1 hold n + (n-1) + ... entries
        return i * n_ - i * (i - 1) / 2 + (j - i);
    }

    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// A k-subset of {0, ..., n-1}, strictly increasing. Text formats use 1-based
/// indices; in memory they are 0-based.
struct KSet {
    std::vector<std::size_t> indices;

    std::size_t size() const noexcept { return indices.size(); }
    std::size_t operator[](std::size_t a) const noexcept { return indices[a]; }

    bool contains(std::size_t i) const
    {
        return std::binary_search(indices.begin(), indices.end(), i);
    }

    /// Throws unless the set is a valid k-subset of [n] with 2 <= k <= n.
    void validate(std::size_t n) const
    {
        detail::require(indices.size() >= 2 && indices.size() <= n,
                        "KSet: size must satisfy 2 <= k <= n");
        for (std::size_t a = 0; a < indices.size(); ++a) {
            if (indices[a] >= n) throw PreconditionError("KSet: index out of range");
            if (a > 0 && indices[a] <= indices[a - 1])
                throw PreconditionError("KSet: indices must be strictly increasing");
        }
    }

    static KSet full(std::size_t n)
    {
        KSet s;
        s.indices.resize(n);
        std::iota(s.indices.begin(), s.indices.end(), std::size_t{0});
        return s;
    }

    friend bool operator==(const KSet&, const KSet&) = default;
    friend auto operator<=>(const KSet&, const KSet&) = default;
};

/// Eigenpairs sorted by non-increasing value; vector(i) pairs with values[i].
struct EigenDecomposition {
    std::size_t n = 0;
    std::vector<double> values;
    std::vector<double> vectors; ///< row i is eigenvector i

    std::span<const double> vector(std::size_t i) const
    {
        return {vectors.data() + i * n, n};
    }
    double min_value() const { return values.back(); }
    double max_value() const { return values.front(); }
};

inline double frobenius_norm(const SymMatrix& m)
{
    const std::size_t n = m.size();
    double diag = 0.0, off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diag += m(i, i) * m(i, i);
        for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    }
    return std::sqrt(diag + 2.0 * off);
}

inline double trace(const SymMatrix& m)
{
    double t = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) t += m(i, i);
    return t;
}

inline SymMatrix principal_submatrix(const SymMatrix& m, const KSet& j)
{
    j.validate(m.size());
    const std::size_t k = j.size();
    SymMatrix sub(k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) sub(a, b) = m(j[a], j[b]);
    return sub;
}

/// Writes x (length k) into a zero vector of length n at the positions of j.
inline std::vector<double> embed(std::span<const double> x, const KSet& j, std::size_t n)
{
    std::vector<double> out(n, 0.0);
    for (std::size_t a = 0; a < j.size(); ++a) out[j[a]] = x[a];
    return out;
}

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct JacobiOptions {
    double relative_tolerance = 1e-14;
    int max_sweeps = 100;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius mass is at most
/// relative_tolerance * ||M||_F. Eigenpairs are stably sorted by value
/// descending, then by diagonal position ascending. The zero matrix yields
/// the standard basis.
inline EigenDecomposition eigendecompose(const SymMatrix& m, JacobiOptions opts = {})
{
    const std::size_t n = m.size();
    std::vector<double> a = m.dense();
    std::vector<double> v(n * n, 0.0); // row i holds eigenvector i
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    const double threshold = opts.relative_tolerance * frobenius_norm(m);
    auto off_mass = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
        return std::sqrt(2.0 * s);
    };

    int sweep = 0;
    while (off_mass() > threshold) {
        if (sweep++ >= opts.max_sweeps)
            throw ConvergenceError("eigendecompose: no convergence within sweep cap");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0)
                                 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                // A <- R^T A R, touching rows/columns p and q only.
                for (std::size_t r = 0; r < n; ++r) {
                    const double arp = a[r * n + p];
                    const double arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double apr = a[p * n + r];
                    const double aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                a[p * n + q] = a[q * n + p] = 0.0;

                double* vp = v.data() + p * n;
                double* vq = v.data() + q * n;
                for (std::size_t r = 0; r < n; ++r) {
                    const double x = vp[r];
                    const double y = vq[r];
                    vp[r] = c * x - s * y;
                    vq[r] = s * x + c * y;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a[x * n + x] > a[y * n + y];
    });

    EigenDecomposition out;
    out.n = n;
    out.values.resize(n);
    out.vectors.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = a[order[i] * n + order[i]];
        std::copy_n(v.data() + order[i] * n, n, out.vectors.data() + i * n);
    }
    return out;
}

inline constexpr double default_psd_tolerance = 1e-9;

/// lambda_min(M) >= -tol * max(1, ||M||_F)
inline bool is_psd(const SymMatrix& m, double tol = default_psd_tolerance)
{
    const double slack = tol * std::max(1.0, frobenius_norm(m));
    return eigendecompose(m).min_value() >= -slack;
}

/// Checks Cauchy interlacing lambda_{n-k+i}(M) <= lambda_i(M_J) <= lambda_i(M)
/// for every i, with additive slack 1e-9 * max(1, ||M||_F).
inline bool interlace_check(const SymMatrix& m, const KSet& j)
{
    const std::size_t n = m.size();
    const std::size_t k = j.size();
    const auto full = eigendecompose(m);
    const auto sub = eigendecompose(principal_submatrix(m, j));
    const double slack = 1e-9 * std::max(1.0, frobenius_norm(m));
    for (std::size_t i = 0; i < k; ++i) {
        if (sub.values[i] > full.values[i] + slack) return false;
        if (sub.values[i] < full.values[n - k + i] - slack) return false;
    }
    return true;
}

/// n x n matrix with i.i.d. standard normal entries on and above the diagonal.
inline SymMatrix random_symmetric(std::size_t n, Rng& rng)
{
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m(i, j) = rng.normal();
    return m;
}

// ---------------------------------------------------------------------------
// Text format: line 1 = n, then n rows of n space-separated values.

inline std::string format_real(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_matrix(std::ostream& os, const SymMatrix& m)
{
    const std::size_t n = m.size();
    os << n << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j) os << ' ';
            os << format_real(m(i, j));
        }
        os << '\n';
    }
}

namespace detail {

inline std::vector<std::string_view> split_spaces(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
            ++pos;
        if (pos >= line.size()) break;
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != '\r')
            ++end;
        out.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view tok, const char* what)
{
    T value{};
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    if (!tok.empty() && tok.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError(std::string("cannot parse ") + what + ": '" + std::string(tok) + "'");
    return value;
}

inline bool next_content_line(std::istream& is, std::string& line)
{
    while (std::getline(is, line)) {
        if (!split_spaces(line).empty()) return true;
    }
    return false;
}

} // namespace detail

/// Reads the matrix text format. Asymmetry beyond 1e-12 * max(1, ||M||_F) is
/// an error; otherwise the two triangles are averaged.
inline SymMatrix read_matrix(std::istream& is)
{
    std::string line;
    if (!detail::next_content_line(is, line)) throw ParseError("matrix: missing dimension line");
    const auto head = detail::split_spaces(line);
    if (head.size() != 1) throw ParseError("matrix: first line must hold n only");
    const auto n = detail::parse_number<std::size_t>(head[0], "dimension");
    if (n == 0) throw ParseError("matrix: dimension must be positive");

    std::vector<double> full(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!detail::next_content_line(is, line))
            throw ParseError("matrix: expected " + std::to_string(n) + " rows");
        const auto toks = detail::split_spaces(line);
        if (toks.size() != n)
            throw ParseError("matrix: row " + std::to_string(i + 1) + " has "
                             + std::to_string(toks.size()) + " values, expected "
                             + std::to_string(n));
        for (std::size_t j = 0; j < n; ++j) {
            const double x = detail::parse_number<double>(toks[j], "matrix entry");
            if (!std::isfinite(x)) throw ParseError("matrix: non-finite entry");
            full[i * n + j] = x;
        }
    }
    if (detail::next_content_line(is, line)) throw ParseError("matrix: trailing content");

    double sq = 0.0;
    for (double x : full) sq += x * x;
    const double limit = 1e-12 * std::max(1.0, std::sqrt(sq));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(full[i * n + j] - full[j * n + i]) > limit)
                throw ParseError("matrix: not symmetric at (" + std::to_string(i + 1) + ", "
                                 + std::to_string(j + 1) + ")");
    return SymMatrix::from_dense(n, full);
}

} // namespace kpsd
