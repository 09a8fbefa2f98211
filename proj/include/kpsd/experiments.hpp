#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kpsd/averaging.hpp"
#include "kpsd/closure.hpp"
#include "kpsd/cone.hpp"
#include "kpsd/constructions.hpp"
#include "kpsd/error.hpp"
#include "kpsd/ksets.hpp"
#include "kpsd/random.hpp"
#include "kpsd/symmat.hpp"

namespace kpsd {

enum class Direction { le, ge, gt, eq };

inline const char* to_string(Direction d)
{
    switch (d) {
    case Direction::le: return "le";
    case Direction::ge: return "ge";
    case Direction::gt: return "gt";
    case Direction::eq: return "eq";
    }
    return "?";
}

/// le: q <= b + tol; ge: q >= b - tol; gt: q > b; eq: |q - b| <= tol.
inline bool compare(double quantity, double bound, Direction d, double tol)
{
    switch (d) {
    case Direction::le: return quantity <= bound + tol;
    case Direction::ge: return quantity >= bound - tol;
    case Direction::gt: return quantity > bound;
    case Direction::eq: return std::abs(quantity - bound) <= tol;
    }
    return false;
}

/// One measured quantity against a formula. Rows with hard == false are
/// reported but never fail a run (screened-only members, probabilistic
/// events, simplified table constants).
struct VerifyRow {
    std::string theorem;
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    double quantity = 0.0;
    double bound = 0.0;
    bool satisfied = false;
    Direction direction = Direction::le;
    double tol = 0.0;
    bool hard = true;
    std::string notes; ///< extra key=value pairs, ';'-separated

    /// dir, tol and hard first, then the notes.
    std::string extra() const
    {
        std::string s = std::string("dir=") + to_string(direction) + ";tol=" + format_real(tol)
                        + ";hard=" + (hard ? "1" : "0");
        if (!notes.empty()) s += ";" + notes;
        return s;
    }
};

inline VerifyRow make_row(std::string theorem, std::size_t n, std::size_t k, std::uint64_t seed,
                          double quantity, double bound, Direction dir, double tol, bool hard,
                          std::string notes = {})
{
    VerifyRow row{std::move(theorem), n, k, seed, quantity, bound, false, dir, tol, hard,
                  std::move(notes)};
    row.satisfied = compare(quantity, bound, dir, tol);
    return row;
}

inline constexpr const char* csv_header = "theorem,n,k,seed,quantity,bound,satisfied,extra";

inline void write_csv(std::ostream& os, const std::vector<VerifyRow>& rows)
{
    os << csv_header << '\n';
    for (const auto& r : rows)
        os << r.theorem << ',' << r.n << ',' << r.k << ',' << r.seed << ','
           << format_real(r.quantity) << ',' << format_real(r.bound) << ','
           << (r.satisfied ? "true" : "false") << ',' << r.extra() << '\n';
}

inline bool all_hard_satisfied(const std::vector<VerifyRow>& rows)
{
    return std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return !r.hard || r.satisfied; });
}

namespace detail {

inline std::string kv(const char* key, double value) { return std::string(key) + "=" + format_real(value); }

inline std::string kv(const char* key, std::uint64_t value)
{
    return std::string(key) + "=" + std::to_string(value);
}

inline std::string kv(const char* key, const std::string& value) { return std::string(key) + "=" + value; }

inline std::string join(std::initializer_list<std::string> parts)
{
    std::string s;
    for (const auto& p : parts) {
        if (!s.empty()) s += ';';
        s += p;
    }
    return s;
}

inline SymMatrix normalized(SymMatrix m)
{
    const double norm = frobenius_norm(m);
    if (norm > 0.0) m *= 1.0 / norm;
    return m;
}

/// Lifted, unit-normalized member of S^{n,k} from a Gaussian seed matrix.
/// Exact lift when C(n,k) is enumerable, otherwise a sampled lift.
struct LiftedMember {
    SymMatrix matrix;
    double shift = 0.0;
    bool exact = false;
};

inline LiftedMember lifted_member(std::size_t n, std::size_t k, std::uint64_t seed, double tol,
                                  std::size_t sampled_sets = 512)
{
    Rng rng(seed);
    const SymMatrix m0 = random_symmetric(n, rng);
    if (binomial(n, k) <= enumeration_cap) {
        auto lift = lift_to_closure(m0, k, tol);
        return {normalized(std::move(lift.lifted)), lift.shift, true};
    }
    auto lift = lift_sampled(m0, k, sampled_sets, split_seed(seed, 1), tol);
    return {normalized(std::move(lift.lifted)), lift.shift, false};
}

} // namespace detail

// ---------------------------------------------------------------------------

/// Upper bound (n-k)/(n+k-2) against lifted members, plus the negative-count
/// and sqrt(n-k) lambda_1 bounds on the same members, the exact averaging
/// identity, and gab_extremal.
inline std::vector<VerifyRow> verify_theorem1(std::size_t n, std::size_t k, std::size_t trials,
                                              std::uint64_t seed, double tol = default_psd_tolerance)
{
    detail::require(k >= 2 && k < n, "verify_theorem1: need 2 <= k < n");
    detail::require_enumerable(n, k, "verify_theorem1");
    const double ratio = averaging_ratio(n, k);
    std::vector<VerifyRow> rows;

    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t s = split_seed(seed, t);
        const auto member = detail::lifted_member(n, k, s, tol);
        const SymMatrix& m = member.matrix;
        const auto verdict = member_exact(m, k, tol);
        const bool certified = verdict.member;
        const auto report = dist_to_psd(m);
        const double lambda1 = report.negative_count ? -report.negative_eigenvalues.front() : 0.0;
        const std::string notes = detail::join({detail::kv("trial", std::uint64_t{t}),
                                                detail::kv("shift", member.shift),
                                                detail::kv("certified", std::uint64_t{certified})});

        rows.push_back(make_row("thm1", n, k, s, report.distance, ratio, Direction::le, 1e-9,
                                certified, notes));
        rows.push_back(make_row("nevals", n, k, s, static_cast<double>(report.negative_count),
                                static_cast<double>(n - k), Direction::le, 0.0, certified, notes));
        rows.push_back(make_row("smallev", n, k, s, report.distance,
                                std::sqrt(static_cast<double>(n - k)) * lambda1, Direction::le, 1e-9,
                                certified, notes));
        const auto witness = upper_bound_certificate(m, k);
        const double expected = ratio * frobenius_norm(m);
        rows.push_back(make_row("avg_identity", n, k, s, witness.bound, expected, Direction::eq,
                                1e-12 * expected, true,
                                detail::kv("alpha", witness.alpha)));
    }

    const SymMatrix g = gab_extremal(n, k);
    rows.push_back(make_row("thm1", n, k, seed, dist_to_psd(g).distance, ratio, Direction::le, 1e-9,
                            true, "member=gab_extremal"));
    return rows;
}

/// lambda_1 <= 96(n-k)/n^{3/2} and dist <= 96((n-k)/n)^{3/2} for gab_extremal
/// (closed form always, numerically for n <= 300) and for screened lifted
/// members. Distance rows whose bound is at least 1 are marked vacuous.
inline std::vector<VerifyRow> verify_theorem2(std::size_t n, std::size_t k, std::uint64_t seed,
                                              std::size_t trials = 256, std::size_t members = 3,
                                              double tol = default_psd_tolerance)
{
    detail::require(n >= 97, "verify_theorem2: need n >= 97");
    detail::require(4 * k >= 3 * n && k < n, "verify_theorem2: need 3n/4 <= k < n");
    const double lbound = lambda1_bound(n, k);
    const double dbound = sparsifier_distance_bound(n, k);
    const bool vacuous = dbound >= 1.0;
    const std::string vac = detail::kv("vacuous", std::uint64_t{vacuous});
    std::vector<VerifyRow> rows;

    const GabSpec spec = gab_extremal_spec(n, k);
    const double closed_lambda1 = -gab_eigenvalues(spec).lonely;
    rows.push_back(make_row("thm2_lambda1", n, k, seed, closed_lambda1, lbound, Direction::le, 1e-9,
                            true, "member=gab_extremal;source=closed"));
    rows.push_back(make_row("thm2_dist", n, k, seed, gab_distance(spec), dbound, Direction::le, 1e-9,
                            !vacuous, detail::join({"member=gab_extremal;source=closed", vac})));

    if (n <= 300) {
        const auto cert = lambda1_certificate(gab_matrix(spec), k, trials, seed);
        rows.push_back(make_row(
            "thm2_lambda1", n, k, seed, cert.lambda1, cert.bound, Direction::le, 1e-9, true,
            detail::join({"member=gab_extremal;source=numeric",
                          detail::kv("good_trials", std::uint64_t{cert.good_trials}),
                          detail::kv("best_qf", cert.best_quadratic_form)})));

        for (std::size_t j = 0; j < members; ++j) {
            const std::uint64_t s = split_seed(seed, j + 1);
            const auto member = detail::lifted_member(n, k, s, tol);
            const auto screen = member_sampled(member.matrix, k, 64, split_seed(s, 2), tol);
            const std::string notes = detail::join(
                {detail::kv("member", std::string(member.exact ? "lifted" : "lifted_sampled")),
                 detail::kv("screened", std::uint64_t{screen.member}),
                 detail::kv("shift", member.shift)});
            const auto report = dist_to_psd(member.matrix);
            if (report.negative_count == 0) {
                rows.push_back(make_row("thm2_dist", n, k, s, 0.0, dbound, Direction::le, 1e-9,
                                        false, detail::join({notes, vac})));
                continue;
            }
            const auto c = lambda1_certificate(member.matrix, k, trials, s);
            rows.push_back(make_row(
                "thm2_lambda1", n, k, s, c.lambda1, c.bound, Direction::le, 1e-9, false,
                detail::join({notes, detail::kv("good_trials", std::uint64_t{c.good_trials}),
                              detail::kv("best_qf", c.best_quadratic_form)})));
            rows.push_back(make_row("thm2_dist", n, k, s, report.distance, dbound, Direction::le,
                                    1e-9, false, detail::join({notes, vac})));
        }
    }

    // where the sparsification bound overtakes the averaging bound
    rows.push_back(make_row("thm2_vs_thm1", n, k, seed, dbound, averaging_ratio(n, k),
                            Direction::le, 0.0, false, "report=crossover"));
    return rows;
}

/// (1/sqrt 2)(n-k)/n, the simplified small-k lower bound of the regime table.
inline double small_k_table_bound(std::size_t n, std::size_t k)
{
    return static_cast<double>(n - k) / static_cast<double>(n) / std::sqrt(2.0);
}

/// One equality row per (n, k): dist(gab_extremal) against the closed-form
/// lower bound. Unit norm and membership are recorded in the notes and emit
/// a failing row of their own only when violated. Small-k pairs
/// (k*k <= n) add a report-only row against the simplified table bound.
inline std::vector<VerifyRow> verify_theorem3(const std::vector<std::pair<std::size_t, std::size_t>>& grid,
                                              double tol = default_psd_tolerance,
                                              std::uint64_t seed = 0)
{
    std::vector<VerifyRow> rows;
    for (const auto& [n, k] : grid) {
        detail::require(k >= 2 && k < n, "verify_theorem3: need 2 <= k < n");
        const GabSpec spec = gab_extremal_spec(n, k);
        const SymMatrix g = gab_matrix(spec);
        const double norm = frobenius_norm(g);

        bool member = false;
        std::string mode;
        bool member_hard = true;
        if (binomial(n, k) <= enumeration_cap) {
            member = member_exact(g, k, tol).member;
            mode = "exact";
        } else {
            member = member_sampled(g, k, 200, seed, tol).member;
            mode = "screened";
            member_hard = false;
        }
        double dist = 0.0;
        std::string source;
        if (n <= 300) {
            dist = dist_to_psd(g).distance;
            source = "numeric";
        } else {
            dist = gab_distance(spec);
            source = "closed";
        }
        const double bound = closure_lower_bound(n, k);
        const std::string notes = detail::join({detail::kv("norm", norm),
                                                detail::kv("membership", mode),
                                                detail::kv("member", std::uint64_t{member}),
                                                detail::kv("source", source)});
        rows.push_back(make_row("thm3", n, k, seed, dist, bound, Direction::eq, 1e-9, true, notes));
        if (std::abs(norm - 1.0) > 1e-12)
            rows.push_back(make_row("thm3_norm", n, k, seed, norm, 1.0, Direction::eq, 1e-12, true));
        if (!member)
            rows.push_back(make_row("thm3_member", n, k, seed, 0.0, 1.0, Direction::eq, 0.0,
                                    member_hard, detail::kv("membership", mode)));
        if (k * k <= n)
            rows.push_back(make_row("table1_small_k", n, k, seed, dist, small_k_table_bound(n, k),
                                    Direction::ge, 0.0, false, "report=simplified"));
    }
    return rows;
}

/// Theorem 4 outcome with the instance that passed the screen, if any.
struct Theorem4Run {
    std::vector<VerifyRow> rows;
    std::size_t attempts = 0;
    bool success = false;
    double raw_distance = 0.0;
    double normalized_distance = 0.0;
};

/// Draws rip_member_matrix with seeds split_seed(seed, a) until the
/// membership screen passes (exact for k = 2, sampled otherwise) or
/// max_attempts is used up.
inline Theorem4Run verify_theorem4_run(std::size_t n, std::size_t k, std::size_t max_attempts,
                                       std::uint64_t seed, double tol = default_psd_tolerance)
{
    detail::require(k >= 2, "verify_theorem4: need k >= 2");
    detail::require(93 * k < n, "verify_theorem4: need k/n < 1/93");
    detail::require(max_attempts >= 1, "verify_theorem4: need at least one attempt");
    Theorem4Run run;
    const bool exact = k == 2 || binomial(n, k) <= enumeration_cap;
    std::optional<SymMatrix> found;
    RipSpec spec;
    for (std::size_t a = 0; a < max_attempts && !found; ++a) {
        spec = RipSpec::standard(n, k, split_seed(seed, a));
        SymMatrix m = rip_member_matrix(spec);
        ++run.attempts;
        const bool pass = exact ? member_exact(m, k, tol).member
                                : member_sampled(m, k, 2000, split_seed(spec.seed, 1), tol).member;
        if (pass) found = std::move(m);
    }

    const std::string mode = exact ? "exact" : "screened";
    run.rows.push_back(make_row("thm4_attempts", n, k, seed, static_cast<double>(run.attempts),
                                static_cast<double>(max_attempts), Direction::le, 0.0, false,
                                detail::join({detail::kv("success", std::uint64_t{found.has_value()}),
                                              detail::kv("membership", mode)})));
    const double prob = rip_success_probability(k, spec.delta, spec.m);
    run.rows.push_back(make_row("thm4_prob", n, k, seed, prob, 0.51, Direction::ge, 0.0, true,
                                detail::kv("m", std::uint64_t{spec.m})));
    if (!found) return run;

    run.success = true;
    const SymMatrix& m = *found;
    const double norm = frobenius_norm(m);
    run.raw_distance = dist_to_psd(m).distance;
    run.normalized_distance = run.raw_distance / norm;
    const double r = static_cast<double>(k) / static_cast<double>(n);
    const std::string notes = detail::join({detail::kv("membership", mode),
                                            detail::kv("m", std::uint64_t{spec.m}),
                                            detail::kv("delta", spec.delta)});
    run.rows.push_back(make_row("thm4", n, k, spec.seed, run.normalized_distance, rip_lower_bound(r),
                                Direction::ge, 1e-9, exact, notes));
    run.rows.push_back(make_row("rip1", n, k, spec.seed, run.raw_distance,
                                std::sqrt(static_cast<double>(n - spec.m)) * (1.0 - spec.delta),
                                Direction::ge, 1e-9, true, notes));
    run.rows.push_back(make_row("ripnorm", n, k, spec.seed, norm * norm,
                                rip_norm_bound(n, spec.m, spec.delta), Direction::le, 0.0, false,
                                notes));
    return run;
}

inline std::vector<VerifyRow> verify_theorem4(std::size_t n, std::size_t k, std::size_t max_attempts,
                                              std::uint64_t seed, double tol = default_psd_tolerance)
{
    return verify_theorem4_run(n, k, max_attempts, seed, tol).rows;
}

/// Sampled averaging: per repetition r the sample uses split_seed(seed, r);
/// the lifted members use split_seed(seed, repetitions + j) and are shared
/// by all repetitions.
inline std::vector<VerifyRow> verify_theorem5(std::size_t n, std::size_t k, double epsilon,
                                              double delta, std::size_t repetitions,
                                              std::uint64_t seed, std::size_t members = 20,
                                              double tol = default_psd_tolerance)
{
    detail::require(k >= 2 && k + 1 <= n, "verify_theorem5: need 2 <= k <= n - 1");
    detail::require(epsilon > 0.0 && epsilon < 1.0, "verify_theorem5: need 0 < epsilon < 1");
    detail::require(delta > 0.0 && delta < 1.0, "verify_theorem5: need 0 < delta < 1");
    detail::require(repetitions >= 1, "verify_theorem5: need at least one repetition");
    const std::uint64_t m = sample_size(n, k, epsilon, delta);
    const double ratio = averaging_ratio(n, k);
    std::vector<VerifyRow> rows;

    std::vector<detail::LiftedMember> lifted;
    for (std::size_t j = 0; j < members; ++j)
        lifted.push_back(detail::lifted_member(n, k, split_seed(seed, repetitions + j), tol));

    std::size_t typical = 0;
    for (std::size_t r = 0; r < repetitions; ++r) {
        const std::uint64_t s = split_seed(seed, r);
        const KSetSample sample = sample_ksets(n, k, static_cast<std::size_t>(m), s);
        const FractionStats stats = fraction_stats(sample);
        const bool good = stats.epsilon_achieved <= epsilon;
        typical += good;
        rows.push_back(make_row("thm5_fractions", n, k, s, stats.epsilon_achieved, epsilon,
                                Direction::le, 0.0, false,
                                detail::join({detail::kv("m", m), detail::kv("rep", std::uint64_t{r})})));
        if (!good) continue;
        for (std::size_t j = 0; j < lifted.size(); ++j) {
            const SymMatrix& mat = lifted[j].matrix;
            const std::string notes = detail::join({detail::kv("rep", std::uint64_t{r}),
                                                    detail::kv("member", std::uint64_t{j}),
                                                    detail::kv("screened", std::uint64_t{!lifted[j].exact})});
            const auto witness = upper_bound_certificate(mat, k, sample);
            rows.push_back(make_row("thm5", n, k, s, witness.bound,
                                    (1.0 + epsilon) * ratio * frobenius_norm(mat), Direction::le,
                                    1e-12, true, notes));
            const SymMatrix partial = partial_average(mat, sample);
            const double lambda_min = eigendecompose(partial).min_value();
            rows.push_back(make_row("thm5_partial_psd", n, k, s, lambda_min, 0.0, Direction::ge,
                                    tol * std::max(1.0, frobenius_norm(partial)), lifted[j].exact,
                                    notes));
        }
    }

    rows.push_back(make_row("thm5_frequency", n, k, seed,
                            static_cast<double>(typical) / static_cast<double>(repetitions),
                            1.0 - delta, Direction::ge, 0.0, true,
                            detail::join({detail::kv("m", m), detail::kv("typical", std::uint64_t{typical}),
                                          detail::kv("repetitions", std::uint64_t{repetitions})})));
    const bool nontrivial = sampling_bound_nontrivial(n, k, epsilon);
    rows.push_back(make_row("thm5_nontrivial", n, k, seed, epsilon,
                            static_cast<double>(2 * k - 2) / static_cast<double>(n - k),
                            Direction::le, 0.0, false,
                            detail::kv("nontrivial", std::uint64_t{nontrivial})));
    return rows;
}

/// Unit-norm test matrix for the sparsifier lemmas: eigenvalue -c once and
/// n-1 equal positive eigenvalues, on a random orthonormal basis.
inline SpectralMatrix sparsifier_test_matrix(std::size_t n, std::uint64_t seed, double c = 0.1)
{
    detail::require(n >= 2, "sparsifier_test_matrix: need n >= 2");
    std::vector<double> values(n, std::sqrt((1.0 - c * c) / static_cast<double>(n - 1)));
    values.back() = -c;
    return matrix_with_spectrum(std::move(values), seed);
}

struct SparsifierFrequencies {
    double sparse = 0.0;        ///< support <= k
    double parallel_fail = 0.0; ///< <V, v1> < 1/2
    double ortho_fail = 0.0;    ///< positive part above 24(n-k)/n^{3/2}
    double joint = 0.0;         ///< all three properties
};

inline SparsifierFrequencies sparsifier_frequencies(const EigenDecomposition& eig, std::size_t k,
                                                    std::size_t trials, std::uint64_t seed)
{
    const std::size_t n = eig.n;
    const double threshold = positive_part_threshold(n, k);
    std::size_t sparse = 0, parallel_fail = 0, ortho_fail = 0, joint = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto o = sparsify_min_eigenvector(eig, k, split_seed(seed, t));
        sparse += o.support_size <= k;
        parallel_fail += o.inner_v1 < 0.5;
        ortho_fail += o.positive_part > threshold;
        joint += sparsifier_good(o, n, k);
    }
    const double inv = 1.0 / static_cast<double>(trials);
    return {sparse * inv, parallel_fail * inv, ortho_fail * inv, joint * inv};
}

/// Monte Carlo check of the three sparsifier lemmas and their union bound.
inline std::vector<VerifyRow> verify_sparsifier(std::size_t n, std::size_t k, std::size_t trials,
                                                std::uint64_t seed)
{
    detail::require(n >= 97, "verify_sparsifier: need n >= 97");
    detail::require(4 * k >= 3 * n && k <= n, "verify_sparsifier: need 3n/4 <= k <= n");
    detail::require(trials >= 1, "verify_sparsifier: need at least one trial");
    const auto test = sparsifier_test_matrix(n, seed);
    const auto f = sparsifier_frequencies(test.eig, k, trials, seed);
    const std::string notes = detail::kv("trials", std::uint64_t{trials});
    std::vector<VerifyRow> rows;
    rows.push_back(make_row("sparse", n, k, seed, f.sparse, 0.48, Direction::ge, 0.0, true, notes));
    rows.push_back(make_row("parallel_fail", n, k, seed, f.parallel_fail, 0.17, Direction::le, 0.0,
                            true, notes));
    rows.push_back(make_row("ortho_fail", n, k, seed, f.ortho_fail, 0.35, Direction::le, 0.0, true,
                            notes));
    rows.push_back(make_row("joint", n, k, seed, f.joint, 0.05, Direction::gt, 0.0, true, notes));
    return rows;
}

} // namespace kpsd
