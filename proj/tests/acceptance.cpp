// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "kpsd_cli.hpp"

using namespace kpsd;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body)
{
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %2d %s [%s] (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// lifted, unit-normalized, exactly certified members shared by criteria 4 and 5
struct MemberStats {
    std::size_t certified = 0, total = 0;
    std::size_t thm1_ok = 0, nevals_ok = 0, smallev_ok = 0;
    double worst_gap = -1e300;
};

MemberStats member_stats(std::size_t n, std::size_t k, std::size_t count, std::uint64_t seed)
{
    MemberStats s;
    const double ratio = averaging_ratio(n, k);
    for (std::size_t t = 0; t < count; ++t) {
        const auto lifted = detail::lifted_member(n, k, split_seed(seed, t), default_psd_tolerance);
        const SymMatrix& m = lifted.matrix;
        ++s.total;
        s.certified += member_exact(m, k).member && std::abs(frobenius_norm(m) - 1.0) <= 1e-12;
        const auto r = dist_to_psd(m);
        s.thm1_ok += r.distance <= ratio + 1e-9;
        s.worst_gap = std::max(s.worst_gap, r.distance - ratio);
        s.nevals_ok += r.negative_count <= n - k;
        const double lambda1 = r.negative_count ? -r.negative_eigenvalues.front() : 0.0;
        s.smallev_ok += r.distance <= std::sqrt(static_cast<double>(n - k)) * lambda1 + 1e-9;
    }
    return s;
}

std::string run_cli_capture(const std::vector<std::string>& args, int& code)
{
    std::vector<const char*> argv{"kpsd"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return out.str();
}

} // namespace

int main()
{
    const std::pair<std::size_t, std::size_t> pairs[] = {{6, 3}, {8, 4}, {10, 5}, {12, 6}};
    std::vector<MemberStats> members;

    criterion(1, "exact averaging identity, 200 matrices, n in 3..30", [] {
        Rng rng(1);
        double worst = 0.0;
        for (int t = 0; t < 200; ++t) {
            const std::size_t n = 3 + rng.below(28);
            const std::size_t k = 2 + rng.below(n - 2);
            const SymMatrix m = random_symmetric(n, rng);
            const double got = frobenius_norm(m - full_average(m, k) * alpha(n, k));
            const double expect = averaging_ratio(n, k) * frobenius_norm(m);
            worst = std::max(worst, std::abs(got - expect) / expect);
        }
        return Outcome{worst <= 1e-12, fmt("max relative error %.3g", worst)};
    });

    criterion(2, "gab_extremal equality grid, 4 <= n <= 40", [] {
        std::size_t pairs_checked = 0, exact = 0, bad = 0;
        for (std::size_t n = 4; n <= 40; ++n)
            for (std::size_t k = 2; k < n; ++k) {
                const SymMatrix g = gab_extremal(n, k);
                ++pairs_checked;
                bool ok = std::abs(frobenius_norm(g) - 1.0) <= 1e-12;
                if (binomial(n, k) <= 2000000) {
                    ++exact;
                    ok = ok && member_exact(g, k).member;
                }
                ok = ok && std::abs(dist_to_psd(g).distance - closure_lower_bound(n, k)) <= 1e-9;
                bad += !ok;
            }
        return Outcome{bad == 0, fmt("%.0f pairs, %.0f exact memberships, %.0f failures",
                                     static_cast<double>(pairs_checked), static_cast<double>(exact),
                                     static_cast<double>(bad))};
    });

    criterion(3, "tightness at n=4, k=2", [] {
        const double upper = averaging_ratio(4, 2);
        const double lower = closure_lower_bound(4, 2);
        const double d = dist_to_psd(gab_extremal(4, 2)).distance;
        const bool ok = std::abs(upper - 0.5) <= 1e-15 && std::abs(lower - 0.5) <= 1e-15
                        && std::abs(d - 0.5) <= 1e-9;
        return Outcome{ok, fmt("upper %.17g lower %.17g dist %.17g", upper, lower, d)};
    });

    criterion(4, "upper bound on 100 lifted members at each of four sizes", [&] {
        bool ok = true;
        double worst = -1e300;
        for (const auto& [n, k] : pairs) {
            members.push_back(member_stats(n, k, 100, 4000 + n));
            const auto& s = members.back();
            ok = ok && s.certified == 100 && s.thm1_ok == 100;
            worst = std::max(worst, s.worst_gap);
        }
        return Outcome{ok, fmt("max dist - bound %.4g", worst)};
    });

    criterion(5, "negative count and sqrt(n-k) lambda_1 bounds on the same members", [&] {
        bool ok = members.size() == 4;
        for (const auto& s : members) ok = ok && s.nevals_ok == s.total && s.smallev_ok == s.total;
        return Outcome{ok, "400 members"};
    });

    criterion(6, "RIP construction n=200, k=2, 100 macro-repetitions", [] {
        std::size_t successes = 0, bad = 0;
        double min_raw = 1e300, min_norm = 1e300;
        for (std::uint64_t r = 0; r < 100; ++r) {
            const auto run = verify_theorem4_run(200, 2, 3, split_seed(6, r));
            if (!run.success) continue;
            ++successes;
            min_raw = std::min(min_raw, run.raw_distance);
            min_norm = std::min(min_norm, run.normalized_distance);
            bad += run.raw_distance < std::sqrt(14.0) * 0.1 - 1e-9;
            bad += run.normalized_distance < 0.012311 - 1e-9;
        }
        const double p = rip_success_probability(2, 0.9, 186);
        const bool ok = successes >= 95 && bad == 0 && p >= 0.51;
        return Outcome{ok, fmt("successes %.0f, min raw %.4f, min normalized %.5f",
                               static_cast<double>(successes), min_raw, min_norm)
                               + fmt(", probability %.6f", p)};
    });

    criterion(7, "RIP norm bound frequency over 400 seeds", [] {
        std::size_t hits = 0;
        const double bound = rip_norm_bound(200, 186, 0.9);
        for (std::uint64_t s = 0; s < 400; ++s) {
            const double norm = frobenius_norm(rip_member_matrix(RipSpec::standard(200, 2, split_seed(7, s))));
            hits += norm * norm <= bound;
        }
        const double f = static_cast<double>(hits) / 400.0;
        return Outcome{f >= 0.45, fmt("frequency %.4f, bound %.4f", f, bound)};
    });

    criterion(8, "sparsifier frequencies n=100, k=75, 10^4 trials", [] {
        const auto test = sparsifier_test_matrix(100, 8);
        const auto f = sparsifier_frequencies(test.eig, 75, 10000, 8);
        const bool ok = f.sparse >= 0.48 && f.parallel_fail <= 0.17 && f.ortho_fail <= 0.35 && f.joint > 0.05;
        return Outcome{ok, fmt("sparse %.4f parallel_fail %.4f ortho_fail %.4f", f.sparse, f.parallel_fail,
                               f.ortho_fail)
                               + fmt(" joint %.4f", f.joint)};
    });

    criterion(9, "sampled averaging n=20, k=10, eps=0.5, delta=0.2", [] {
        const std::uint64_t m = sample_size(20, 10, 0.5, 0.2);
        const auto rows = verify_theorem5(20, 10, 0.5, 0.2, 20, 9, 20);
        std::size_t typical = 0, bound_rows = 0, bound_ok = 0;
        for (const auto& r : rows) {
            if (r.theorem == "thm5_fractions") typical += r.quantity <= 0.5;
            if (r.theorem == "thm5") {
                ++bound_rows;
                bound_ok += r.satisfied;
            }
        }
        const bool ok = m == 2875 && typical >= 16 && bound_rows == 20 * typical && bound_ok == bound_rows;
        return Outcome{ok, fmt("m %.0f, typical %.0f of 20, bound rows %.0f", static_cast<double>(m),
                               static_cast<double>(typical), static_cast<double>(bound_ok))};
    });

    criterion(10, "2-design averaging for Fano and PG(3)", [] {
        bool ok = true;
        double worst = 0.0;
        Rng rng(10);
        for (const Design& d : {fano(), projective_plane(3)}) {
            ok = ok && d.lambda * (d.n - 1) == d.r * (d.k - 1);
            for (int t = 0; t < 50; ++t) {
                const SymMatrix m = random_symmetric(d.n, rng);
                const double expect = averaging_ratio(d.n, d.k) * frobenius_norm(m);
                const double err = std::abs(design_average(m, d).bound - expect);
                worst = std::max(worst, err);
                ok = ok && err <= 1e-12;
            }
        }
        return Outcome{ok, fmt("max abs error %.3g", worst)};
    });

    criterion(11, "eigensolver invariants on 1000 matrices, interlacing on 1000 pairs", [] {
        Rng rng(11);
        std::size_t bad = 0;
        for (int t = 0; t < 1000; ++t) {
            const std::size_t n = 1 + rng.below(100);
            const SymMatrix m = random_symmetric(n, rng);
            const auto eig = eigendecompose(m);
            const double fro = frobenius_norm(m);
            double rec = 0.0, orth = 0.0, sum = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                sum += eig.values[i];
                sq += eig.values[i] * eig.values[i];
                for (std::size_t j = 0; j < n; ++j) {
                    double r = 0.0, o = 0.0;
                    for (std::size_t l = 0; l < n; ++l) {
                        r += eig.values[l] * eig.vector(l)[i] * eig.vector(l)[j];
                        o += eig.vector(i)[l] * eig.vector(j)[l];
                    }
                    rec += (r - m(i, j)) * (r - m(i, j));
                    orth += (o - (i == j)) * (o - (i == j));
                }
            }
            const double tr = trace(m);
            bool ok = std::sqrt(rec) <= 1e-10 * std::max(1.0, fro);
            ok = ok && std::sqrt(orth) <= 1e-10;
            ok = ok && std::abs(sum - tr) <= 1e-10 * std::max(1.0, std::abs(tr));
            ok = ok && std::abs(sq - fro * fro) <= 1e-10 * fro * fro;
            bad += !ok;
        }
        std::size_t interlace_bad = 0;
        for (int t = 0; t < 1000; ++t) {
            const std::size_t n = 2 + rng.below(39);
            const std::size_t k = 2 + rng.below(n - 1);
            const SymMatrix m = random_symmetric(n, rng);
            interlace_bad += !interlace_check(m, draw_kset(n, k, rng));
        }
        return Outcome{bad == 0 && interlace_bad == 0,
                       fmt("invariant failures %.0f, interlace failures %.0f", static_cast<double>(bad),
                           static_cast<double>(interlace_bad))};
    });

    criterion(12, "verify output is byte-identical for a repeated seed", [] {
        const std::vector<std::vector<std::string>> commands{
            {"verify", "theorem1", "--n", "8", "--k", "4", "--trials", "10", "--seed", "12"},
            {"verify", "theorem2", "--n", "100", "--k", "75", "--trials", "64", "--members", "1", "--seed", "12"},
            {"verify", "theorem3", "--n", "30", "--k", "12", "--seed", "12"},
            {"verify", "theorem4", "--n", "200", "--k", "2", "--seed", "12"},
            {"verify", "theorem5", "--n", "14", "--k", "6", "--epsilon", "0.5", "--delta", "0.2",
             "--repetitions", "3", "--members", "3", "--seed", "12"},
            {"verify", "sparsifier", "--n", "100", "--k", "75", "--trials", "500", "--seed", "12"},
        };
        std::size_t same = 0;
        for (const auto& c : commands) {
            int c1 = -1, c2 = -1;
            const std::string a = run_cli_capture(c, c1);
            const std::string b = run_cli_capture(c, c2);
            same += c1 == 0 && c2 == 0 && a == b && !a.empty();
        }
        return Outcome{same == commands.size(),
                       fmt("%.0f of %.0f commands identical", static_cast<double>(same),
                           static_cast<double>(commands.size()))};
    });

    std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
