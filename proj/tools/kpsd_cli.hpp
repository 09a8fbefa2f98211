#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kpsd/kpsd.hpp"

namespace kpsd::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failed = 1;
inline constexpr int exit_usage = 2;

/// fano, pg<q> (q prime, q <= 31) or complete-<n>-<k>.
inline Design design_by_name(const std::string& name)
{
    if (name == "fano") return fano();
    if (name.rfind("pg", 0) == 0 && name.size() > 2)
        return projective_plane(detail::parse_number<std::size_t>(std::string_view(name).substr(2), "plane order"));
    if (name.rfind("complete-", 0) == 0) {
        const std::string rest = name.substr(9);
        const auto dash = rest.find('-');
        if (dash != std::string::npos) {
            const auto n = detail::parse_number<std::size_t>(std::string_view(rest).substr(0, dash), "n");
            const auto k = detail::parse_number<std::size_t>(std::string_view(rest).substr(dash + 1), "k");
            return complete_design(n, k);
        }
    }
    throw PreconditionError("unknown design '" + name + "' (expected fano, pg<q> or complete-<n>-<k>)");
}

namespace detail {

inline SymMatrix load_matrix(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open matrix file '" + path + "'");
    return read_matrix(in);
}

inline void write_vector(std::ostream& os, const char* key, std::span<const double> v)
{
    os << key;
    for (double x : v) os << ' ' << format_real(x);
    os << '\n';
}

} // namespace detail

/// Runs one command line. Results go to `out` (or to --out), diagnostics to
/// `err`. Exit codes: 0 success, 1 an asserted row failed or the eigensolver
/// did not converge, 2 usage or input error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Numerical laboratory for the k-PSD closure", "kpsd"};
    app.fallthrough();
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_path;
    double tol = default_psd_tolerance;
    app.add_option("--seed", seed, "Generator seed")->capture_default_str();
    app.add_option("--out", out_path, "Output file (default stdout)");
    app.add_option("--tol", tol, "PSD tolerance, relative to max(1, ||M_J||_F)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    std::size_t n = 0, k = 0, m = 0;
    double a = 0.0, b = 0.0, delta = 0.9, epsilon = 0.0;
    std::size_t attempts = 3, repetitions = 20, n_max = 0;
    std::size_t t1_trials = 50, t2_trials = 256, t2_members = 3, t5_members = 20, sp_trials = 10000;
    std::string file, design_name, witness_path, emit_name;
    std::optional<std::size_t> sample;
    bool exact = false;

    auto* construct = app.add_subcommand("construct", "Emit a structured matrix");
    construct->require_subcommand(1);
    auto* c_gab = construct->add_subcommand("gab", "G(a,b,n): diagonal b, off-diagonal -a");
    c_gab->add_option("--a", a)->required()->check(CLI::NonNegativeNumber);
    c_gab->add_option("--b", b)->required()->check(CLI::NonNegativeNumber);
    c_gab->add_option("--n", n)->required();
    auto* c_ext = construct->add_subcommand("gab-extremal", "Unit-norm G on the S^{n,k} boundary");
    c_ext->add_option("--n", n)->required();
    c_ext->add_option("--k", k)->required();
    auto* c_rip = construct->add_subcommand("rip", "-(1-delta)I + W^T W with a random sign matrix W");
    c_rip->add_option("--n", n)->required();
    c_rip->add_option("--k", k)->required();
    c_rip->add_option("--m", m, "Rows of W (default 93k)");
    c_rip->add_option("--delta", delta)->capture_default_str();

    auto* dist = app.add_subcommand("dist", "Frobenius distance to the PSD cone");
    dist->add_option("file", file)->required();

    auto* member = app.add_subcommand("member", "Membership in S^{n,k}");
    member->add_option("--k", k)->required();
    auto* member_exact_flag = member->add_flag("--exact", exact, "Enumerate every k-set (default)");
    member->add_option("--sample", sample, "Check M sampled k-sets")->excludes(member_exact_flag);
    member->add_option("file", file)->required();

    auto* average = app.add_subcommand("average", "Averaging witness alpha * T(M) and its bound");
    average->add_option("--k", k)->required();
    auto* avg_sample = average->add_option("--sample", sample, "Average over M sampled k-sets");
    average->add_option("--design", design_name, "Average over the blocks of a 2-design")
        ->excludes(avg_sample);
    average->add_option("--witness", witness_path, "Also write the witness matrix here");
    average->add_option("file", file)->required();

    auto* designs = app.add_subcommand("designs", "2-designs");
    designs->require_subcommand(1);
    auto* d_list = designs->add_subcommand("list", "Available designs");
    auto* d_emit = designs->add_subcommand("emit", "Write a design");
    d_emit->add_option("name", emit_name)->required();

    auto* verify = app.add_subcommand("verify", "Verification runs, CSV output");
    verify->require_subcommand(1);
    auto* v1 = verify->add_subcommand("theorem1", "Averaging upper bound on lifted members");
    v1->add_option("--n", n)->required();
    v1->add_option("--k", k)->required();
    v1->add_option("--trials", t1_trials)->capture_default_str();
    auto* v2 = verify->add_subcommand("theorem2", "lambda_1 sparsification bound");
    v2->add_option("--n", n)->required();
    v2->add_option("--k", k)->required();
    v2->add_option("--trials", t2_trials)->capture_default_str();
    v2->add_option("--members", t2_members)->capture_default_str();
    auto* v3 = verify->add_subcommand("theorem3", "gab_extremal lower bound equality");
    auto* v3n = v3->add_option("--n", n);
    auto* v3k = v3->add_option("--k", k);
    auto* v3max = v3->add_option("--n-max", n_max, "Grid 4 <= n <= N, 2 <= k < n");
    v3n->needs(v3k);
    v3k->needs(v3n);
    v3max->excludes(v3n)->excludes(v3k);
    auto* v4 = verify->add_subcommand("theorem4", "RIP lower-bound construction");
    v4->add_option("--n", n)->required();
    v4->add_option("--k", k)->required();
    v4->add_option("--attempts", attempts)->capture_default_str();
    auto* v5 = verify->add_subcommand("theorem5", "Sampled averaging");
    v5->add_option("--n", n)->required();
    v5->add_option("--k", k)->required();
    v5->add_option("--epsilon", epsilon)->required();
    v5->add_option("--delta", delta)->required();
    v5->add_option("--repetitions", repetitions)->capture_default_str();
    v5->add_option("--members", t5_members)->capture_default_str();
    auto* vs = verify->add_subcommand("sparsifier", "Sparsifier lemma frequencies");
    vs->add_option("--n", n)->required();
    vs->add_option("--k", k)->required();
    vs->add_option("--trials", sp_trials)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    std::ofstream file_out;
    if (!out_path.empty()) {
        file_out.open(out_path);
        if (!file_out) {
            err << "kpsd: cannot open output file '" << out_path << "'\n";
            return exit_usage;
        }
    }
    std::ostream& os = out_path.empty() ? out : file_out;

    try {
        if (construct->parsed()) {
            if (c_gab->parsed())
                write_matrix(os, gab_matrix({a, b, n}));
            else if (c_ext->parsed())
                write_matrix(os, gab_extremal(n, k));
            else {
                RipSpec spec = RipSpec::standard(n, k, seed);
                if (m != 0) spec.m = m;
                spec.delta = delta;
                write_matrix(os, rip_member_matrix(spec));
            }
            return exit_ok;
        }

        if (dist->parsed()) {
            const auto report = dist_to_psd(detail::load_matrix(file));
            os << "distance " << format_real(report.distance) << '\n';
            os << "negative_count " << report.negative_count << '\n';
            detail::write_vector(os, "negative_eigenvalues", report.negative_eigenvalues);
            return exit_ok;
        }

        if (member->parsed()) {
            const SymMatrix mat = detail::load_matrix(file);
            const auto verdict = sample ? member_sampled(mat, k, *sample, seed, tol)
                                        : member_exact(mat, k, tol);
            os << "member " << (verdict.member ? "true" : "false") << '\n';
            os << "mode " << to_string(verdict.mode) << '\n';
            os << "sets_checked " << verdict.sets_checked << '\n';
            if (!verdict.member) {
                os << "worst_set";
                for (auto i : verdict.worst_set->indices) os << ' ' << i + 1;
                os << '\n';
                os << "worst_eigenvalue " << format_real(verdict.worst_eigenvalue) << '\n';
                os << "witness_value " << format_real(verdict.witness_value) << '\n';
                detail::write_vector(os, "certificate", *verdict.certificate);
            }
            return exit_ok;
        }

        if (average->parsed()) {
            const SymMatrix mat = detail::load_matrix(file);
            const double formula = averaging_ratio(mat.size(), k) * frobenius_norm(mat);
            AveragingWitness w;
            if (!design_name.empty()) {
                const Design d = design_by_name(design_name);
                if (d.k != k)
                    throw PreconditionError("design '" + design_name + "' has block size "
                                            + std::to_string(d.k) + ", not --k");
                w = design_average(mat, d);
                os << "method design\n";
                os << "design " << design_name << '\n';
            } else if (sample) {
                const KSetSample s = sample_ksets(mat.size(), k, *sample, seed);
                w = upper_bound_certificate(mat, k, s);
                os << "method sample\n";
                os << "m " << s.m() << '\n';
                os << "epsilon_achieved " << format_real(fraction_stats(s).epsilon_achieved) << '\n';
            } else {
                w = upper_bound_certificate(mat, k);
                os << "method full\n";
            }
            os << "alpha " << format_real(w.alpha) << '\n';
            os << "bound " << format_real(w.bound) << '\n';
            os << "formula " << format_real(formula) << '\n';
            if (!witness_path.empty()) {
                std::ofstream wout(witness_path);
                if (!wout) throw ParseError("cannot open witness file '" + witness_path + "'");
                write_matrix(wout, w.witness);
            }
            return exit_ok;
        }

        if (designs->parsed()) {
            if (d_list->parsed()) {
                os << "name n k b r lambda\n";
                os << "fano 7 3 7 3 1\n";
                for (std::size_t q = 2; q <= 31; ++q) {
                    if (!is_prime(q)) continue;
                    const std::size_t pts = q * q + q + 1;
                    os << "pg" << q << ' ' << pts << ' ' << q + 1 << ' ' << pts << ' ' << q + 1
                       << " 1\n";
                }
                os << "complete-<n>-<k> n k C(n,k) C(n-1,k-1) C(n-2,k-2)\n";
            } else {
                write_design(os, design_by_name(emit_name));
            }
            return exit_ok;
        }

        std::vector<VerifyRow> rows;
        if (v1->parsed()) {
            rows = verify_theorem1(n, k, t1_trials, seed, tol);
        } else if (v2->parsed()) {
            rows = verify_theorem2(n, k, seed, t2_trials, t2_members, tol);
        } else if (v3->parsed()) {
            std::vector<std::pair<std::size_t, std::size_t>> grid;
            if (n_max != 0) {
                for (std::size_t nn = 4; nn <= n_max; ++nn)
                    for (std::size_t kk = 2; kk < nn; ++kk) grid.emplace_back(nn, kk);
            } else if (n != 0) {
                grid.emplace_back(n, k);
            } else {
                throw PreconditionError("verify theorem3: give --n and --k, or --n-max");
            }
            rows = verify_theorem3(grid, tol, seed);
        } else if (v4->parsed()) {
            rows = verify_theorem4(n, k, attempts, seed, tol);
        } else if (v5->parsed()) {
            rows = verify_theorem5(n, k, epsilon, delta, repetitions, seed, t5_members, tol);
        } else {
            rows = verify_sparsifier(n, k, sp_trials, seed);
        }
        write_csv(os, rows);
        return all_hard_satisfied(rows) ? exit_ok : exit_failed;
    } catch (const ConvergenceError& e) {
        err << "kpsd: " << e.what() << '\n';
        return exit_failed;
    } catch (const Error& e) {
        err << "kpsd: " << e.what() << '\n';
        return exit_usage;
    }
}

} // namespace kpsd::cli
