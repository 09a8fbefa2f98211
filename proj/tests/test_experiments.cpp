#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "test_support.hpp"

using namespace kpsd;

namespace {

std::string csv(const std::vector<VerifyRow>& rows)
{
    std::ostringstream os;
    write_csv(os, rows);
    return os.str();
}

std::vector<VerifyRow> named(const std::vector<VerifyRow>& rows, const std::string& theorem)
{
    std::vector<VerifyRow> out;
    for (const auto& r : rows)
        if (r.theorem == theorem) out.push_back(r);
    return out;
}

std::map<std::string, std::string> extra_fields(const std::string& extra)
{
    std::map<std::string, std::string> out;
    std::stringstream ss(extra);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const auto eq = item.find('=');
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

} // namespace

TEST(Compare, Directions)
{
    EXPECT_TRUE(compare(1.0, 1.0, Direction::le, 0.0));
    EXPECT_TRUE(compare(1.0 + 1e-10, 1.0, Direction::le, 1e-9));
    EXPECT_FALSE(compare(1.1, 1.0, Direction::le, 1e-9));
    EXPECT_TRUE(compare(1.0 - 1e-10, 1.0, Direction::ge, 1e-9));
    EXPECT_FALSE(compare(0.9, 1.0, Direction::ge, 1e-9));
    EXPECT_FALSE(compare(1.0, 1.0, Direction::gt, 0.5));
    EXPECT_TRUE(compare(1.5, 1.0, Direction::gt, 0.0));
    EXPECT_TRUE(compare(1.0, 1.0 + 1e-13, Direction::eq, 1e-12));
    EXPECT_FALSE(compare(1.0, 1.1, Direction::eq, 1e-12));
    EXPECT_FALSE(compare(std::nan(""), 1.0, Direction::le, 1.0));
}

TEST(Rows, ExtraAndCsvFormat)
{
    const auto row = make_row("thm1", 4, 2, 7, 0.5, 0.5, Direction::le, 1e-9, true, "trial=0");
    EXPECT_TRUE(row.satisfied);
    EXPECT_EQ(row.extra(), "dir=le;tol=1.0000000000000001e-09;hard=1;trial=0");
    const auto soft = make_row("x", 4, 2, 7, 2.0, 1.0, Direction::le, 0.0, false);
    EXPECT_FALSE(soft.satisfied);
    EXPECT_EQ(soft.extra(), "dir=le;tol=0;hard=0");
    EXPECT_TRUE(all_hard_satisfied({row, soft}));
    auto bad = soft;
    bad.hard = true;
    EXPECT_FALSE(all_hard_satisfied({row, bad}));

    EXPECT_EQ(csv({row}), "theorem,n,k,seed,quantity,bound,satisfied,extra\n"
                          "thm1,4,2,7,0.5,0.5,true,dir=le;tol=1.0000000000000001e-09;hard=1;trial=0\n");
}

TEST(Theorem1, SmallRunHoldsEverywhere)
{
    const auto rows = verify_theorem1(6, 3, 50, 11);
    EXPECT_EQ(rows.size(), 4u * 50u + 1u);
    EXPECT_TRUE(all_hard_satisfied(rows));
    for (const auto& r : named(rows, "thm1")) {
        EXPECT_TRUE(r.hard);
        EXPECT_TRUE(r.satisfied);
        EXPECT_DOUBLE_EQ(r.bound, 3.0 / 7.0);
    }
}

TEST(Theorem1, TightAtFourTwo)
{
    const auto rows = verify_theorem1(4, 2, 3, 0);
    const auto& last = rows.back();
    EXPECT_EQ(last.notes, "member=gab_extremal");
    EXPECT_NEAR(last.quantity, 0.5, 1e-9);
    EXPECT_DOUBLE_EQ(last.bound, 0.5);
    EXPECT_TRUE(last.satisfied);
}

TEST(Theorem1, NearlyFullOrder)
{
    for (std::size_t n : {5u, 8u, 11u}) {
        const auto rows = verify_theorem1(n, n - 1, 5, 3);
        EXPECT_TRUE(all_hard_satisfied(rows));
        EXPECT_DOUBLE_EQ(rows.front().bound, 1.0 / (2.0 * n - 3.0));
    }
    EXPECT_THROW(verify_theorem1(5, 5, 1, 0), PreconditionError);
}

TEST(Theorem2, GabRowsAtModerateSize)
{
    const auto rows = verify_theorem2(100, 75, 5, 64, 1);
    EXPECT_TRUE(all_hard_satisfied(rows));
    const auto lam = named(rows, "thm2_lambda1");
    ASSERT_GE(lam.size(), 2u);
    EXPECT_DOUBLE_EQ(lam[0].bound, 96.0 * 25.0 / 1000.0);
    EXPECT_NEAR(lam[0].quantity, lam[1].quantity, 1e-10);
    const auto dist = named(rows, "thm2_dist");
    ASSERT_FALSE(dist.empty());
    // 96 (1/4)^{3/2} = 12 is vacuous for unit-norm matrices
    EXPECT_FALSE(dist[0].hard);
    EXPECT_NE(dist[0].extra().find("vacuous=1"), std::string::npos);
    EXPECT_EQ(rows.back().theorem, "thm2_vs_thm1");
    EXPECT_FALSE(rows.back().hard);
}

TEST(Theorem2, NonVacuousRegimeIsHard)
{
    const auto rows = verify_theorem2(1000, 960, 0);
    const auto dist = named(rows, "thm2_dist");
    ASSERT_EQ(dist.size(), 1u);
    EXPECT_TRUE(dist[0].hard);
    EXPECT_NEAR(dist[0].bound, 0.768, 1e-12);
    EXPECT_TRUE(dist[0].satisfied);
    EXPECT_TRUE(all_hard_satisfied(rows));
}

TEST(Theorem2, Preconditions)
{
    EXPECT_THROW(verify_theorem2(50, 40, 0), PreconditionError);
    EXPECT_THROW(verify_theorem2(100, 60, 0), PreconditionError);
    EXPECT_THROW(verify_theorem2(100, 100, 0), PreconditionError);
}

TEST(Theorem3, SinglePairGivesOneRow)
{
    const auto rows = verify_theorem3({{10, 9}});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].satisfied);
    EXPECT_EQ(rows[0].direction, Direction::eq);
    const auto f = extra_fields(rows[0].extra());
    EXPECT_EQ(f.at("membership"), "exact");
    EXPECT_EQ(f.at("member"), "1");
}

TEST(Theorem3, SmallKAddsReportRow)
{
    const auto rows = verify_theorem3({{100, 5}});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[0].satisfied);
    EXPECT_EQ(extra_fields(rows[0].extra()).at("membership"), "screened");
    EXPECT_EQ(rows[1].theorem, "table1_small_k");
    EXPECT_FALSE(rows[1].hard);
    EXPECT_DOUBLE_EQ(rows[1].bound, 0.95 / std::sqrt(2.0));
}

TEST(Theorem3, ClosedFormAboveThreeHundred)
{
    const auto rows = verify_theorem3({{301, 20}});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(extra_fields(rows[0].extra()).at("source"), "closed");
    EXPECT_TRUE(rows[0].satisfied);
}

TEST(Theorem4, DeskScaleRunSucceeds)
{
    const auto run = verify_theorem4_run(200, 2, 3, 1);
    ASSERT_TRUE(run.success);
    EXPECT_TRUE(all_hard_satisfied(run.rows));
    EXPECT_GE(run.raw_distance, std::sqrt(14.0) * 0.1 - 1e-9);
    EXPECT_GE(run.normalized_distance, 0.012311 - 1e-9);
    EXPECT_EQ(named(run.rows, "thm4").size(), 1u);
    EXPECT_EQ(named(run.rows, "rip1").size(), 1u);
    EXPECT_THROW(verify_theorem4_run(186, 2, 3, 1), PreconditionError);
}

TEST(Theorem5, SmallRun)
{
    const auto rows = verify_theorem5(20, 10, 0.5, 0.2, 3, 9, 4);
    EXPECT_TRUE(all_hard_satisfied(rows));
    const auto fr = named(rows, "thm5_fractions");
    ASSERT_EQ(fr.size(), 3u);
    EXPECT_EQ(extra_fields(fr[0].extra()).at("m"), "2875");
    const auto freq = named(rows, "thm5_frequency");
    ASSERT_EQ(freq.size(), 1u);
    EXPECT_TRUE(freq[0].satisfied);
    EXPECT_EQ(named(rows, "thm5").size(), 4u * static_cast<std::size_t>(std::lround(freq[0].quantity * 3)));
}

TEST(Sparsifier, TestMatrixSpectrum)
{
    const auto t = sparsifier_test_matrix(100, 2);
    EXPECT_NEAR(frobenius_norm(t.matrix), 1.0, 1e-12);
    EXPECT_NEAR(t.eig.min_value(), -0.1, 1e-12);
    EXPECT_EQ(dist_to_psd(t.matrix).negative_count, 1u);
}

TEST(Sparsifier, FrequenciesAtModerateTrials)
{
    const auto rows = verify_sparsifier(100, 75, 2000, 4);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_TRUE(all_hard_satisfied(rows));
    EXPECT_EQ(rows[3].direction, Direction::gt);
}

TEST(Determinism, SameSeedSameCsv)
{
    EXPECT_EQ(csv(verify_theorem1(7, 3, 5, 42)), csv(verify_theorem1(7, 3, 5, 42)));
    EXPECT_NE(csv(verify_theorem1(7, 3, 5, 42)), csv(verify_theorem1(7, 3, 5, 43)));
    EXPECT_EQ(csv(verify_theorem5(12, 5, 0.5, 0.2, 2, 8, 2)), csv(verify_theorem5(12, 5, 0.5, 0.2, 2, 8, 2)));
    EXPECT_EQ(csv(verify_sparsifier(100, 80, 50, 1)), csv(verify_sparsifier(100, 80, 50, 1)));
}

// the satisfied column follows from quantity, bound, dir and tol in the CSV
TEST(Csv, SatisfiedIsRecomputable)
{
    auto rows = verify_theorem1(6, 3, 4, 2);
    const auto t5 = verify_theorem5(12, 5, 0.5, 0.2, 2, 8, 2);
    rows.insert(rows.end(), t5.begin(), t5.end());
    std::istringstream in(csv(rows));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, csv_header);
    std::size_t count = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        for (int c = 0; c < 7 && std::getline(ss, cell, ','); ++c) cells.push_back(cell);
        std::getline(ss, cell);
        ASSERT_EQ(cells.size(), 7u);
        const auto f = extra_fields(cell);
        const std::map<std::string, Direction> dirs{
            {"le", Direction::le}, {"ge", Direction::ge}, {"gt", Direction::gt}, {"eq", Direction::eq}};
        const bool expect = compare(std::stod(cells[4]), std::stod(cells[5]), dirs.at(f.at("dir")),
                                    std::stod(f.at("tol")));
        EXPECT_EQ(cells[6], expect ? "true" : "false") << line;
        ++count;
    }
    EXPECT_EQ(count, rows.size());
}
