#include "neveu/error.hpp"
#include "neveu/harness.hpp"
#include "neveu/stats.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace neveu;

TEST(Wilson, ReferenceValues) {
    struct Case { std::uint64_t k, n; double lo, hi; };
    // Reference values from an independent implementation.
    const Case cases[] = {
        {0, 100, 0.0, 0.036993498206985692},
        {5, 100, 0.021543679154367966, 0.11175046923191914},
        {50, 100, 0.40383153036599562, 0.59616846963400438},
        {100, 100, 0.96300650179301428, 1.0},
        {858, 2000, 0.40746547328747529, 0.45080674742646254},
    };
    for (const auto& c : cases) {
        const auto w = wilson_interval(c.k, c.n);
        EXPECT_NEAR(w.lo, c.lo, 1e-14) << c.k << "/" << c.n;
        EXPECT_NEAR(w.hi, c.hi, 1e-14) << c.k << "/" << c.n;
    }
    EXPECT_THROW(wilson_interval(3, 2), InvalidArgument);
    const auto empty = wilson_interval(0, 0);
    EXPECT_EQ(empty.lo, 0.0);
    EXPECT_EQ(empty.hi, 1.0);
}

TEST(Harness, ForcedPassageHasProbabilityOne) {
    const ModelParams p(1, 1);
    const auto e = estimate_passage(p, SimScheme::defaults(p), 0.5, 0.5, 2.0, 100, 1);
    EXPECT_EQ(e.p_hat, 1.0);
    EXPECT_EQ(e.k, 100u);
    EXPECT_EQ(e.ci_hi, 1.0);
    EXPECT_NEAR(e.ci_lo, 0.96300650179301428, 1e-14);
    EXPECT_THROW(estimate_passage(p, SimScheme::defaults(p), 1.0, 0.5, 2.0, 99, 1), InvalidArgument);
}

TEST(Harness, Hashes) {
    const ModelParams p(1, 1);
    const auto s = SimScheme::defaults(p);
    const auto h = config_hash(p, s, 1, 0.5, 2, 7);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(h, config_hash(p, s, 1, 0.5, 2, 7));
    EXPECT_NE(h, config_hash(p, s, 1, 0.5, 2, 8));
    EXPECT_EQ(setting_hash(p, 1, 0.5, 2), setting_hash(p, 1, 0.5, 2));
    EXPECT_NE(setting_hash(p, 1, 0.5, 2), setting_hash(ModelParams(1, 1, 2), 1, 0.5, 2));
}

namespace {
PassageEstimate fake(std::uint64_t k, std::uint64_t n) {
    const ModelParams p(1, 1);
    BatchCounts c;
    c.n = n;
    c.by_reason[static_cast<int>(ExitReason::hit_lower)] = k;
    c.by_reason[static_cast<int>(ExitReason::timeout)] = n - k;
    return make_estimate(p, SimScheme::defaults(p), 1.0, 0.5, 2.0, 1, PassageDirection::down, c);
}
} // namespace

TEST(Harness, CompareBounds) {
    const auto e = fake(50, 100);
    const auto& h = e.setting_hash;
    EXPECT_TRUE(compare_bounds({{"zero", e, 0.0, h}}).all_pass);
    EXPECT_TRUE(compare_bounds({{"inside", e, 0.55, h}}).all_pass);
    const auto fail = compare_bounds({{"above", e, 0.7, h}});
    EXPECT_FALSE(fail.all_pass);
    EXPECT_LT(fail.rows[0].slack, 0.0);
    EXPECT_THROW(compare_bounds({{"other", e, 0.1, "0000000000000000"}}), Error);
}

TEST(Harness, Verdicts) {
    const auto none = fake(0, 200), most = fake(190, 200), some = fake(10, 200);
    EXPECT_EQ(axis_verdict(false, none, 0.05), Verdict::consistent);
    EXPECT_EQ(axis_verdict(true, none, 0.05), Verdict::inconsistent);
    EXPECT_EQ(axis_verdict(true, most, 0.05), Verdict::consistent);
    EXPECT_EQ(axis_verdict(true, some, 0.05), Verdict::inconclusive);
    SweepSettings s;
    EXPECT_EQ(comedown_verdict(true, most, most, s), Verdict::consistent);
    EXPECT_EQ(comedown_verdict(false, most, most, s), Verdict::inconsistent);
    EXPECT_EQ(comedown_verdict(false, none, none, s), Verdict::consistent);
    EXPECT_EQ(combine(Verdict::consistent, Verdict::inconclusive, Verdict::consistent), Verdict::inconclusive);
    EXPECT_EQ(combine(Verdict::inconsistent, Verdict::inconclusive, Verdict::consistent), Verdict::inconsistent);
}

TEST(Harness, DefaultGrid) {
    const auto g = default_sweep_grid();
    ASSERT_EQ(g.size(), 49u);
    EXPECT_EQ(g.front(), std::make_pair(0.0, 0.0));
    EXPECT_EQ(g[1], std::make_pair(0.0, 0.5));
    EXPECT_EQ(g.back(), std::make_pair(3.0, 3.0));
}

TEST(Harness, ReadGridFile) {
    const auto path = std::filesystem::temp_directory_path() / "neveu_grid_test.csv";
    {
        std::ofstream f(path);
        f << "beta,theta\n# comment\n0.5,1\n2 0.5\n\n";
    }
    const auto g = read_grid_file(path.string());
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0], std::make_pair(0.5, 1.0));
    EXPECT_EQ(g[1], std::make_pair(2.0, 0.5));
    std::filesystem::remove(path);
    EXPECT_THROW(read_grid_file(path.string()), Error);
}

TEST(Harness, SweepIsReproducibleAndPredictsClassify) {
    const std::vector<std::pair<double, double>> grid{{0.5, 0.0}, {1.5, 0.5}};
    SimScheme s = SimScheme::defaults(ModelParams(1, 1));
    s.t_max = 1.0;
    s.dt_max = 1e-2;
    s.x_max = 1e50;
    const auto a = sweep_phase_diagram(grid, s, 100, 9, {}, 1);
    const auto b = sweep_phase_diagram(grid, s, 100, 9, {}, 2);
    ASSERT_EQ(a.size(), 2u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(a[i].error.empty()) << a[i].error;
        EXPECT_EQ(a[i].predicted, classify(ModelParams(grid[i].first, grid[i].second)));
        EXPECT_EQ(to_csv_row(a[i]), to_csv_row(b[i]));
    }
    EXPECT_EQ(sweep_csv_header().find('\n'), std::string::npos);
}

TEST(Harness, BoundCases) {
    for (const char* name : {"down", "up", "extinction", "explosion"}) {
        const auto c = make_bound_case(name);
        EXPECT_GT(c.bound, 0.0) << name;
        EXPECT_LT(c.bound, 1.0) << name;
    }
    EXPECT_NEAR(make_bound_case("down").bound, 0.0024425872267747574, 1e-13);
    EXPECT_NEAR(make_bound_case("up").bound, 0.14474928102301249266, 1e-12);
    EXPECT_NEAR(make_bound_case("explosion").bound, 0.09375, 1e-12);
    EXPECT_NEAR(make_bound_case("extinction").bound, 0.5, 1e-14);
    EXPECT_THROW(make_bound_case("nope"), InvalidArgument);
}
