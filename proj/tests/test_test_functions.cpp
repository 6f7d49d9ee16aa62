#include "neveu/error.hpp"
#include "neveu/test_functions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace neveu;

namespace {

std::vector<TestFunction> catalog_samples() {
    return {exp_neg(0.5),        exp_neg(12.0),         exp_capped(2.0),   exp_capped(0.5),
            power_gap(0.1, 0.25), power_gap(2.0, 0.75), one_minus_inv_pow(1.0), one_minus_inv_pow(0.3),
            inv_pow(0.5),        inv_pow(2.0),          loglog_zero(1),    loglog_zero(4),
            loglog_inf(1),       loglog_inf(3)};
}

} // namespace

TEST(TestFunctions, DerivativeSelfCheckAcrossCatalog) {
    for (const auto& f : catalog_samples()) EXPECT_LT(derivative_selfcheck(f), 1e-6) << f.tag;
}

// Value, slope and curvature agree across every seam.
TEST(TestFunctions, PatchesAreC2AtSeams) {
    for (const auto& f : catalog_samples())
        for (double s : f.seams) {
            const double h = 1e-9 * s;
            EXPECT_NEAR(f(s - h), f(s + h), 1e-7 * (1 + std::abs(f(s)))) << f.tag;
            EXPECT_NEAR(f.d1(s - h), f.d1(s + h), 1e-6 * (1 + std::abs(f.d1(s)))) << f.tag;
            EXPECT_NEAR(f.d2(s - h), f.d2(s + h), 1e-6 * (1 + std::abs(f.d2(s)))) << f.tag;
        }
}

TEST(TestFunctions, PatchedFunctionsStayPositive) {
    for (const auto& f : {exp_capped(2.0), loglog_zero(1), loglog_zero(2), loglog_zero(5), loglog_inf(1),
                          loglog_inf(4)}) {
        const double lo = f.patch_domain.lo, hi = f.patch_domain.hi;
        for (int i = 0; i <= 200; ++i) EXPECT_GT(f(lo + (hi - lo) * i / 200.0), 0.0) << f.tag;
        EXPECT_GT(f(1e9), 0.0) << f.tag;
    }
}

TEST(TestFunctions, ClosedForms) {
    EXPECT_DOUBLE_EQ(exp_neg(2.0)(0.5), std::exp(-1.0));
    EXPECT_DOUBLE_EQ(exp_capped(2.0)(1.5), std::exp(1.5));
    EXPECT_NEAR(power_gap(16.0, 0.25)(1.0), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(one_minus_inv_pow(1.0)(4.0), 0.75);
    EXPECT_DOUBLE_EQ(inv_pow(2.0)(2.0), 0.25);
    EXPECT_DOUBLE_EQ(loglog_zero(1)(1.0), std::log(std::log(6.0)));
    EXPECT_DOUBLE_EQ(loglog_inf(1)(1.0), std::log(std::log(6.0)));
}

TEST(TestFunctions, CappedFunctionsAreConstantBeyondPatch) {
    const auto f = exp_capped(2.0);
    EXPECT_DOUBLE_EQ(f(10.0), f(1e6));
    EXPECT_DOUBLE_EQ(f.d1(10.0), 0.0);
    EXPECT_NEAR(*f.limit_at_infinity, std::exp(3.0) * 19.0 / 12.0, 1e-12);
}

TEST(TestFunctions, MakeFromTag) {
    const auto f = make_test_function("power_gap:c=0.5,rho=0.25");
    EXPECT_DOUBLE_EQ(f(0.5), 0.0);
    EXPECT_EQ(make_test_function("loglog_zero:n=3").tag, "loglog_zero:n=3");
    EXPECT_DOUBLE_EQ(make_test_function(exp_neg(1.5).tag)(1.0), std::exp(-1.5));
    EXPECT_THROW(make_test_function("nope:x=1"), InvalidArgument);
    EXPECT_THROW(make_test_function("exp_neg"), InvalidArgument);
    EXPECT_THROW(make_test_function("exp_neg:lambda=abc"), InvalidArgument);
    EXPECT_THROW(make_test_function("loglog_inf:n=0"), InvalidArgument);
    EXPECT_EQ(catalog_names().size(), 7u);
}

TEST(TestFunctions, Regularity) {
    EXPECT_TRUE(check_regularity(exp_neg(1.0), 0.25, 0.5).bounded);
    EXPECT_TRUE(check_regularity(exp_capped(2.0), 0.5, 0.5).bounded);
    // Increments of u^0.75 grow faster than z^0.5.
    EXPECT_FALSE(check_regularity(power_gap(1.0, 0.75), 1.0, 0.5).bounded);
    const auto grow = TestFunction::from_triple(
        "exp", [](double u) { return std::exp(u); }, [](double u) { return std::exp(u); },
        [](double u) { return std::exp(u); });
    EXPECT_FALSE(check_regularity(grow, 1.0, 0.5).bounded);
}

TEST(TestFunctions, SampledSup) {
    EXPECT_NEAR(*sampled_sup(exp_capped(2.0), 0.5, 2.0), std::exp(2.0), 1e-12);
    EXPECT_NEAR(*sampled_sup(one_minus_inv_pow(1.0), 8.0, INFINITY), 1.0, 1e-15);
    EXPECT_FALSE(sampled_sup(loglog_inf(1), 1.0, INFINITY).has_value());
}
