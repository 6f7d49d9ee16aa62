#include "neveu/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace neveu;

TEST(Quadrature, PolynomialIsExact) {
    auto r = quad::integrate([](double x) { return x * x * x - 2 * x; }, 0.0, 2.0);
    EXPECT_NEAR(r.value, 0.0, 1e-14);
}

TEST(Quadrature, SmoothIntegrals) {
    EXPECT_NEAR(quad::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value, 2.0, 1e-12);
    EXPECT_NEAR(quad::integrate([](double x) { return std::exp(-x); }, 0.0, 50.0).value, 1.0 - std::exp(-50.0),
                1e-12);
}

TEST(Quadrature, EndpointSingularityWithBreakpoints) {
    quad::Options opt;
    opt.abs_tol = 1e-12;
    const auto pts = quad::decade_breakpoints(1e-12, 1.0);
    auto r = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, std::span<const double>(pts), opt);
    EXPECT_NEAR(r.value, 2.0 - 2e-6, 1e-10);
}

TEST(Quadrature, NonFiniteIntegrandThrows) {
    EXPECT_THROW(quad::integrate([](double x) { return 1.0 / x; }, 0.0, 1.0), DivergenceError);
}

TEST(Quadrature, PanelExhaustionThrows) {
    quad::Options opt;
    opt.abs_tol = 1e-15;
    opt.max_panels = 4;
    EXPECT_THROW(quad::integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, opt),
                 QuadratureError);
}

TEST(Quadrature, RejectsBadBreakpoints) {
    const std::array<double, 3> pts{0.0, 2.0, 1.0};
    EXPECT_THROW(quad::integrate([](double) { return 1.0; }, std::span<const double>(pts)), InvalidArgument);
}

TEST(Quadrature, DecadeBreakpoints) {
    const auto pts = quad::decade_breakpoints(0.5, 2000.0, {3.0});
    const std::vector<double> want{0.5, 1.0, 3.0, 10.0, 100.0, 1000.0, 2000.0};
    ASSERT_EQ(pts.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(pts[i], want[i]);
}
