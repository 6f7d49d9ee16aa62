#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval split
// at caller-supplied breakpoints. The panel with the largest error estimate is
// bisected until the summed estimate meets the tolerance.

#include "neveu/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

namespace neveu::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_panels = 4000;
};

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    int panels = 0;
};

namespace detail {

// QUADPACK qk15 abscissae and weights.
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo, hi, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double lo, double hi, int& evals) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double result_k = fc * kronrod_weights[7];
    double result_g = fc * gauss_weights[3];
    double result_abs = std::abs(result_k);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double sum = f1[j] + f2[j];
        result_k += kronrod_weights[j] * sum;
        result_abs += kronrod_weights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) result_g += gauss_weights[j / 2] * sum;
    }
    evals += 15;
    const double mean = 0.5 * result_k;
    double result_asc = kronrod_weights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        result_asc += kronrod_weights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double abs_half = std::abs(half);
    double err = std::abs((result_k - result_g) * half);
    result_asc *= abs_half;
    result_abs *= abs_half;
    if (result_asc != 0.0 && err != 0.0)
        err = result_asc * std::min(1.0, std::pow(200.0 * err / result_asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (result_abs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * result_abs, err);
    return {lo, hi, result_k * half, err};
}

} // namespace detail

/// Integrates f over [points.front(), points.back()], with the interior
/// points used as initial panel boundaries. Points must be strictly increasing
/// and finite. Throws QuadratureError when max_panels is exhausted and
/// DivergenceError when the integrand returns a non-finite value.
template <class F>
Result integrate(F&& f, std::span<const double> points, const Options& opt = {}) {
    if (points.size() < 2) throw InvalidArgument("integrate: need at least two points");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i] > points[i - 1]) || !std::isfinite(points[i]))
            throw InvalidArgument("integrate: breakpoints must be finite and strictly increasing");
    }

    Result res;
    std::priority_queue<detail::Panel> heap;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        auto p = detail::gk15(f, points[i - 1], points[i], res.evaluations);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }

    auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
    auto check_finite = [&] {
        if (!std::isfinite(total) || !std::isfinite(total_err))
            throw DivergenceError("integrand", "integrate: integrand is not finite on the domain");
    };
    check_finite();

    while (total_err > tolerance()) {
        if (static_cast<int>(heap.size()) >= opt.max_panels) {
            std::ostringstream os;
            os << "integrate: tolerance " << tolerance() << " not reached after "
               << heap.size() << " panels (achieved " << total_err << ")";
            throw QuadratureError(os.str(), total_err);
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            // Panel can no longer be split in double precision.
            std::ostringstream os;
            os << "integrate: panel [" << worst.lo << ", " << worst.hi
               << "] underflowed with error " << total_err;
            throw QuadratureError(os.str(), total_err);
        }
        auto left = detail::gk15(f, worst.lo, mid, res.evaluations);
        auto right = detail::gk15(f, mid, worst.hi, res.evaluations);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        check_finite();
    }

    // Re-sum to shed the drift accumulated by incremental updates.
    double value = 0.0, err = 0.0;
    res.panels = static_cast<int>(heap.size());
    while (!heap.empty()) {
        value += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    res.value = value;
    res.abs_error = err;
    return res;
}

template <class F>
Result integrate(F&& f, double lo, double hi, const Options& opt = {}) {
    const std::array<double, 2> pts{lo, hi};
    return integrate(std::forward<F>(f), std::span<const double>(pts), opt);
}

/// Log-spaced breakpoints covering [lo, hi] with at most one point per decade
/// in between, plus any `extra` points that fall strictly inside.
inline std::vector<double> decade_breakpoints(double lo, double hi,
                                              std::initializer_list<double> extra = {}) {
    std::vector<double> pts{lo, hi};
    if (lo > 0.0) {
        for (double p = std::pow(10.0, std::ceil(std::log10(lo))); p < hi; p *= 10.0)
            pts.push_back(p);
    }
    for (double e : extra) pts.push_back(e);
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double p : pts) {
        if (p < lo || p > hi || !std::isfinite(p)) continue;
        if (!out.empty() && p <= out.back() + 1e-12 * std::abs(out.back())) continue;
        out.push_back(p);
    }
    if (out.back() != hi) out.back() = hi;
    return out;
}

} // namespace neveu::quad
