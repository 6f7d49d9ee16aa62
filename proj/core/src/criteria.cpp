#include "neveu/criteria.hpp"

#include "neveu/error.hpp"
#include "neveu/generator.hpp"
#include "neveu/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace neveu {

BoundaryClassification classify(const ModelParams& params) noexcept {
    const double beta = params.beta();
    const double theta = params.theta();
    BoundaryClassification c;
    c.extinct = beta < 1.0;
    c.explodes = !(beta > theta + 1.0 || theta <= 1.0);
    c.comes_down = beta > std::max(theta + 1.0, 2.0);
    return c;
}

const char* to_string(Direction d) noexcept { return d == Direction::L_le_dg ? "L_le_dg" : "L_ge_dg"; }

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

// Extremum of Lg/g over every `stride`-th point. Points with g == 0 carry no
// ratio and are skipped.
struct Extremum {
    double ratio;
    std::size_t index;
};

Extremum extremal_ratio(const std::vector<double>& ratio, const std::vector<bool>& has_ratio, Direction dir,
                        std::size_t stride) {
    Extremum e{dir == Direction::L_le_dg ? -INFINITY : INFINITY, 0};
    for (std::size_t i = 0; i < ratio.size(); i += stride) {
        if (!has_ratio[i]) continue;
        const bool better = dir == Direction::L_le_dg ? ratio[i] > e.ratio : ratio[i] < e.ratio;
        if (better) e = {ratio[i], i};
    }
    return e;
}

} // namespace

CertifyResult certify(const TestFunction& f, Interval interval, Direction direction, const ModelParams& params,
                      const GridSpec& grid) {
    if (!(interval.hi > interval.lo) || interval.lo < 0.0)
        throw InvalidArgument("certify: interval must satisfy 0 <= lo < hi");
    if (grid.points < 8 || grid.refinements < 1)
        throw InvalidArgument("certify: need >= 8 points and at least one refinement");

    BoundCertificate cert;
    cert.function_tag = f.tag;
    cert.interval = interval;
    cert.direction = direction;
    cert.grid_spec = grid;
    cert.regularity_delta = f.regularity_delta;
    cert.beta = params.beta();
    cert.theta = params.theta();
    cert.r = params.r();

    Interval checked = interval;
    if (checked.lo <= 0.0) {
        checked.lo = grid.trunc_lo;
        cert.lo_truncated = true;
    }
    if (std::isinf(checked.hi)) {
        checked.hi = std::max(grid.trunc_hi, checked.lo * 1e4);
        cert.hi_truncated = true;
    }
    if (!(checked.hi > checked.lo)) throw InvalidArgument("certify: truncated interval is empty");
    cert.checked = checked;

    const std::size_t stride = std::size_t{1} << grid.refinements;
    const int n = (grid.points - 1) * static_cast<int>(stride) + 1;
    const auto us = log_grid(checked.lo, checked.hi, n);
    cert.grid_points = n;

    std::vector<GeneratorEvaluation> lg;
    try {
        lg = eval_generator_grid(f, us, params, Tolerance{0.0, grid.rel_tol}, grid.threads);
    } catch (const DivergenceError& e) {
        return Refusal{std::string("generator divergence: ") + e.what(), 0.0, 0.0};
    }

    std::vector<double> ratio(us.size(), 0.0);
    std::vector<bool> has_ratio(us.size(), false);
    for (std::size_t i = 0; i < us.size(); ++i) {
        const double g = f.eval(us[i]);
        const double l = lg[i].total;
        if (g < 0.0 || !std::isfinite(g)) return Refusal{"g is not positive on the interval", us[i], g};
        if (g == 0.0) {
            const bool ok = direction == Direction::L_le_dg ? l <= 0.0 : l >= 0.0;
            if (!ok) return Refusal{"sign of Lg violates the bound where g = 0", us[i], l};
            continue;
        }
        ratio[i] = l / g;
        has_ratio[i] = true;
    }

    const auto fine = extremal_ratio(ratio, has_ratio, direction, 1);
    const auto coarse = extremal_ratio(ratio, has_ratio, direction, stride);
    if (!std::isfinite(fine.ratio)) return Refusal{"no finite ratio Lg/g on the grid", us.front(), fine.ratio};
    cert.extremal_ratio = fine.ratio;
    cert.coarse_extremal_ratio = coarse.ratio;
    cert.extremal_u = us[fine.index];

    const double scale = std::max(std::abs(fine.ratio), 1e-12);
    if (std::abs(fine.ratio - coarse.ratio) > grid.stability * scale)
        return Refusal{"extremal ratio not stable under grid refinement", us[fine.index], fine.ratio};

    // Trend at truncated ends: an extremum in the outermost decade that is
    // still moving the unfavourable way suggests the true sup/inf is not
    // attained on the truncated interval.
    auto unfavourable = [&](double outer, double inner) {
        const double tol = 0.01 * std::max(std::abs(outer), std::abs(inner));
        return direction == Direction::L_le_dg ? outer > inner + tol : outer < inner - tol;
    };
    auto ratio_near = [&](double u) {
        auto it = std::lower_bound(us.begin(), us.end(), u);
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - us.begin()), us.size() - 1);
        while (i + 1 < us.size() && !has_ratio[i]) ++i;
        return std::pair{ratio[i], us[i]};
    };
    if (cert.hi_truncated && cert.extremal_u >= checked.hi / 10.0) {
        const auto [outer, u_out] = ratio_near(checked.hi);
        const auto [inner, u_in] = ratio_near(checked.hi / 10.0);
        if (unfavourable(outer, inner))
            return Refusal{"extremal ratio still moving toward the truncated upper end", u_out, outer};
    }
    if (cert.lo_truncated && cert.extremal_u <= checked.lo * 10.0) {
        const auto [outer, u_out] = ratio_near(checked.lo);
        const auto [inner, u_in] = ratio_near(checked.lo * 10.0);
        if (unfavourable(outer, inner))
            return Refusal{"extremal ratio still moving toward the truncated lower end", u_out, outer};
    }

    if (direction == Direction::L_le_dg) {
        double d = fine.ratio + grid.eps_pad * std::abs(fine.ratio);
        if (d <= 0.0) d = grid.eps_pad;
        cert.d = d;
    } else {
        if (!(fine.ratio > 0.0))
            return Refusal{"Lg/g is not strictly positive on the interval", cert.extremal_u, fine.ratio};
        cert.d = (1.0 - grid.eps_pad) * fine.ratio;
    }

    double margin = INFINITY;
    for (std::size_t i = 0; i < us.size(); ++i) {
        const double dg = cert.d * f.eval(us[i]);
        margin = std::min(margin, direction == Direction::L_le_dg ? dg - lg[i].total : lg[i].total - dg);
    }
    cert.margin = margin;
    return cert;
}

namespace {

void check_cert(const TestFunction& g, const BoundCertificate& cert, double a, double b, bool closed_lo) {
    if (cert.direction != Direction::L_ge_dg)
        throw InvalidArgument("passage bound: certificate must have direction L_ge_dg");
    if (cert.function_tag != g.tag)
        throw InvalidArgument("passage bound: certificate is for " + cert.function_tag + ", not " + g.tag);
    // (a, b] or [a, b) must lie inside the certified interval; a truncated
    // lower end still counts as reaching 0.
    const bool lo_ok = closed_lo ? cert.interval.lo <= a : (cert.interval.lo <= a || (a == 0.0 && cert.lo_truncated));
    if (!lo_ok || cert.interval.hi < b)
        throw InvalidArgument("passage bound: certificate interval does not cover the passage interval");
}

} // namespace

double passage_lower_bound_down(const TestFunction& g, double a, double b, double x, const BoundCertificate& cert) {
    if (!(a >= 0.0 && a < x && x <= b) || std::isinf(b))
        throw InvalidArgument("passage_lower_bound_down: need 0 <= a < x <= b < inf");
    check_cert(g, cert, a, b, false);
    const double ga = g.eval(a);
    if (!(ga > 0.0) || !std::isfinite(ga))
        throw InvalidArgument("passage_lower_bound_down: g(a) must be finite and positive");
    return std::clamp((g.eval(x) - g.eval(b)) / ga, 0.0, 1.0);
}

double passage_lower_bound_up(const TestFunction& g, double a, double b, double x, const BoundCertificate& cert) {
    if (!(a > 0.0 && a <= x && x < b))
        throw InvalidArgument("passage_lower_bound_up: need 0 < a <= x < b <= inf");
    check_cert(g, cert, a, b, true);
    const auto sup = sampled_sup(g, a, b);
    if (!sup) throw InvalidArgument("passage_lower_bound_up: g is unbounded on [a, b)");
    if (!(*sup > 0.0)) throw InvalidArgument("passage_lower_bound_up: sup g must be positive");
    return std::clamp((g.eval(x) - g.eval(a)) / *sup, 0.0, 1.0);
}

double explosion_c(double u, double rho) {
    if (!(u > 0.0) || !(rho > 0.0)) throw InvalidArgument("explosion_c: need u > 0 and rho > 0");
    quad::Options opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-12;
    // [1/u, max(1, 1/u)] directly, then z = 1/t on (0, 1] for the tail.
    auto near = [rho](double z) { return -std::expm1(-rho * std::log1p(z)) / (z * z); };
    auto tail = [rho](double t) { return t <= 0.0 ? 0.0 : -std::expm1(-rho * std::log1p(1.0 / t)); };
    const double lo = 1.0 / u;
    double value = 0.0;
    if (lo < 1.0) {
        const auto pts = quad::decade_breakpoints(lo, 1.0);
        value += quad::integrate(near, std::span<const double>(pts), opt).value;
        value += quad::integrate(tail, 0.0, 1.0, opt).value;
    } else {
        // z >= lo >= 1 maps to t in (0, 1/lo].
        value += quad::integrate(tail, 0.0, 1.0 / lo, opt).value;
    }
    return value;
}

double explosion_threshold_u0(const ModelParams& params) {
    const double theta = params.theta();
    if (!(theta > 1.0) || params.beta() > theta + 1.0)
        throw InvalidArgument("explosion_threshold_u0: requires theta > 1 and beta <= theta + 1");
    const double rho = theta - 1.0;
    const double need = rho * (1.0 + rho);
    for (double u = 2.0; u < 1e300; u *= 2.0)
        if (explosion_c(u, rho) - need > 0.0) return u;
    throw Error("explosion_threshold_u0: no threshold found");
}

double chain_extinction_bound(double x, double c, double rho, double inner) {
    if (!(x >= c) || !(c > 0.0)) throw InvalidArgument("chain_extinction_bound: need x >= c > 0");
    if (!(inner >= 0.0 && inner <= 1.0)) throw InvalidArgument("chain_extinction_bound: inner must lie in [0,1]");
    if (!(rho > 0.0)) throw InvalidArgument("chain_extinction_bound: rho must be > 0");
    return -std::expm1(-rho * std::log(2.0)) * inner;
}

double canonical_lambda0(double a, double b, const ModelParams& params, double target) {
    if (!(a > 0.0 && b > a)) throw InvalidArgument("canonical_lambda0: need 0 < a < b");
    // lambda (1 - e^{-lambda/2}) is increasing; solve it equal to `need`.
    const double need = 2.0 * (target + std::pow(b, params.theta())) / std::pow(a, params.beta());
    auto m = [](double l) { return -l * std::expm1(-l / 2.0); };
    double lo = 0.0, hi = 1.0;
    while (m(hi) < need) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (m(mid) < need ? lo : hi) = mid;
    }
    return hi;
}

double power_gap_c_tilde(double c, double rho, double beta) {
    return rho * (1.0 - rho) * std::pow(2.0, rho - 3.0) * std::pow(c, beta + rho - 1.0) - 1.0 / (1.0 - rho);
}

double canonical_power_gap_c(double rho, double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("canonical_power_gap_c: requires 0 <= beta < 1");
    if (!(rho > 0.0 && rho < 1.0 - beta)) throw InvalidArgument("canonical_power_gap_c: requires 0 < rho < 1 - beta");
    // c_tilde = 0 at c_crit^{beta+rho-1} = 1 / (rho (1-rho)^2 2^{rho-3}).
    const double k = rho * (1.0 - rho) * (1.0 - rho) * std::pow(2.0, rho - 3.0);
    const double c_crit = std::pow(k, 1.0 / (1.0 - beta - rho));
    return 0.5 * c_crit;
}

double loglog_zero_reference_d(int n, const ModelParams& params) {
    const auto g = loglog_zero(n);
    const auto c_n = sampled_sup(g, 1.0, INFINITY);
    if (!c_n) throw Error("loglog_zero_reference_d: patched g_n is unbounded");
    const double nn = n;
    return (std::pow(nn, params.beta() - 1.0) * (1.0 + 1.0 / std::log(3.0)) + std::pow(nn, params.theta()) * *c_n) /
           std::log(std::log(6.0));
}

namespace {

using nlohmann::json;

json bound_value(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return nullptr;
    return x;
}

json grid_json(const GridSpec& g) {
    return {{"points", g.points},       {"refinements", g.refinements}, {"trunc_lo", g.trunc_lo},
            {"trunc_hi", g.trunc_hi},   {"eps_pad", g.eps_pad},         {"stability", g.stability},
            {"rel_tol", g.rel_tol}};
}

} // namespace

std::string to_json(const BoundCertificate& c) {
    json j = {
        {"function_tag", c.function_tag},
        {"interval", {bound_value(c.interval.lo), bound_value(c.interval.hi)}},
        {"checked_interval", {c.checked.lo, c.checked.hi}},
        {"lo_truncated", c.lo_truncated},
        {"hi_truncated", c.hi_truncated},
        {"direction", to_string(c.direction)},
        {"d", c.d},
        {"grid_spec", grid_json(c.grid_spec)},
        {"grid_points", c.grid_points},
        {"margin", c.margin},
        {"extremal_ratio", c.extremal_ratio},
        {"coarse_extremal_ratio", c.coarse_extremal_ratio},
        {"extremal_u", c.extremal_u},
        {"regularity_delta", c.regularity_delta},
        {"params", {{"beta", c.beta}, {"theta", c.theta}, {"r", c.r}}},
    };
    if (c.implied_bound) {
        const auto& b = *c.implied_bound;
        j["implied_bound"] = {{"kind", b.kind}, {"value", b.value}, {"a", b.a}, {"b", bound_value(b.b)}, {"x", b.x}};
    } else {
        j["implied_bound"] = nullptr;
    }
    return j.dump();
}

std::string to_json(const Refusal& r) {
    return json{{"refused", true}, {"reason", r.reason}, {"witness_u", r.witness_u},
                {"witness_value", bound_value(r.witness_value)}}
        .dump();
}

std::string to_json(const BoundaryClassification& c, const ModelParams& p) {
    return json{{"beta", p.beta()},        {"theta", p.theta()},       {"r", p.r()},
                {"extinct", c.extinct},    {"explodes", c.explodes},   {"comes_down", c.comes_down}}
        .dump();
}

} // namespace neveu
