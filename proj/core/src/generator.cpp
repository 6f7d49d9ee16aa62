#include "neveu/generator.hpp"

#include "neveu/error.hpp"
#include "neveu/quadrature.hpp"
#include "neveu/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <sstream>

namespace neveu {

namespace {

// 8-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 8> gl_nodes = {
    0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
    0.5917173212478249,   0.7627662049581645,  0.8983332387068134, 0.9801449282487681};
constexpr std::array<double, 8> gl_weights = {
    0.050614268145188129, 0.1111905172266872, 0.15685332293894364, 0.18134189168918099,
    0.18134189168918099,  0.15685332293894364, 0.1111905172266872, 0.050614268145188129};

// int_0^1 g''(u + z v)(1 - v) dv
double taylor_remainder(const TestFunction& f, double u, double z) {
    double s = 0.0;
    for (std::size_t i = 0; i < gl_nodes.size(); ++i) {
        const double v = gl_nodes[i];
        s += gl_weights[i] * f.d2(u + z * v) * (1.0 - v);
    }
    return s;
}

constexpr std::array<double, 5> kTailDeltas = {0.0, 0.1, 0.25, 0.5, 0.75};

// Bound on |int_Z^inf [g(u+z) - g(u)] z^-2 dz| from the sampled increment
// sup S_delta(Z) = max_{z >= Z} |g(u+z) - g(u)| / z^delta, which gives
// S_delta Z^{delta-1} / (1 - delta). The smallest bound over delta is used.
// Increments are sampled 8 points per decade from z_start to 1e6 * z_stop.
class TailBound {
public:
    TailBound(const TestFunction& f, double u, double z_start, double z_stop, double extra_delta) {
        const double gu = f.eval(u);
        const int n = 8 * static_cast<int>(std::ceil(std::log10(z_stop * 1e6 / z_start))) + 1;
        const double a = std::log(z_start), b = std::log(z_stop * 1e6);
        log_z_.resize(n);
        std::vector<double> inc(n);
        for (int i = 0; i < n; ++i) {
            log_z_[i] = a + (b - a) * i / (n - 1);
            inc[i] = std::abs(f.eval(u + std::exp(log_z_[i])) - gu);
            if (!std::isfinite(inc[i])) inc[i] = INFINITY;
        }
        std::vector<double> deltas(kTailDeltas.begin(), kTailDeltas.end());
        deltas.push_back(extra_delta);
        for (double delta : deltas) {
            std::vector<double> suffix(n);
            double running = 0.0;
            for (int i = n - 1; i >= 0; --i) {
                running = std::max(running, inc[i] * std::exp(-delta * log_z_[i]));
                suffix[i] = running;
            }
            curves_.push_back({delta, std::move(suffix)});
        }
    }

    double operator()(double horizon) const {
        // First sample at or above the horizon; the sample just below it is
        // included too so the sup covers [horizon, next sample).
        const double lh = std::log(horizon);
        auto it = std::lower_bound(log_z_.begin(), log_z_.end(), lh);
        std::size_t idx = static_cast<std::size_t>(it - log_z_.begin());
        if (idx > 0) --idx;
        double best = INFINITY;
        for (const auto& c : curves_) {
            if (idx >= c.suffix.size()) continue;
            best = std::min(best, c.suffix[idx] * std::exp((c.delta - 1.0) * lh) / (1.0 - c.delta));
        }
        return best;
    }

private:
    struct Curve {
        double delta;
        std::vector<double> suffix;
    };
    std::vector<double> log_z_;
    std::vector<Curve> curves_;
};

} // namespace

double default_abs_tol(const TestFunction& f, double u) { return 1e-10 * (1.0 + std::abs(f.eval(u))); }

GeneratorEvaluation eval_generator(const TestFunction& f, double u, const ModelParams& params, Tolerance tol) {
    if (!(u > 0.0) || !std::isfinite(u)) throw InvalidArgument("eval_generator: u must be finite and > 0");
    if (!(tol.abs > 0.0) && !(tol.rel > 0.0))
        throw InvalidArgument("eval_generator: need a positive absolute or relative tolerance");

    const double r = params.r();
    const double gu = f.eval(u);
    const double g1u = f.d1(u);
    if (!std::isfinite(gu) || !std::isfinite(g1u))
        throw InvalidArgument("eval_generator: g or g' not finite at u");

    const double small_pref = std::pow(u, params.beta());
    const double big_pref = std::pow(u, params.theta());
    GeneratorEvaluation out;
    out.u = u;

    // Small jumps on (0, r].
    const double switch_z = kRemainderSwitch * u;
    auto small_integrand = [&](double z) {
        if (z < switch_z) return taylor_remainder(f, u, z);
        return (f.eval(u + z) - gu - z * g1u) / (z * z);
    };
    quad::Options small_opt;
    small_opt.abs_tol = 0.45 * tol.abs / small_pref;
    small_opt.rel_tol = tol.rel;
    small_opt.max_panels = 4000;
    double small_val = 0.0, small_err = 0.0;
    try {
        std::vector<double> pts = quad::decade_breakpoints(0.0, r, {});
        for (double p = switch_z; p < r; p *= 10.0) pts.push_back(p);
        if (u < r) pts.push_back(u);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        const auto res = quad::integrate(small_integrand, std::span<const double>(pts), small_opt);
        small_val = res.value;
        small_err = res.abs_error;
    } catch (const Error& e) {
        throw DivergenceError("small_term", std::string("eval_generator: small-jump integral failed: ") + e.what());
    }
    out.small_term = small_pref * small_val;

    // Big jumps on (r, Z], plus a bound on the neglected tail.
    const double z0 = 10.0 * std::max(r, u);
    const double cap = kHorizonCap * std::max({1.0, u, r});
    auto big_integrand = [&](double z) { return (f.eval(u + z) - gu) / (z * z); };

    // Magnitude used for the relative tolerance and the tail budget.
    double big_scale = 0.0;
    if (tol.rel > 0.0) {
        try {
            quad::Options rough;
            rough.abs_tol = 0.0;
            rough.rel_tol = 1e-3;
            const auto pts = quad::decade_breakpoints(r, z0, {u});
            big_scale = std::abs(quad::integrate(big_integrand, std::span<const double>(pts), rough).value);
        } catch (const Error&) {
            big_scale = 0.0;
        }
    }
    const double big_tol = std::max(tol.abs / big_pref, tol.rel * big_scale);

    const TailBound tail(f, u, z0, cap, f.regularity_delta);
    double horizon = z0;
    double tail_bound = tail(horizon);
    while (tail_bound > 0.1 * big_tol) {
        horizon *= 2.0;
        if (horizon > cap) {
            std::ostringstream os;
            os << "eval_generator: big-jump tail bound " << tail_bound << " still above "
               << 0.1 * big_tol << " at horizon cap " << cap;
            throw DivergenceError("big_term", os.str());
        }
        tail_bound = tail(horizon);
    }

    quad::Options big_opt;
    big_opt.abs_tol = 0.45 * tol.abs / big_pref;
    big_opt.rel_tol = tol.rel;
    big_opt.max_panels = 4000;
    double big_val = 0.0, big_err = 0.0;
    try {
        const auto pts = quad::decade_breakpoints(r, horizon, {u, r + u});
        const auto res = quad::integrate(big_integrand, std::span<const double>(pts), big_opt);
        big_val = res.value;
        big_err = res.abs_error;
    } catch (const Error& e) {
        throw DivergenceError("big_term", std::string("eval_generator: big-jump integral failed: ") + e.what());
    }
    out.big_term = big_pref * big_val;
    out.total = out.small_term + out.big_term;
    out.err_estimate = small_pref * small_err + big_pref * (big_err + tail_bound);
    out.horizon = horizon;
    return out;
}

GeneratorEvaluation eval_generator(const TestFunction& f, double u, const ModelParams& params, double abs_tol) {
    if (!(abs_tol > 0.0)) throw InvalidArgument("eval_generator: abs_tol must be > 0");
    return eval_generator(f, u, params, Tolerance{abs_tol, 0.0});
}

GeneratorEvaluation eval_generator(const TestFunction& f, double u, const ModelParams& params) {
    if (!(u > 0.0)) throw InvalidArgument("eval_generator: u must be > 0");
    return eval_generator(f, u, params, default_abs_tol(f, u));
}

std::vector<GeneratorEvaluation> eval_generator_grid(const TestFunction& f, std::span<const double> grid,
                                                     const ModelParams& params, Tolerance tol,
                                                     unsigned threads) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InvalidArgument("eval_generator_grid: grid must be strictly increasing");

    std::vector<GeneratorEvaluation> out(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        try {
            out[i] = eval_generator(f, grid[i], params, tol);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const DivergenceError& e) {
            std::ostringstream os;
            os << "grid point " << i << " (u=" << grid[i] << "): " << e.what();
            throw DivergenceError(e.term(), os.str());
        }
    }
    return out;
}

std::vector<GeneratorEvaluation> eval_generator_grid(const TestFunction& f, std::span<const double> grid,
                                                     const ModelParams& params, double abs_tol,
                                                     unsigned threads) {
    return eval_generator_grid(f, grid, params, Tolerance{abs_tol, 0.0}, threads);
}

GeneratorTable::GeneratorTable(const TestFunction& f, const ModelParams& params, double lo, double hi,
                               int points, Tolerance tol)
    : lo_(lo), hi_(hi) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2) throw InvalidArgument("GeneratorTable: need 0 < lo < hi, points >= 2");
    log_lo_ = std::log(lo);
    step_ = (std::log(hi) - log_lo_) / (points - 1);
    values_.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double u = i + 1 == points ? hi : std::exp(log_lo_ + step_ * i);
        values_[i] = eval_generator(f, u, params, tol).total;
    }
}

double GeneratorTable::operator()(double u) const noexcept {
    const double x = (std::log(std::clamp(u, lo_, hi_)) - log_lo_) / step_;
    const auto last = values_.size() - 1;
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(x)));
    if (i >= last) return values_[last];
    const double w = x - static_cast<double>(i);
    return values_[i] * (1.0 - w) + values_[i + 1] * w;
}

} // namespace neveu
