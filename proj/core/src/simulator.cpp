#include "neveu/simulator.hpp"

#include "neveu/error.hpp"
#include "neveu/generator.hpp"
#include "neveu/parallel.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace neveu {

SimScheme SimScheme::defaults(const ModelParams& params) {
    SimScheme s;
    s.eps = 1e-3 * params.r();
    return s;
}

void SimScheme::validate(const ModelParams& params) const {
    auto fail = [](const std::string& what) { throw InvalidArgument("SimScheme: " + what); };
    if (!(eps > 0.0 && eps < params.r())) fail("eps must lie in (0, r)");
    if (!(x_min > 0.0 && x_min < x_max)) fail("need 0 < x_min < x_max");
    if (!(dt_max > 0.0) || !std::isfinite(dt_max)) fail("dt_max must be positive");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) fail("t_max must be positive");
    if (!(max_jumps_per_step > 0.0)) fail("max_jumps_per_step must be positive");
    if (!(rel_move >= 0.0) || !std::isfinite(rel_move)) fail("rel_move must be >= 0");
}

const char* to_string(ExitReason reason) noexcept {
    switch (reason) {
    case ExitReason::hit_lower: return "hit_lower";
    case ExitReason::hit_upper: return "hit_upper";
    case ExitReason::extinct_proxy: return "extinct_proxy";
    case ExitReason::exploded_proxy: return "exploded_proxy";
    case ExitReason::timeout: return "timeout";
    }
    return "unknown";
}

double truncated_drift(double x, const ModelParams& params, double eps) noexcept {
    const double r = params.r();
    if (eps <= r) return -std::pow(x, params.beta()) * std::log(r / eps);
    return std::pow(x, params.theta()) * std::log(eps / r);
}

double truncated_variance(double x, const ModelParams& params, double eps) noexcept {
    const double r = params.r();
    const double xb = std::pow(x, params.beta());
    if (eps <= r) return xb * eps;
    return xb * r + std::pow(x, params.theta()) * (eps - r);
}

double step_from_draws(double x, double dt, const ModelParams& params, double eps,
                       const StepDraws& draws) noexcept {
    return x + draws.small_sum + truncated_drift(x, params, eps) * dt + draws.gauss + draws.big_sum;
}

namespace {

std::int64_t poisson(double mean, Xoshiro256pp& rng) {
    if (!(mean > 0.0)) return 0;
    boost::random::poisson_distribution<std::int64_t, double> dist(mean);
    return dist(rng);
}

double compound_sum(const JumpBand& band, std::int64_t n, Xoshiro256pp& rng) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += sample_jump(band, rng.uniform01());
    return sum;
}

} // namespace

StepDraws sample_step(double x, double dt, const ModelParams& params, double eps, bool gauss_correction,
                      Xoshiro256pp& rng) {
    StepDraws d;
    if (!(dt > 0.0)) return d;
    const double r = params.r();
    if (eps < r) {
        const JumpBand small(eps, r);
        d.small_sum = compound_sum(small, poisson(std::pow(x, params.beta()) * small.total_rate() * dt, rng), rng);
    }
    if (gauss_correction) {
        boost::random::normal_distribution<double> normal(0.0, std::sqrt(truncated_variance(x, params, eps) * dt));
        d.gauss = normal(rng);
    }
    const JumpBand big(std::max(r, eps), kInfinity);
    d.big_sum = compound_sum(big, poisson(std::pow(x, params.theta()) * big.total_rate() * dt, rng), rng);
    return d;
}

double step(double x, double dt, const ModelParams& params, const SimScheme& scheme, Xoshiro256pp& rng) {
    const auto draws = sample_step(x, dt, params, scheme.eps, scheme.gauss_correction, rng);
    return step_from_draws(x, dt, params, scheme.eps, draws);
}

namespace {

// Truncation levels e usable for a step of length dt from x: expected sampled
// jumps <= cap, Gaussian std <= m and |drift| <= m. Each condition gives an
// interval in e and every interval shrinks as dt grows.
struct EpsRange {
    double lo, hi;
    bool feasible() const { return lo <= hi; }
};

struct RangeInputs {
    double xb, xt, r, cap, m;

    EpsRange at(double dt) const {
        const double m2 = m * m;
        const double big_r = xt * dt / r;
        const double e_jumps = big_r <= cap ? 1.0 / ((cap - big_r) / (xb * dt) + 1.0 / r) : xt * dt / cap;
        const double e_var = m2 / (xb * dt) <= r ? m2 / (xb * dt) : r + (m2 - xb * r * dt) / (xt * dt);
        const double e_drift_lo = r * std::exp(-m / (xb * dt));
        const double e_drift_hi = r * std::exp(m / (xt * dt));
        return {std::max(e_jumps, e_drift_lo), std::min(e_var, e_drift_hi)};
    }
};

} // namespace

StepPlan plan_step(double x, double remaining, const ModelParams& params, const SimScheme& scheme,
                   double dt_hint) noexcept {
    const double r = params.r();
    const double cap = scheme.max_jumps_per_step;
    const double xb = std::pow(x, params.beta());
    const double xt = std::pow(x, params.theta());
    const double lam_s = xb * (1.0 / scheme.eps - 1.0 / r);
    const double lam_b = xt / r;
    const double base = std::min(scheme.dt_max, remaining);
    const StepPlan fixed{std::min(base, cap / (lam_s + lam_b)), scheme.eps};

    if (!(scheme.rel_move > 0.0) || !scheme.gauss_correction || !(xb > 0.0) || !(xt > 0.0) ||
        !std::isfinite(xb * xt))
        return fixed;
    const double m = scheme.rel_move * x;
    const bool fixed_ok = fixed.dt >= base && xb * std::log(r / scheme.eps) * fixed.dt <= m &&
                          xb * scheme.eps * fixed.dt <= m * m;
    if (fixed_ok) return fixed;

    const RangeInputs in{xb, xt, r, cap, m};
    double dt = base;
    EpsRange range = in.at(dt);
    if (!range.feasible()) {
        // Largest feasible dt by bisection in log dt, bracketed around the hint.
        auto ok = [&](double log_dt) { return in.at(std::exp(log_dt)).feasible(); };
        const double top = std::log(base);
        double lo = dt_hint > 0.0 ? std::min(std::log(dt_hint), top) - 0.25 : top - 50.0;
        double hi = top;
        for (int i = 0; i < 64 && !ok(lo); ++i) {
            hi = lo;
            lo -= dt_hint > 0.0 ? 1.0 : 50.0;
        }
        if (dt_hint > 0.0 && hi == top && lo + 0.5 < top && !ok(lo + 0.5)) hi = lo + 0.5;
        while (hi - lo > 1e-3) {
            const double mid = 0.5 * (lo + hi);
            (ok(mid) ? lo : hi) = mid;
        }
        dt = std::exp(lo);
        range = in.at(dt);
        if (!range.feasible()) return fixed;
    }
    return {dt, std::clamp(scheme.eps, range.lo, range.hi)};
}

TrajectoryRecorder::TrajectoryRecorder(std::size_t max_rows) : max_rows_(std::max<std::size_t>(max_rows, 4)) {}

void TrajectoryRecorder::record(double t, double x) {
    if (seen_++ % stride_ != 0) return;
    rows_.push_back({t, x});
    if (rows_.size() + 1 >= max_rows_) {
        // Keep every other row; leaves room for the exit row.
        std::size_t j = 0;
        for (std::size_t i = 0; i < rows_.size(); i += 2) rows_[j++] = rows_[i];
        rows_.resize(j);
        stride_ *= 2;
    }
}

void TrajectoryRecorder::finish(double t, double x) {
    if (rows_.empty() || rows_.back()[0] != t) rows_.push_back({t, x});
}

void TrajectoryRecorder::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open trajectory file " + path);
    out << "t,X_t\n";
    char buf[64];
    for (const auto& row : rows_) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", row[0], row[1]);
        out << buf;
    }
}

namespace {

void check_thresholds(double x0, double a, double b, const ModelParams& params, const SimScheme& scheme) {
    scheme.validate(params);
    if (!(a >= 0.0) || (a > 0.0 && a < scheme.x_min))
        throw InvalidArgument("run_path: need a = 0 or x_min <= a");
    if (!(b <= scheme.x_max || b == kInfinity)) throw InvalidArgument("run_path: need b <= x_max or b = inf");
    if (!(a < b)) throw InvalidArgument("run_path: need a < b");
    if (!std::isfinite(x0)) throw InvalidArgument("run_path: x0 must be finite");
}

} // namespace

PathResult run_path(double x0, double a, double b, const ModelParams& params, const SimScheme& scheme,
                    StreamId seed, const StepObserver* observer, TrajectoryRecorder* recorder) {
    check_thresholds(x0, a, b, params, scheme);

    PathResult res;
    res.seed = seed;
    res.final_state = x0;
    auto done = [&](ExitReason reason, double t) {
        res.exit_reason = reason;
        res.exit_time = t;
        if (recorder) recorder->finish(t, res.final_state);
        return res;
    };

    if (recorder) recorder->record(0.0, x0);
    if (a > 0.0 && x0 <= a) return done(ExitReason::hit_lower, 0.0);
    if (x0 <= scheme.x_min) return done(ExitReason::extinct_proxy, 0.0);
    if (x0 >= b) return done(ExitReason::hit_upper, 0.0);
    if (x0 >= scheme.x_max) return done(ExitReason::exploded_proxy, 0.0);

    Xoshiro256pp rng(seed);
    double x = x0;
    double t = 0.0;
    const double t_end = scheme.t_max;
    double dt_prev = 0.0;
    while (t < t_end) {
        const StepPlan plan = plan_step(x, t_end - t, params, scheme, dt_prev);
        dt_prev = plan.dt;
        const auto draws = sample_step(x, plan.dt, params, plan.eps, scheme.gauss_correction, rng);
        const double next = step_from_draws(x, plan.dt, params, plan.eps, draws);
        if (observer) (*observer)(t, x, plan.dt, next);
        t = (t_end - t - plan.dt <= 1e-15 * t_end) ? t_end : t + plan.dt;
        ++res.steps;
        res.final_state = next;
        if (next <= 0.0) {
            res.final_state = 0.0;
            res.clamped_negative = true;
            return done(ExitReason::extinct_proxy, t);
        }
        if (a > 0.0 && next <= a) return done(ExitReason::hit_lower, t);
        if (next <= scheme.x_min) return done(ExitReason::extinct_proxy, t);
        if (next >= b) return done(ExitReason::hit_upper, t);
        if (next >= scheme.x_max) return done(ExitReason::exploded_proxy, t);
        if (recorder) recorder->record(t, next);
        x = next;
    }
    return done(ExitReason::timeout, t_end);
}

PathResult run_path(double x0, double a, double b, const ModelParams& params, const SimScheme& scheme,
                    std::uint64_t seed) {
    return run_path(x0, a, b, params, scheme, StreamId{seed, 0});
}

std::vector<PathResult> run_batch(double x0, double a, double b, const ModelParams& params,
                                  const SimScheme& scheme, std::uint64_t master_seed, std::size_t n_paths,
                                  unsigned threads) {
    // Workers must not throw, so arguments are checked up front.
    check_thresholds(x0, a, b, params, scheme);
    std::vector<PathResult> out(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        out[i] = run_path(x0, a, b, params, scheme, StreamId{master_seed, i});
    });
    return out;
}

BatchCounts tally(const std::vector<PathResult>& paths) noexcept {
    BatchCounts c;
    for (const auto& p : paths) {
        ++c.by_reason[static_cast<int>(p.exit_reason)];
        c.clamped_negative += p.clamped_negative ? 1 : 0;
        c.total_steps += p.steps;
        ++c.n;
    }
    return c;
}

ResidualEstimate martingale_residual(const TestFunction& f, double x0, double a, double b, double t,
                                     const ModelParams& params, const SimScheme& scheme, std::size_t n_paths,
                                     std::uint64_t seed, unsigned threads) {
    if (!(a > 0.0 && a < x0 && x0 < b && std::isfinite(b)))
        throw InvalidArgument("martingale_residual: need 0 < a < x0 < b < inf");
    if (!(t >= 0.0)) throw InvalidArgument("martingale_residual: need t >= 0");
    if (n_paths < 2) throw InvalidArgument("martingale_residual: need at least two paths");
    const auto reg = check_regularity(f, a, f.regularity_delta);
    if (!reg.bounded) {
        std::ostringstream os;
        os << "martingale_residual: regularity sup of " << f.tag << " is not bounded (witness u=" << reg.u
           << ", z=" << reg.z << ")";
        throw InvalidArgument(os.str());
    }
    ResidualEstimate est;
    est.n = n_paths;
    if (t == 0.0) return est;

    const GeneratorTable Lg(f, params, a, b);
    SimScheme sch = scheme;
    sch.t_max = t;
    const double g0 = f(x0);
    std::vector<double> residual(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        double integral = 0.0;
        const StepObserver obs = [&](double, double x, double dt, double) { integral += Lg(x) * dt; };
        const auto p = run_path(x0, a, b, params, sch, StreamId{seed, i}, &obs);
        residual[i] = f(p.final_state) - g0 - integral;
    });

    double mean = 0.0;
    for (double v : residual) mean += v;
    mean /= static_cast<double>(n_paths);
    double ss = 0.0;
    for (double v : residual) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n_paths - 1));
    const double half = 1.959963984540054 * sd / std::sqrt(static_cast<double>(n_paths));
    est.mean = mean;
    est.std_dev = sd;
    est.ci_lo = mean - half;
    est.ci_hi = mean + half;
    return est;
}

} // namespace neveu
