#include "neveu/harness.hpp"

#include "neveu/error.hpp"
#include "neveu/test_functions.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace neveu {

using json = nlohmann::ordered_json;

const char* to_string(PassageDirection d) noexcept { return d == PassageDirection::down ? "down" : "up"; }

PassageDirection parse_direction(const std::string& s) {
    if (s == "down") return PassageDirection::down;
    if (s == "up") return PassageDirection::up;
    throw InvalidArgument("direction must be 'down' or 'up', got '" + s + "'");
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::consistent: return "consistent";
    case Verdict::inconsistent: return "inconsistent";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string canonical_setting(const ModelParams& p, double x0, double a, double b) {
    return "beta=" + format_double(p.beta()) + ";theta=" + format_double(p.theta()) + ";r=" + format_double(p.r()) +
           ";x0=" + format_double(x0) + ";a=" + format_double(a) + ";b=" + format_double(b);
}

json num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json scheme_json(const SimScheme& s) {
    return json{{"eps", num(s.eps)},
                {"dt_max", num(s.dt_max)},
                {"max_jumps_per_step", num(s.max_jumps_per_step)},
                {"gauss_correction", s.gauss_correction},
                {"x_min", num(s.x_min)},
                {"x_max", num(s.x_max)},
                {"t_max", num(s.t_max)},
                {"rel_move", num(s.rel_move)}};
}

json estimate_json(const PassageEstimate& e) {
    json counts = json::object();
    for (int i = 0; i < kExitReasonCount; ++i)
        counts[to_string(static_cast<ExitReason>(i))] = e.counts.by_reason[i];
    return json{{"p_hat", num(e.p_hat)},
                {"n", e.n},
                {"k", e.k},
                {"ci_lo", num(e.ci_lo)},
                {"ci_hi", num(e.ci_hi)},
                {"direction", to_string(e.direction)},
                {"config_hash", e.config_hash},
                {"setting_hash", e.setting_hash},
                {"exit_counts", counts},
                {"clamped_negative", e.counts.clamped_negative},
                {"total_steps", e.counts.total_steps},
                {"config",
                 {{"beta", num(e.params.beta())},
                  {"theta", num(e.params.theta())},
                  {"r", num(e.params.r())},
                  {"x0", num(e.x0)},
                  {"a", num(e.a)},
                  {"b", num(e.b)},
                  {"seed", e.seed},
                  {"scheme", scheme_json(e.scheme)}}}};
}

json report_json(const ComparisonReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"label", row.label},
                        {"bound", num(row.bound)},
                        {"p_hat", num(row.p_hat)},
                        {"ci_lo", num(row.ci_lo)},
                        {"ci_hi", num(row.ci_hi)},
                        {"ci_width", num(row.ci_width)},
                        {"slack", num(row.slack)},
                        {"pass", row.pass}});
    return json{{"rows", rows}, {"all_pass", r.all_pass}};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t experiment) {
    return splitmix64_mix(splitmix64_mix(seed) ^ splitmix64_mix(cell * 4 + experiment + 1));
}

} // namespace

std::string config_hash(const ModelParams& params, const SimScheme& s, double x0, double a, double b,
                        std::uint64_t seed) {
    const std::string text = canonical_setting(params, x0, a, b) + ";eps=" + format_double(s.eps) +
                             ";dt_max=" + format_double(s.dt_max) + ";cap=" + format_double(s.max_jumps_per_step) +
                             ";gauss=" + (s.gauss_correction ? "1" : "0") + ";x_min=" + format_double(s.x_min) +
                             ";x_max=" + format_double(s.x_max) + ";t_max=" + format_double(s.t_max) +
                             ";rel_move=" + format_double(s.rel_move) + ";seed=" + std::to_string(seed);
    return fnv1a_hex(text);
}

std::string setting_hash(const ModelParams& params, double x0, double a, double b) {
    return fnv1a_hex(canonical_setting(params, x0, a, b));
}

std::uint64_t passage_successes(const BatchCounts& c, PassageDirection direction) noexcept {
    return direction == PassageDirection::down ? c.count(ExitReason::hit_lower) + c.count(ExitReason::extinct_proxy)
                                               : c.count(ExitReason::hit_upper) + c.count(ExitReason::exploded_proxy);
}

PassageEstimate make_estimate(const ModelParams& params, const SimScheme& scheme, double x0, double a, double b,
                              std::uint64_t seed, PassageDirection direction, const BatchCounts& counts) {
    PassageEstimate e;
    e.params = params;
    e.scheme = scheme;
    e.x0 = x0;
    e.a = a;
    e.b = b;
    e.seed = seed;
    e.direction = direction;
    e.counts = counts;
    e.n = counts.n;
    e.k = passage_successes(counts, direction);
    e.p_hat = e.n == 0 ? 0.0 : static_cast<double>(e.k) / static_cast<double>(e.n);
    const auto ci = wilson_interval(e.k, e.n);
    e.ci_lo = ci.lo;
    e.ci_hi = ci.hi;
    e.config_hash = config_hash(params, scheme, x0, a, b, seed);
    e.setting_hash = setting_hash(params, x0, a, b);
    return e;
}

PassageEstimate estimate_passage(const ModelParams& params, const SimScheme& scheme, double x0, double a, double b,
                                 std::size_t n_paths, std::uint64_t seed, PassageDirection direction,
                                 unsigned threads) {
    if (n_paths < 100) throw InvalidArgument("estimate_passage: need at least 100 paths");
    const auto paths = run_batch(x0, a, b, params, scheme, seed, n_paths, threads);
    return make_estimate(params, scheme, x0, a, b, seed, direction, tally(paths));
}

bool agree_within_ci(const PassageEstimate& e1, const PassageEstimate& e2) noexcept {
    return std::abs(e1.p_hat - e2.p_hat) <= e1.half_width() + e2.half_width();
}

Verdict axis_verdict(bool predicted, const PassageEstimate& e, double tau) noexcept {
    if (predicted) {
        if (e.ci_lo > tau) return Verdict::consistent;
        if (e.ci_hi < tau) return Verdict::inconsistent;
    } else {
        if (e.ci_hi < tau) return Verdict::consistent;
        if (e.ci_lo > tau) return Verdict::inconsistent;
    }
    return Verdict::inconclusive;
}

Verdict comedown_verdict(bool predicted, const PassageEstimate& near, const PassageEstimate& far,
                         const SweepSettings& s) noexcept {
    const bool comes_down = near.p_hat > s.cdi_level && far.p_hat > s.cdi_level && agree_within_ci(near, far);
    const bool stays = far.p_hat < s.tau;
    if (predicted) return comes_down ? Verdict::consistent : stays ? Verdict::inconsistent : Verdict::inconclusive;
    return stays ? Verdict::consistent : comes_down ? Verdict::inconsistent : Verdict::inconclusive;
}

Verdict combine(Verdict a, Verdict b, Verdict c) noexcept {
    if (a == Verdict::inconsistent || b == Verdict::inconsistent || c == Verdict::inconsistent)
        return Verdict::inconsistent;
    if (a == Verdict::consistent && b == Verdict::consistent && c == Verdict::consistent) return Verdict::consistent;
    return Verdict::inconclusive;
}

std::vector<SweepCell> sweep_phase_diagram(const std::vector<std::pair<double, double>>& grid,
                                           const SimScheme& base_scheme, std::size_t n_paths, std::uint64_t seed,
                                           const SweepSettings& s, unsigned threads, double r) {
    if (grid.empty()) throw InvalidArgument("sweep_phase_diagram: grid is empty");
    if (n_paths < 100) throw InvalidArgument("sweep_phase_diagram: need at least 100 paths");
    std::vector<SweepCell> cells;
    cells.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SweepCell cell;
        cell.beta = grid[i].first;
        cell.theta = grid[i].second;
        try {
            const ModelParams params(cell.beta, cell.theta, r);
            cell.predicted = classify(params);

            // One batch from x0 serves both the extinction and the explosion frequency.
            const std::uint64_t s_life = derive_seed(seed, i, 0);
            const auto paths = run_batch(s.x0, 0.0, kInfinity, params, base_scheme, s_life, n_paths, threads);
            const auto counts = tally(paths);
            std::uint64_t early = 0;
            for (const auto& p : paths)
                if ((p.exit_reason == ExitReason::extinct_proxy) && p.exit_time <= 0.5 * base_scheme.t_max) ++early;
            cell.extinct = make_estimate(params, base_scheme, s.x0, 0.0, kInfinity, s_life, PassageDirection::down,
                                         counts);
            cell.explode = make_estimate(params, base_scheme, s.x0, 0.0, kInfinity, s_life, PassageDirection::up,
                                         counts);
            cell.extinct_freq_half = static_cast<double>(early) / static_cast<double>(n_paths);

            SimScheme cd = base_scheme;
            cd.t_max = s.comedown_t;
            cell.comedown_near = estimate_passage(params, cd, s.comedown_x0_near, s.comedown_a, kInfinity, n_paths,
                                                  derive_seed(seed, i, 1), PassageDirection::down, threads);
            cell.comedown_far = estimate_passage(params, cd, s.comedown_x0_far, s.comedown_a, kInfinity, n_paths,
                                                 derive_seed(seed, i, 2), PassageDirection::down, threads);

            cell.observed_extinct_freq = cell.extinct->p_hat;
            cell.observed_explode_freq = cell.explode->p_hat;
            cell.observed_comedown_stat = cell.comedown_far->p_hat;
            cell.extinct_verdict = axis_verdict(cell.predicted.extinct, *cell.extinct, s.tau);
            cell.explode_verdict = axis_verdict(cell.predicted.explodes, *cell.explode, s.tau);
            cell.comedown_verdict =
                comedown_verdict(cell.predicted.comes_down, *cell.comedown_near, *cell.comedown_far, s);
            cell.verdict = combine(cell.extinct_verdict, cell.explode_verdict, cell.comedown_verdict);
        } catch (const std::exception& ex) {
            cell.error = ex.what();
            cell.verdict = Verdict::inconclusive;
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::vector<std::pair<double, double>> default_sweep_grid() {
    std::vector<std::pair<double, double>> g;
    for (int i = 0; i <= 6; ++i)
        for (int j = 0; j <= 6; ++j) g.emplace_back(0.5 * i, 0.5 * j);
    return g;
}

std::vector<std::pair<double, double>> read_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open grid file " + path);
    std::vector<std::pair<double, double>> g;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        double b = 0, t = 0;
        std::string rest;
        if (!(is >> b)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            if (g.empty() && lineno == 1) continue; // header
            throw InvalidArgument("grid file " + path + ": bad line " + std::to_string(lineno));
        }
        if (!(is >> t) || (is >> rest))
            throw InvalidArgument("grid file " + path + ": bad line " + std::to_string(lineno));
        g.emplace_back(b, t);
    }
    if (g.empty()) throw InvalidArgument("grid file " + path + " has no cells");
    return g;
}

ComparisonReport compare_bounds(const std::vector<BoundInput>& inputs) {
    ComparisonReport rep;
    for (const auto& in : inputs) {
        if (in.setting_hash != in.estimate.setting_hash)
            throw Error("compare_bounds: configuration hash mismatch for '" + in.label + "' (bound " +
                        in.setting_hash + ", estimate " + in.estimate.setting_hash + ")");
        ComparisonRow row;
        row.label = in.label;
        row.bound = in.bound;
        row.p_hat = in.estimate.p_hat;
        row.ci_lo = in.estimate.ci_lo;
        row.ci_hi = in.estimate.ci_hi;
        row.ci_width = row.ci_hi - row.ci_lo;
        row.slack = row.ci_lo - row.bound;
        row.pass = row.slack > -row.ci_width && !(row.ci_hi < row.bound);
        rep.all_pass = rep.all_pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

namespace {

BoundCertificate require_certificate(const TestFunction& g, Interval iv, const ModelParams& params) {
    auto res = certify(g, iv, Direction::L_ge_dg, params);
    if (auto* ref = std::get_if<Refusal>(&res))
        throw Error("certificate for " + g.tag + " refused: " + ref->reason);
    return std::get<BoundCertificate>(res);
}

} // namespace

BoundCase make_bound_case(const std::string& name, const BoundCaseOverrides& o) {
    BoundCase c;
    if (name == "down" || name == "up") {
        const bool down = name == "down";
        c.name = down ? "down" : "up";
        c.params = ModelParams(o.beta.value_or(1.0), o.theta.value_or(1.0), o.r.value_or(1.0));
        c.scheme = SimScheme::defaults(c.params);
        c.a = o.a.value_or(0.5);
        c.b = o.b.value_or(2.0);
        c.x0 = o.x0.value_or(1.0);
        if (down) {
            c.direction = PassageDirection::down;
            const double lambda0 = canonical_lambda0(c.a, c.b, c.params);
            const auto g = exp_neg(lambda0);
            const auto cert = require_certificate(g, {c.a, c.b}, c.params);
            c.bound = passage_lower_bound_down(g, c.a, c.b, c.x0, cert);
            c.constants = {{"lambda0", lambda0}, {"d", cert.d}};
            c.test_function = g.tag;
            c.certificate_json = to_json(cert);
        } else {
            c.direction = PassageDirection::up;
            const auto g = exp_capped(c.b);
            const auto cert = require_certificate(g, {c.a, c.b}, c.params);
            c.bound = passage_lower_bound_up(g, c.a, c.b, c.x0, cert);
            c.constants = {{"d", cert.d}};
            c.test_function = g.tag;
            c.certificate_json = to_json(cert);
        }
    } else if (name == "extinction") {
        c.name = "extinction";
        c.params = ModelParams(o.beta.value_or(0.5), o.theta.value_or(0.0), o.r.value_or(1.0));
        const double rho = 0.25;
        const double cc = canonical_power_gap_c(rho, c.params.beta());
        c.x0 = o.x0.value_or(cc / 16.0);
        if (!(c.x0 > 0.0 && c.x0 <= cc)) throw InvalidArgument("extinction case: need 0 < x0 <= c");
        c.a = o.a.value_or(0.0);
        c.b = o.b.value_or(kInfinity);
        c.direction = PassageDirection::down;
        c.scheme = SimScheme::defaults(c.params);
        // The states are of order c; the extinction proxy must sit well below x0.
        c.scheme.x_min = 1e-3 * c.x0;
        c.bound = -std::expm1(rho * std::log(c.x0 / cc));
        c.constants = {{"rho", rho}, {"c", cc}};
        c.test_function = power_gap(cc, rho).tag;
    } else if (name == "explosion") {
        c.name = "explosion";
        c.params = ModelParams(o.beta.value_or(0.0), o.theta.value_or(2.0), o.r.value_or(1.0));
        const double rho = c.params.theta() - 1.0;
        const double u0 = explosion_threshold_u0(c.params);
        c.x0 = o.x0.value_or(4.0 * u0);
        if (!(c.x0 > u0)) throw InvalidArgument("explosion case: need x0 > u0");
        c.a = o.a.value_or(0.0);
        c.b = o.b.value_or(kInfinity);
        c.direction = PassageDirection::up;
        c.scheme = SimScheme::defaults(c.params);
        c.bound = std::pow(u0, -rho) - std::pow(c.x0, -rho);
        c.constants = {{"rho", rho}, {"u0", u0}};
        c.test_function = one_minus_inv_pow(rho).tag;
    } else {
        throw InvalidArgument("unknown bound case '" + name + "'");
    }
    return c;
}

BoundCaseResult run_bound_case(const BoundCase& c, std::size_t n_paths, std::uint64_t seed, unsigned threads) {
    BoundCaseResult res{c, {}, {}};
    res.estimate = estimate_passage(c.params, c.scheme, c.x0, c.a, c.b, n_paths, seed, c.direction, threads);
    res.report = compare_bounds({{c.name, res.estimate, c.bound, setting_hash(c.params, c.x0, c.a, c.b)}});
    return res;
}

std::string to_json(const PassageEstimate& e) { return estimate_json(e).dump(); }

std::string to_json(const SweepCell& c) {
    auto opt = [](const std::optional<PassageEstimate>& e) { return e ? estimate_json(*e) : json(nullptr); };
    json j{{"beta", num(c.beta)},
           {"theta", num(c.theta)},
           {"predicted",
            {{"extinct", c.predicted.extinct},
             {"explodes", c.predicted.explodes},
             {"comes_down", c.predicted.comes_down}}},
           {"observed_extinct_freq", num(c.observed_extinct_freq)},
           {"extinct_freq_half_horizon", num(c.extinct_freq_half)},
           {"observed_explode_freq", num(c.observed_explode_freq)},
           {"observed_comedown_stat", num(c.observed_comedown_stat)},
           {"verdicts",
            {{"extinct", to_string(c.extinct_verdict)},
             {"explodes", to_string(c.explode_verdict)},
             {"comes_down", to_string(c.comedown_verdict)}}},
           {"verdict", to_string(c.verdict)},
           {"extinct", opt(c.extinct)},
           {"explode", opt(c.explode)},
           {"comedown_near", opt(c.comedown_near)},
           {"comedown_far", opt(c.comedown_far)}};
    if (!c.error.empty()) j["error"] = c.error;
    return j.dump();
}

std::string to_json(const ComparisonReport& r) { return report_json(r).dump(); }

std::string to_json(const BoundCaseResult& r) {
    json constants = json::object();
    for (const auto& [k, v] : r.bound_case.constants) constants[k] = num(v);
    json j{{"case", r.bound_case.name},
           {"bound", num(r.bound_case.bound)},
           {"test_function", r.bound_case.test_function},
           {"constants", constants},
           {"estimate", estimate_json(r.estimate)},
           {"report", report_json(r.report)}};
    if (!r.bound_case.certificate_json.empty()) j["certificate"] = json::parse(r.bound_case.certificate_json);
    return j.dump();
}

std::string sweep_csv_header() {
    return "beta,theta,pred_extinct,pred_explodes,pred_comes_down,"
           "extinct_freq,extinct_ci_lo,extinct_ci_hi,extinct_freq_half,"
           "explode_freq,explode_ci_lo,explode_ci_hi,"
           "comedown_near,comedown_near_ci_lo,comedown_near_ci_hi,"
           "comedown_far,comedown_far_ci_lo,comedown_far_ci_hi,"
           "extinct_verdict,explode_verdict,comedown_verdict,verdict,clamped_negative,error";
}

std::string to_csv_row(const SweepCell& c) {
    std::ostringstream os;
    auto d = [&](double x) { os << format_double(x) << ','; };
    auto est = [&](const std::optional<PassageEstimate>& e) {
        if (e) {
            d(e->p_hat);
            d(e->ci_lo);
            d(e->ci_hi);
        } else {
            os << ",,,";
        }
    };
    d(c.beta);
    d(c.theta);
    os << c.predicted.extinct << ',' << c.predicted.explodes << ',' << c.predicted.comes_down << ',';
    est(c.extinct);
    d(c.extinct_freq_half);
    est(c.explode);
    est(c.comedown_near);
    est(c.comedown_far);
    os << to_string(c.extinct_verdict) << ',' << to_string(c.explode_verdict) << ','
       << to_string(c.comedown_verdict) << ',' << to_string(c.verdict) << ',';
    std::uint64_t clamped = 0;
    for (const auto* e : {&c.extinct, &c.comedown_near, &c.comedown_far})
        if (*e) clamped += (*e)->counts.clamped_negative;
    os << clamped << ',';
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << err;
    return os.str();
}

std::string to_table(const ComparisonReport& r) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %12s %12s %12s %12s %12s  %s\n", "case", "bound", "p_hat", "ci_lo", "ci_hi",
                  "slack", "result");
    os << buf;
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof buf, "%-12s %12.6g %12.6g %12.6g %12.6g %12.6g  %s\n", row.label.c_str(), row.bound,
                      row.p_hat, row.ci_lo, row.ci_hi, row.slack, row.pass ? "pass" : "FAIL");
        os << buf;
    }
    os << (r.all_pass ? "all rows pass\n" : "some rows FAIL\n");
    return os.str();
}

std::string sweep_metadata(const SimScheme& scheme, std::size_t n_paths, std::uint64_t seed,
                           const SweepSettings& s, double r) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    json j{{"metadata",
            {{"timestamp", stamp},
             {"paths", n_paths},
             {"seed", seed},
             {"r", num(r)},
             {"scheme", scheme_json(scheme)},
             {"settings",
              {{"x0", num(s.x0)},
               {"comedown_a", num(s.comedown_a)},
               {"comedown_t", num(s.comedown_t)},
               {"comedown_x0_near", num(s.comedown_x0_near)},
               {"comedown_x0_far", num(s.comedown_x0_far)},
               {"tau", num(s.tau)},
               {"cdi_level", num(s.cdi_level)}}}}}};
    return j.dump();
}

void write_sweep(const std::string& dir, const std::vector<SweepCell>& cells, const std::string& metadata_json) {
    std::filesystem::create_directories(dir);
    const auto base = std::filesystem::path(dir);
    std::ofstream jl(base / "sweep.jsonl");
    std::ofstream csv(base / "sweep.csv");
    if (!jl || !csv) throw Error("cannot write sweep output in " + dir);
    jl << metadata_json << '\n';
    csv << sweep_csv_header() << '\n';
    for (const auto& c : cells) {
        jl << to_json(c) << '\n';
        csv << to_csv_row(c) << '\n';
    }
}

} // namespace neveu
