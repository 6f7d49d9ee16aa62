// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "neveu/criteria.hpp"
#include "neveu/generator.hpp"
#include "neveu/harness.hpp"
#include "neveu/model.hpp"
#include "neveu/simulator.hpp"
#include "neveu/test_functions.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace neveu;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome classifier_table() {
    int mismatches = 0;
    for (int B = 0; B <= 6; ++B)
        for (int T = 0; T <= 6; ++T) {
            const double beta = B / 2.0, theta = T / 2.0;
            BoundaryClassification want;
            want.extinct = !(beta >= 1.0);
            want.explodes = !(beta > theta + 1.0 || theta <= 1.0);
            want.comes_down = beta > std::max(theta + 1.0, 2.0);
            if (!(classify(ModelParams(beta, theta)) == want)) ++mismatches;
        }
    return {mismatches == 0, fmt("49 cells, %d mismatches", mismatches)};
}

Outcome generator_oracle() {
    const ModelParams p(1, 1);
    double worst = 0.0;
    for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
        const double psi = branching_mechanism(lambda, p);
        for (double u : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            const double want = u * psi * std::exp(-lambda * u);
            // Values reach 1e-16, so the absolute tolerance scales with g(u).
            const Tolerance tol{1e-12 * std::exp(-lambda * u), 1e-10};
            const double got = eval_generator(exp_neg(lambda), u, p, tol).total;
            worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
    }
    return {worst < 1e-8, fmt("max relative error %.3g over 24 points", worst)};
}

Outcome pointwise_lower_estimate() {
    int violations = 0, points = 0;
    for (auto [beta, theta] : {std::pair{1.0, 1.0}, {0.5, 0.0}, {2.0, 1.5}}) {
        const ModelParams p(beta, theta);
        for (double lambda : {1.0, 4.0, 12.0})
            for (int i = 0; i < 64; ++i) {
                const double u = 0.5 + 1.5 * i / 63.0;
                const auto e = eval_generator(exp_neg(lambda), u, p);
                const double bound = std::exp(-lambda * u) *
                                     (0.5 * std::pow(u, beta) * lambda * (1.0 - std::exp(-lambda / 2.0)) -
                                      std::pow(u, theta));
                ++points;
                if (e.total < bound - e.err_estimate) ++violations;
            }
    }
    return {violations == 0, fmt("%d of %d grid points below the estimate", violations, points)};
}

Outcome psi_structure() {
    const ModelParams p(1, 1);
    std::vector<double> us, ys;
    for (int i = 0; i < 8; ++i) {
        const double u = 0.25 * std::pow(32.0, i / 7.0);
        us.push_back(u);
        ys.push_back(branching_mechanism(u, p) - u * std::log(u));
    }
    double suu = 0, suy = 0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        suu += us[i] * us[i];
        suy += us[i] * ys[i];
    }
    const double c0 = suy / suu;
    double res = 0;
    for (std::size_t i = 0; i < us.size(); ++i) res = std::max(res, std::abs(ys[i] - c0 * us[i]));
    return {res < 1e-7, fmt("C0 = %.15f (gamma - 1 = %.15f, quoted constant %.6f), max residual %.2g", c0,
                            std::numbers::egamma - 1.0, quoted_psi_constant(1.0), res)};
}

Outcome derivative_checks() {
    const std::vector<TestFunction> fs{exp_neg(0.5),       exp_neg(12.0),           exp_capped(2.0),
                                       exp_capped(0.5),    power_gap(0.1, 0.25),    power_gap(2.0, 0.75),
                                       one_minus_inv_pow(1.0), one_minus_inv_pow(0.3), inv_pow(0.5),
                                       inv_pow(2.0),       loglog_zero(1),          loglog_zero(4),
                                       loglog_inf(1),      loglog_inf(3)};
    double worst = 0.0;
    std::string tag;
    for (const auto& f : fs) {
        const double e = derivative_selfcheck(f);
        if (e > worst) {
            worst = e;
            tag = f.tag;
        }
    }
    return {worst < 1e-6, fmt("%zu functions, worst %.2g (%s)", fs.size(), worst, tag.c_str())};
}

Outcome dynkin_residual() {
    const ModelParams p(1, 1);
    int passed = 0;
    std::string detail;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto e = martingale_residual(exp_neg(1.0), 1.0, 0.25, 4.0, 0.5, p, SimScheme::defaults(p), 10000, seed);
        const bool ok = e.ci_lo <= 0.0 && 0.0 <= e.ci_hi;
        passed += ok;
        detail += fmt("[%.2e, %.2e] ", e.ci_lo, e.ci_hi);
    }
    return {passed >= 2, fmt("%d of 3 intervals contain 0: ", passed) + detail};
}

std::string estimate_detail(const BoundCaseResult& r) {
    return fmt("p_hat %.4f CI [%.4f, %.4f] bound %.6g", r.estimate.p_hat, r.estimate.ci_lo, r.estimate.ci_hi,
               r.bound_case.bound);
}

Outcome bound_case(const char* name, double ci_lo_floor) {
    const auto r = run_bound_case(make_bound_case(name), 10000, 7);
    const bool ok = r.estimate.ci_hi >= r.bound_case.bound && r.estimate.ci_lo > ci_lo_floor;
    return {ok, estimate_detail(r)};
}

Outcome extinction_regime() {
    const auto r = run_bound_case(make_bound_case("extinction"), 10000, 7);
    const bool ok = r.estimate.ci_hi > 0.5 && r.estimate.ci_lo > 0.25;
    return {ok, estimate_detail(r) + fmt(" x0 %.6g", r.bound_case.x0)};
}

PassageEstimate comedown(double beta, double x0) {
    const ModelParams p(beta, 0.0);
    SimScheme s = SimScheme::defaults(p);
    s.t_max = 1.0;
    s.dt_max = 1e-2;
    s.x_max = 1e50;
    return estimate_passage(p, s, x0, 10.0, kInfinity, 2000, 11, PassageDirection::down);
}

Outcome comedown_contrast() {
    const auto near3 = comedown(3.0, 1e3), far3 = comedown(3.0, 1e5), far15 = comedown(1.5, 1e5);
    const bool cdi = agree_within_ci(near3, far3) && near3.p_hat > 0.9 && far3.p_hat > 0.9;
    const bool stays = far15.p_hat < 0.05;
    return {cdi && stays, fmt("(3,0): %.4f vs %.4f; (1.5,0) far start: %.4f", near3.p_hat, far3.p_hat, far15.p_hat)};
}

Outcome scheme_robustness() {
    auto c = make_bound_case("down");
    const auto base = run_bound_case(c, 10000, 7);
    c.scheme.eps *= 0.5;
    c.scheme.dt_max *= 0.5;
    const auto fine = run_bound_case(c, 10000, 7);
    const double shift = std::abs(fine.estimate.p_hat - base.estimate.p_hat);
    const double width = base.estimate.half_width() + fine.estimate.half_width();
    return {shift < width, fmt("p_hat %.4f -> %.4f, shift %.4f, combined half-widths %.4f", base.estimate.p_hat,
                               fine.estimate.p_hat, shift, width)};
}

std::string slurp(const std::filesystem::path& p, bool skip_first_line = false) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    if (skip_first_line) s.erase(0, s.find('\n') + 1);
    return s;
}

Outcome determinism() {
#ifndef NEVEU_CLI_PATH
    return {false, "CLI not built"};
#else
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "neveu_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream grid(dir / "grid.csv");
        grid << "beta,theta\n0.5,0\n1.5,2\n3,0\n";
    }
    const std::string cli = NEVEU_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    const std::string d = dir.string();
    const std::string sim =
        "simulate --beta 1 --theta 1 --x0 1 --a 0.5 --b 2 --paths 400 --seed 5 --dump-traj ";
    const std::string sweep = "sweep --grid-file " + d + "/grid.csv --paths 100 --seed 5 --out ";
    bool ran = true;
    for (int t : {1, 2}) {
        const std::string tag = std::to_string(t);
        ran = run("--threads " + tag + " " + sim + d + "/traj" + tag + ".csv --out " + d + "/sim" + tag + ".json") &&
              ran;
        ran = run("--threads " + tag + " " + sweep + d + "/sweep" + tag) && ran;
    }
    ran = run("--threads 2 " + sim + d + "/traj3.csv --out " + d + "/sim3.json") && ran;
    if (!ran) return {false, "a CLI invocation failed"};
    const bool sim_same = slurp(dir / "sim1.json") == slurp(dir / "sim2.json") &&
                          slurp(dir / "sim2.json") == slurp(dir / "sim3.json") && !slurp(dir / "sim1.json").empty();
    const bool traj_same = slurp(dir / "traj1.csv") == slurp(dir / "traj2.csv");
    const bool csv_same = slurp(dir / "sweep1/sweep.csv") == slurp(dir / "sweep2/sweep.csv");
    const bool jsonl_same = slurp(dir / "sweep1/sweep.jsonl", true) == slurp(dir / "sweep2/sweep.jsonl", true);
    fs::remove_all(dir);
    return {sim_same && traj_same && csv_same && jsonl_same,
            fmt("simulate %s, trajectory %s, sweep csv %s, sweep records %s", sim_same ? "identical" : "differs",
                traj_same ? "identical" : "differs", csv_same ? "identical" : "differs",
                jsonl_same ? "identical" : "differs")};
#endif
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"classifier truth table", classifier_table},
        {"generator equals u psi(lambda) e^{-lambda u}", generator_oracle},
        {"pointwise lower estimate for exp_neg", pointwise_lower_estimate},
        {"psi(u) - u ln u is linear", psi_structure},
        {"derivative self-checks", derivative_checks},
        {"Dynkin residual", dynkin_residual},
        {"down-crossing bound consistency", [] { return bound_case("down", 0.0); }},
        {"up-crossing bound consistency", [] { return bound_case("up", 0.0); }},
        {"extinction regime", extinction_regime},
        {"explosion regime", [] { return bound_case("explosion", 0.0); }},
        {"coming down vs staying infinite", comedown_contrast},
        {"scheme robustness", scheme_robustness},
        {"determinism across threads", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
