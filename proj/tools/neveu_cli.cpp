// neveu: command-line front end for the nonlinear Neveu branching toolkit.

#include "neveu/criteria.hpp"
#include "neveu/error.hpp"
#include "neveu/generator.hpp"
#include "neveu/harness.hpp"
#include "neveu/simulator.hpp"
#include "neveu/test_functions.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace neveu;

// Accepts "inf" and "infinity" besides ordinary numbers.
double parse_bound(const std::string& s) {
    if (s == "inf" || s == "infinity" || s == "+inf") return kInfinity;
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw InvalidArgument("not a number: " + s);
    return v;
}

struct ModelOpts {
    double beta = 1.0;
    double theta = 1.0;
    double r = 1.0;
};

void add_model(CLI::App* cmd, ModelOpts& m, bool required = true) {
    auto* b = cmd->add_option("--beta", m.beta, "Small-jump rate exponent");
    auto* t = cmd->add_option("--theta", m.theta, "Big-jump rate exponent");
    if (required) {
        b->required();
        t->required();
    }
    cmd->add_option("--r", m.r, "Small/big jump split")->capture_default_str();
}

struct SchemeOpts {
    std::optional<double> eps;
    double dt_max = 1e-3;
    double max_jumps = 64.0;
    bool no_gauss = false;
    double x_min = 1e-6;
    double x_max = 1e6;
    double t_max = 50.0;
    double rel_move = 0.05;

    SimScheme build(double r) const {
        SimScheme s;
        s.eps = eps.value_or(1e-3 * r);
        s.dt_max = dt_max;
        s.max_jumps_per_step = max_jumps;
        s.gauss_correction = !no_gauss;
        s.x_min = x_min;
        s.x_max = x_max;
        s.t_max = t_max;
        s.rel_move = rel_move;
        return s;
    }
};

void add_scheme(CLI::App* cmd, SchemeOpts& s) {
    cmd->add_option("--eps", s.eps, "Small-jump truncation level (default 1e-3 r)");
    cmd->add_option("--dt-max", s.dt_max, "Maximum step size")->capture_default_str();
    cmd->add_option("--max-jumps", s.max_jumps, "Expected retained small jumps per step")->capture_default_str();
    cmd->add_flag("--no-gauss", s.no_gauss, "Drop the Gaussian replacement of jumps below eps");
    cmd->add_option("--x-min", s.x_min, "Extinction proxy")->capture_default_str();
    cmd->add_option("--x-max", s.x_max, "Explosion proxy")->capture_default_str();
    cmd->add_option("--t-max", s.t_max, "Simulation horizon")->capture_default_str();
    cmd->add_option("--rel-move", s.rel_move, "Relative move cap of the adaptive truncation (0 = off)")
        ->capture_default_str();
}

std::uint64_t effective_seed(std::uint64_t seed) {
    if (const char* env = std::getenv("NEVEU_SEED"); env && *env) {
        std::size_t pos = 0;
        const std::string s(env);
        const auto v = std::stoull(s, &pos);
        if (pos != s.size()) throw InvalidArgument("NEVEU_SEED is not an integer: " + s);
        return v;
    }
    return seed;
}

// Writes to `path` or stdout when path is empty.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file " + path);
    out << text;
}

struct Grid {
    double lo, hi;
    int n;
    bool log;
};

Grid parse_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() < 3 || parts.size() > 4) throw InvalidArgument("grid must be LO:HI:N[:log]");
    Grid g{std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]), false};
    if (parts.size() == 4) {
        if (parts[3] != "log" && parts[3] != "lin") throw InvalidArgument("grid spacing must be 'log' or 'lin'");
        g.log = parts[3] == "log";
    }
    if (!(g.lo > 0.0 && g.hi >= g.lo) || g.n < 1) throw InvalidArgument("grid needs 0 < LO <= HI and N >= 1");
    if (g.n == 1 && g.hi != g.lo) throw InvalidArgument("grid with N = 1 needs LO = HI");
    return g;
}

std::vector<double> grid_points(const Grid& g) {
    std::vector<double> u(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double s = g.n == 1 ? 0.0 : static_cast<double>(i) / (g.n - 1);
        u[i] = g.log ? g.lo * std::pow(g.hi / g.lo, s) : g.lo + s * (g.hi - g.lo);
    }
    u.back() = g.hi;
    return u;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear Neveu branching process: generator evaluation, boundary criteria and Monte Carlo"};
    app.set_config("--config", "", "INI-style config file; sections name subcommands")->check(CLI::ExistingFile);
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();

    // classify
    ModelOpts cls_model;
    auto* cls = app.add_subcommand("classify", "Boundary classification as JSON");
    add_model(cls, cls_model);

    // generator-eval
    ModelOpts gen_model;
    std::string gen_fn, gen_grid, gen_out;
    double gen_tol = 0.0;
    auto* gen = app.add_subcommand("generator-eval", "Evaluate Lg on a grid, CSV output");
    add_model(gen, gen_model);
    gen->add_option("--fn", gen_fn, "Test function tag, e.g. exp_neg:lambda=2")->required();
    gen->add_option("--grid", gen_grid, "LO:HI:N[:log]")->required();
    gen->add_option("--abs-tol", gen_tol, "Absolute tolerance (default 1e-10 (1 + |g(u)|))");
    gen->add_option("--out", gen_out, "Output file (default stdout)");

    // simulate / passage
    struct SimOpts {
        ModelOpts model;
        SchemeOpts scheme;
        double x0 = 1.0;
        std::string a = "0", b = "inf";
        std::size_t paths = 10000;
        std::uint64_t seed = 1;
        std::string direction = "down";
        std::string dump_traj, out;
    };
    SimOpts sim_opts, pas_opts;
    auto add_sim = [](CLI::App* cmd, SimOpts& o, bool with_direction) {
        add_model(cmd, o.model);
        add_scheme(cmd, o.scheme);
        cmd->add_option("--x0", o.x0, "Initial state")->capture_default_str();
        cmd->add_option("--a", o.a, "Lower target (0 = extinction proxy only)")->capture_default_str();
        cmd->add_option("--b", o.b, "Upper target (inf = explosion proxy only)")->capture_default_str();
        cmd->add_option("--paths", o.paths, "Number of paths")->capture_default_str();
        cmd->add_option("--seed", o.seed, "Master seed (NEVEU_SEED overrides)")->capture_default_str();
        cmd->add_option("--dump-traj", o.dump_traj, "Write path 0 as CSV t,X_t");
        cmd->add_option("--out", o.out, "Output file (default stdout)");
        auto* d = cmd->add_option("--direction", o.direction, "Count down- or up-crossings")
                      ->check(CLI::IsMember({"down", "up"}))
                      ->capture_default_str();
        if (!with_direction) d->group("");
    };
    auto* sim = app.add_subcommand("simulate", "Passage probability estimate as JSON");
    add_sim(sim, sim_opts, true);
    auto* pas = app.add_subcommand("passage", "Same as simulate; use --direction down|up");
    add_sim(pas, pas_opts, true);

    // sweep
    SchemeOpts sw_scheme;
    sw_scheme.t_max = 2.0;
    sw_scheme.dt_max = 1e-2;
    // Non-explosive theta = 1 paths reach 1e6 by t = 2 with sizeable probability.
    sw_scheme.x_max = 1e50;
    SweepSettings sw_settings;
    std::string sw_grid, sw_out = "sweep_out";
    std::size_t sw_paths = 2000;
    std::uint64_t sw_seed = 1;
    double sw_r = 1.0;
    auto* sw = app.add_subcommand("sweep", "Phase-diagram sweep, JSON-lines and CSV");
    sw->add_option("--grid-file", sw_grid, "File of beta,theta pairs (default: 7x7 grid on {0,...,3})");
    sw->add_option("--paths", sw_paths, "Paths per experiment")->capture_default_str();
    sw->add_option("--seed", sw_seed, "Master seed (NEVEU_SEED overrides)")->capture_default_str();
    sw->add_option("--out", sw_out, "Output directory")->capture_default_str();
    sw->add_option("--r", sw_r, "Small/big jump split")->capture_default_str();
    add_scheme(sw, sw_scheme);
    sw->add_option("--start", sw_settings.x0, "Start of the extinction/explosion batch")->capture_default_str();
    sw->add_option("--comedown-a", sw_settings.comedown_a, "Comedown target level")->capture_default_str();
    sw->add_option("--comedown-t", sw_settings.comedown_t, "Comedown horizon")->capture_default_str();
    sw->add_option("--comedown-near", sw_settings.comedown_x0_near, "Near comedown start")->capture_default_str();
    sw->add_option("--comedown-far", sw_settings.comedown_x0_far, "Far comedown start")->capture_default_str();
    sw->add_option("--tau", sw_settings.tau, "Zero/positive frequency threshold")->capture_default_str();
    sw->add_option("--cdi-level", sw_settings.cdi_level, "Comedown level")->capture_default_str();

    // verify-bounds
    std::string vb_case, vb_out;
    std::size_t vb_paths = 10000;
    std::uint64_t vb_seed = 1;
    std::optional<double> vb_beta, vb_theta, vb_r, vb_x0;
    std::optional<std::string> vb_a, vb_b;
    auto* vb = app.add_subcommand("verify-bounds", "Compare a passage estimate with its analytic lower bound");
    vb->add_option("--case", vb_case, "down, up, extinction or explosion")
        ->required()
        ->check(CLI::IsMember({"down", "up", "extinction", "explosion"}));
    vb->add_option("--beta", vb_beta, "Override beta");
    vb->add_option("--theta", vb_theta, "Override theta");
    vb->add_option("--r", vb_r, "Override r");
    vb->add_option("--x0", vb_x0, "Override the start");
    vb->add_option("--a", vb_a, "Override the lower target");
    vb->add_option("--b", vb_b, "Override the upper target (accepts inf)");
    vb->add_option("--paths", vb_paths, "Number of paths")->capture_default_str();
    vb->add_option("--seed", vb_seed, "Master seed (NEVEU_SEED overrides)")->capture_default_str();
    vb->add_option("--out", vb_out, "JSON output file (default stdout); the table goes to stderr");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cls) {
            const ModelParams p(cls_model.beta, cls_model.theta, cls_model.r);
            std::cout << to_json(classify(p), p) << '\n';
        } else if (*gen) {
            const ModelParams p(gen_model.beta, gen_model.theta, gen_model.r);
            const auto f = make_test_function(gen_fn);
            const auto u = grid_points(parse_grid(gen_grid));
            std::vector<GeneratorEvaluation> rows;
            if (gen_tol > 0.0) {
                rows = eval_generator_grid(f, u, p, gen_tol, threads);
            } else {
                rows.resize(u.size());
                // Per-point default tolerance; evaluate point by point.
                for (std::size_t i = 0; i < u.size(); ++i) rows[i] = eval_generator(f, u[i], p);
            }
            std::ostringstream os;
            os << "u,small_term,big_term,total,err_estimate\n";
            for (const auto& e : rows)
                os << format_double(e.u) << ',' << format_double(e.small_term) << ',' << format_double(e.big_term)
                   << ',' << format_double(e.total) << ',' << format_double(e.err_estimate) << '\n';
            emit(gen_out, os.str());
        } else if (*sim || *pas) {
            const SimOpts& o = *sim ? sim_opts : pas_opts;
            const ModelParams p(o.model.beta, o.model.theta, o.model.r);
            const SimScheme scheme = o.scheme.build(p.r());
            const double a = parse_bound(o.a), b = parse_bound(o.b);
            const std::uint64_t seed = effective_seed(o.seed);
            const auto est = estimate_passage(p, scheme, o.x0, a, b, o.paths, seed, parse_direction(o.direction),
                                              threads);
            if (!o.dump_traj.empty()) {
                TrajectoryRecorder rec;
                run_path(o.x0, a, b, p, scheme, StreamId{seed, 0}, nullptr, &rec);
                rec.write_csv(o.dump_traj);
            }
            emit(o.out, to_json(est) + "\n");
        } else if (*sw) {
            const SimScheme scheme = sw_scheme.build(sw_r);
            const std::uint64_t seed = effective_seed(sw_seed);
            const auto grid = sw_grid.empty() ? default_sweep_grid() : read_grid_file(sw_grid);
            const auto cells = sweep_phase_diagram(grid, scheme, sw_paths, seed, sw_settings, threads, sw_r);
            write_sweep(sw_out, cells, sweep_metadata(scheme, sw_paths, seed, sw_settings, sw_r));
            int consistent = 0, inconsistent = 0;
            for (const auto& c : cells) {
                consistent += c.verdict == Verdict::consistent;
                inconsistent += c.verdict == Verdict::inconsistent;
            }
            std::cerr << cells.size() << " cells: " << consistent << " consistent, " << inconsistent
                      << " inconsistent, " << cells.size() - consistent - inconsistent << " inconclusive\n";
        } else if (*vb) {
            BoundCaseOverrides ov;
            ov.beta = vb_beta;
            ov.theta = vb_theta;
            ov.r = vb_r;
            ov.x0 = vb_x0;
            if (vb_a) ov.a = parse_bound(*vb_a);
            if (vb_b) ov.b = parse_bound(*vb_b);
            const auto bc = make_bound_case(vb_case, ov);
            const auto res = run_bound_case(bc, vb_paths, effective_seed(vb_seed), threads);
            emit(vb_out, to_json(res) + "\n");
            std::cerr << to_table(res.report);
            return res.report.all_pass ? 0 : 3;
        }
    } catch (const DivergenceError& e) {
        std::cerr << "error (" << e.term() << "): " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
