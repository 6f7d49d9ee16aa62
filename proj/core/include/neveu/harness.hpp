#pragma once

// Monte Carlo experiments on top of the simulator: passage-probability
// estimates with Wilson intervals, the (beta, theta) phase-diagram sweep,
// bound-versus-estimate comparisons, and their persistence.

#include "neveu/criteria.hpp"
#include "neveu/model.hpp"
#include "neveu/simulator.hpp"
#include "neveu/stats.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace neveu {

/// down: hit_lower or extinct_proxy; up: hit_upper or exploded_proxy.
enum class PassageDirection { down, up };

const char* to_string(PassageDirection d) noexcept;
PassageDirection parse_direction(const std::string& s);

/// 16 hex digits of FNV-1a over a canonical rendering of the inputs.
std::string config_hash(const ModelParams& params, const SimScheme& scheme, double x0, double a, double b,
                        std::uint64_t seed);
/// Same digest over (params, x0, a, b) only: what an analytic bound depends on.
std::string setting_hash(const ModelParams& params, double x0, double a, double b);

struct PassageEstimate {
    double p_hat = 0.0;
    std::uint64_t n = 0;
    std::uint64_t k = 0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    std::string config_hash;
    std::string setting_hash;
    PassageDirection direction = PassageDirection::down;
    BatchCounts counts;
    ModelParams params{1.0, 1.0};
    SimScheme scheme;
    double x0 = 0.0, a = 0.0, b = 0.0;
    std::uint64_t seed = 0;

    double half_width() const noexcept { return 0.5 * (ci_hi - ci_lo); }
};

/// Fills p_hat and the Wilson interval from k successes out of counts.n.
PassageEstimate make_estimate(const ModelParams& params, const SimScheme& scheme, double x0, double a, double b,
                              std::uint64_t seed, PassageDirection direction, const BatchCounts& counts);

std::uint64_t passage_successes(const BatchCounts& counts, PassageDirection direction) noexcept;

/// Runs n_paths >= 100 paths and counts passages in the given direction.
PassageEstimate estimate_passage(const ModelParams& params, const SimScheme& scheme, double x0, double a, double b,
                                 std::size_t n_paths, std::uint64_t seed,
                                 PassageDirection direction = PassageDirection::down, unsigned threads = 1);

/// True when the two intervals overlap: |p1 - p2| <= half-width sum.
bool agree_within_ci(const PassageEstimate& e1, const PassageEstimate& e2) noexcept;

enum class Verdict { consistent, inconsistent, inconclusive };
const char* to_string(Verdict v) noexcept;

/// Settings of the phase-diagram sweep. Every experiment uses base_scheme
/// with t_max replaced as noted.
struct SweepSettings {
    /// Start for the extinction/explosion batch, run with base_scheme.t_max.
    double x0 = 1.0;
    /// Comedown experiment: P{tau_a^- < t} from two starts.
    double comedown_a = 10.0;
    double comedown_t = 1.0;
    double comedown_x0_near = 1e3;
    double comedown_x0_far = 1e5;
    /// A frequency counts as positive above and as zero below this level.
    double tau = 0.05;
    /// Both comedown estimates above this level indicate coming down.
    double cdi_level = 0.9;
};

struct SweepCell {
    double beta = 0.0, theta = 0.0;
    BoundaryClassification predicted;
    std::optional<PassageEstimate> extinct;
    std::optional<PassageEstimate> explode;
    std::optional<PassageEstimate> comedown_near;
    std::optional<PassageEstimate> comedown_far;
    /// Extinction frequency by half the horizon (to show growth in t_max).
    double extinct_freq_half = 0.0;
    double observed_extinct_freq = 0.0;
    double observed_explode_freq = 0.0;
    /// Comedown estimate from the far start.
    double observed_comedown_stat = 0.0;
    Verdict extinct_verdict = Verdict::inconclusive;
    Verdict explode_verdict = Verdict::inconclusive;
    Verdict comedown_verdict = Verdict::inconclusive;
    Verdict verdict = Verdict::inconclusive;
    std::string error;
};

/// Verdict for one boolean prediction from a frequency interval.
Verdict axis_verdict(bool predicted, const PassageEstimate& e, double tau) noexcept;
Verdict comedown_verdict(bool predicted, const PassageEstimate& near, const PassageEstimate& far,
                         const SweepSettings& s) noexcept;
/// consistent iff all axes are; inconsistent if any is; else inconclusive.
Verdict combine(Verdict a, Verdict b, Verdict c) noexcept;

/// Seeds of the experiments are derived from (seed, cell index, experiment).
/// Failures are recorded in SweepCell::error and the sweep continues.
std::vector<SweepCell> sweep_phase_diagram(const std::vector<std::pair<double, double>>& grid,
                                           const SimScheme& base_scheme, std::size_t n_paths, std::uint64_t seed,
                                           const SweepSettings& settings = {}, unsigned threads = 1,
                                           double r = 1.0);

/// beta, theta in {0, 0.5, ..., 3}, beta major.
std::vector<std::pair<double, double>> default_sweep_grid();

/// Reads "beta,theta" (or whitespace separated) pairs, one per line; '#'
/// starts a comment and a non-numeric first line is taken as a header.
std::vector<std::pair<double, double>> read_grid_file(const std::string& path);

struct BoundInput {
    std::string label;
    PassageEstimate estimate;
    double bound = 0.0;
    /// setting_hash of the configuration the bound was derived for.
    std::string setting_hash;
};

struct ComparisonRow {
    std::string label;
    double bound = 0.0;
    double p_hat = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    double ci_width = 0.0;
    double slack = 0.0;
    bool pass = false;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    bool all_pass = true;
};

/// slack = ci_lo - bound, pass = slack > -ci_width (ci_width = ci_hi - ci_lo),
/// so a row passes iff ci_hi > bound. Throws Error on a setting_hash mismatch.
ComparisonReport compare_bounds(const std::vector<BoundInput>& inputs);

/// A named bound-consistency experiment with its analytic bound.
struct BoundCase {
    std::string name;
    ModelParams params{1.0, 1.0};
    SimScheme scheme;
    double x0 = 0.0, a = 0.0, b = 0.0;
    PassageDirection direction = PassageDirection::down;
    double bound = 0.0;
    /// Intermediate constants (lambda0, c, u0, ...) for reports.
    std::vector<std::pair<std::string, double>> constants;
    std::string test_function;
    /// JSON of the certificate behind the bound, when one is used.
    std::string certificate_json;
};

struct BoundCaseOverrides {
    std::optional<double> beta, theta, r, x0, a, b;
};

/// Cases "down" (Neveu, exp_neg(lambda0) on [a, b]), "up" (Neveu,
/// exp_capped(b) on [a, b]), "extinction" (beta=0.5, theta=0, x0=c/16) and
/// "explosion" (beta=0, theta=2, x0=4 u0). Throws InvalidArgument for unknown names or
/// Error if a needed certificate is refused.
BoundCase make_bound_case(const std::string& name, const BoundCaseOverrides& overrides = {});

struct BoundCaseResult {
    BoundCase bound_case;
    PassageEstimate estimate;
    ComparisonReport report;
};

BoundCaseResult run_bound_case(const BoundCase& c, std::size_t n_paths, std::uint64_t seed, unsigned threads = 1);

// Persistence. Machine formats print doubles with 17 significant digits.
std::string format_double(double x);
std::string to_json(const PassageEstimate& e);
std::string to_json(const SweepCell& c);
std::string to_json(const ComparisonReport& r);
std::string to_json(const BoundCaseResult& r);
std::string sweep_csv_header();
std::string to_csv_row(const SweepCell& c);
/// Human table with 6 significant digits.
std::string to_table(const ComparisonReport& r);

/// Writes DIR/sweep.jsonl (metadata header line with a timestamp, then one
/// record per cell) and DIR/sweep.csv. Creates DIR if needed.
void write_sweep(const std::string& dir, const std::vector<SweepCell>& cells, const std::string& metadata_json);

/// Metadata JSON with the run configuration and the current UTC time.
std::string sweep_metadata(const SimScheme& scheme, std::size_t n_paths, std::uint64_t seed,
                           const SweepSettings& settings, double r);

} // namespace neveu
