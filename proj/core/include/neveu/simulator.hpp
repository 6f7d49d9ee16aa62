#pragma once

// Euler-type simulation of the nonlinear Neveu SDE: rates frozen at the left
// end of each step, small jumps truncated at eps and replaced by their exact
// compensator plus an optional matching-variance Gaussian, big jumps sampled
// as a compound Poisson sum.

#include "neveu/model.hpp"
#include "neveu/rng.hpp"
#include "neveu/test_functions.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace neveu {

struct SimScheme {
    double eps = 1e-3;
    double dt_max = 1e-3;
    double max_jumps_per_step = 64.0;
    bool gauss_correction = true;
    double x_min = 1e-6;
    double x_max = 1e6;
    double t_max = 50.0;
    /// State-adaptive truncation. Where the fixed-eps step is cut short by the
    /// jump cap, or its drift or Gaussian std exceeds rel_move x, the step
    /// length and truncation level are re-chosen so that both stay below
    /// rel_move x and the cap holds. The level may then exceed r, in which case
    /// big jumps below it are replaced by their mean and a Gaussian. 0 disables it.
    double rel_move = 0.05;

    /// Defaults with eps = 1e-3 r.
    static SimScheme defaults(const ModelParams& params);

    /// Throws InvalidArgument unless 0 < eps < r, 0 < x_min < x_max,
    /// dt_max > 0, t_max > 0, max_jumps_per_step > 0 and rel_move >= 0.
    void validate(const ModelParams& params) const;

    friend bool operator==(const SimScheme&, const SimScheme&) = default;
};

enum class ExitReason { hit_lower, hit_upper, extinct_proxy, exploded_proxy, timeout };
inline constexpr int kExitReasonCount = 5;

const char* to_string(ExitReason reason) noexcept;

struct PathResult {
    ExitReason exit_reason = ExitReason::timeout;
    double exit_time = 0.0;
    double final_state = 0.0;
    std::uint64_t steps = 0;
    StreamId seed;
    /// The last step went to a state <= 0 and was clamped to extinct_proxy.
    bool clamped_negative = false;
};

/// Random inputs of one step, split out so the composition can be tested.
struct StepDraws {
    double small_sum = 0.0;
    double gauss = 0.0;
    double big_sum = 0.0;
};

/// Drift replacing the jumps below eps: -x^beta ln(r/eps) for eps <= r,
/// x^theta ln(eps/r) above r.
double truncated_drift(double x, const ModelParams& params, double eps) noexcept;
/// Variance rate of the jumps below eps: x^beta eps for eps <= r, otherwise
/// x^beta r + x^theta (eps - r).
double truncated_variance(double x, const ModelParams& params, double eps) noexcept;

/// x + small_sum + truncated_drift dt + gauss + big_sum; for eps < r this is
/// x + small_sum - x^beta ln(r/eps) dt + gauss + big_sum.
double step_from_draws(double x, double dt, const ModelParams& params, double eps,
                       const StepDraws& draws) noexcept;

/// Samples the draws of one step with truncation level eps (which may exceed
/// r, see SimScheme::rel_move).
StepDraws sample_step(double x, double dt, const ModelParams& params, double eps,
                      bool gauss_correction, Xoshiro256pp& rng);

/// One step of the fixed-eps scheme (scheme.eps). Negative results are
/// returned as is.
double step(double x, double dt, const ModelParams& params, const SimScheme& scheme,
            Xoshiro256pp& rng);

/// Step size and truncation level used from state x with `remaining` time
/// left. dt_hint (the previous step, 0 if none) only speeds up the search.
struct StepPlan {
    double dt = 0.0;
    double eps = 0.0;
};
StepPlan plan_step(double x, double remaining, const ModelParams& params, const SimScheme& scheme,
                   double dt_hint = 0.0) noexcept;

/// Called after each step with the state and time at its start, its length and
/// the state it produced (before any clamping).
using StepObserver = std::function<void(double t, double x, double dt, double next)>;

/// Keeps at most `max_rows` (t, X_t) samples of a path by repeatedly dropping
/// every other row; the first and the last sample are always kept.
class TrajectoryRecorder {
public:
    explicit TrajectoryRecorder(std::size_t max_rows = 10000);

    void record(double t, double x);
    /// Records the exit point, which is kept regardless of decimation.
    void finish(double t, double x);

    const std::vector<std::array<double, 2>>& rows() const noexcept { return rows_; }
    void write_csv(const std::string& path) const;

private:
    std::size_t max_rows_;
    std::size_t stride_ = 1;
    std::size_t seen_ = 0;
    std::vector<std::array<double, 2>> rows_;
};

/// Simulates from x0 until X <= a (a > 0), X >= b (b finite), a proxy is
/// crossed or t_max is reached; crossings are detected at step ends. a = 0
/// means extinct_proxy only, b = infinity exploded_proxy only. Throws
/// InvalidArgument unless x_min <= a < x0 < b <= x_max, except that x0 <= a
/// returns hit_lower at time 0 (and x0 >= b hit_upper).
PathResult run_path(double x0, double a, double b, const ModelParams& params, const SimScheme& scheme,
                    StreamId seed, const StepObserver* observer = nullptr,
                    TrajectoryRecorder* recorder = nullptr);
PathResult run_path(double x0, double a, double b, const ModelParams& params, const SimScheme& scheme,
                    std::uint64_t seed);

/// Path i uses stream (master_seed, i). The result does not depend on threads.
std::vector<PathResult> run_batch(double x0, double a, double b, const ModelParams& params,
                                  const SimScheme& scheme, std::uint64_t master_seed, std::size_t n_paths,
                                  unsigned threads = 1);

struct BatchCounts {
    std::array<std::uint64_t, kExitReasonCount> by_reason{};
    std::uint64_t clamped_negative = 0;
    std::uint64_t total_steps = 0;
    std::uint64_t n = 0;

    std::uint64_t count(ExitReason r) const noexcept { return by_reason[static_cast<int>(r)]; }
};

BatchCounts tally(const std::vector<PathResult>& paths) noexcept;

struct ResidualEstimate {
    double mean = 0.0;
    double std_dev = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;
};

/// Monte Carlo estimate of E[g(X_{t ^ gamma}) - g(x0) - int_0^{t ^ gamma} Lg(X_s) ds]
/// with gamma the exit time of (a, b) and a 95% normal CI. Lg is taken from a
/// GeneratorTable and held constant over each step. Requires 0 < a < x0 < b < infinity
/// and a bounded regularity sup for f at a; throws InvalidArgument otherwise.
ResidualEstimate martingale_residual(const TestFunction& f, double x0, double a, double b, double t,
                                     const ModelParams& params, const SimScheme& scheme, std::size_t n_paths,
                                     std::uint64_t seed, unsigned threads = 1);

} // namespace neveu
