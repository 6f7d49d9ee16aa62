#pragma once

// The integro-differential generator
//   Lg(u) = u^beta  int_0^r [g(u+z) - g(u) - z g'(u)] z^-2 dz
//         + u^theta int_r^inf [g(u+z) - g(u)] z^-2 dz
// evaluated by adaptive quadrature.

#include "neveu/model.hpp"
#include "neveu/test_functions.hpp"

#include <span>
#include <vector>

namespace neveu {

struct GeneratorEvaluation {
    double u = 0.0;
    double small_term = 0.0;
    double big_term = 0.0;
    double total = 0.0;
    /// Summed panel error estimates plus the truncated-tail bound. Heuristic,
    /// not a rigorous enclosure.
    double err_estimate = 0.0;
    /// Horizon at which the big-jump integral was cut.
    double horizon = 0.0;
};

/// Absolute and optional relative tolerance. The relative part applies to
/// each of the two terms separately.
struct Tolerance {
    double abs = 0.0;
    double rel = 0.0;
};

/// Below this ratio z/u the small-jump integrand uses the Taylor remainder
/// z^2 int_0^1 g''(u+zv)(1-v) dv instead of the direct difference.
inline constexpr double kRemainderSwitch = 1e-4;
/// Horizon cap for the big-jump integral is kHorizonCap * max(1, u, r).
inline constexpr double kHorizonCap = 1e12;

/// Default tolerance 1e-10 (1 + |g(u)|).
double default_abs_tol(const TestFunction& f, double u);

/// Throws DivergenceError (term "small_term" or "big_term") when the
/// requested accuracy cannot be reached, InvalidArgument for u <= 0.
GeneratorEvaluation eval_generator(const TestFunction& f, double u, const ModelParams& params,
                                   double abs_tol);
GeneratorEvaluation eval_generator(const TestFunction& f, double u, const ModelParams& params,
                                   Tolerance tol);
GeneratorEvaluation eval_generator(const TestFunction& f, double u, const ModelParams& params);

/// Elementwise eval_generator over a strictly increasing grid, optionally on
/// several threads; the output never depends on the thread count. A failure
/// is rethrown as DivergenceError naming the grid index.
std::vector<GeneratorEvaluation> eval_generator_grid(const TestFunction& f, std::span<const double> grid,
                                                     const ModelParams& params, Tolerance tol,
                                                     unsigned threads = 1);
std::vector<GeneratorEvaluation> eval_generator_grid(const TestFunction& f, std::span<const double> grid,
                                                     const ModelParams& params, double abs_tol,
                                                     unsigned threads = 1);

/// Lg tabulated on a log grid over [lo, hi] and linearly interpolated in
/// log u; used where Lg is needed at many path states.
class GeneratorTable {
public:
    GeneratorTable(const TestFunction& f, const ModelParams& params, double lo, double hi,
                   int points = 2001, Tolerance tol = {0.0, 1e-9});

    /// Clamps u to [lo, hi].
    double operator()(double u) const noexcept;

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

private:
    double lo_, hi_;
    double log_lo_, step_;
    std::vector<double> values_;
};

} // namespace neveu
