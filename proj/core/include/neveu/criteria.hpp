#pragma once

// Chen-type criteria: numerical certification of Lg <= d g or Lg >= d g on an
// interval, the first-passage bounds those certificates imply, the explicit
// constants used for the extinction/explosion bounds, and the (beta, theta)
// boundary classification.

#include "neveu/model.hpp"
#include "neveu/test_functions.hpp"

#include <optional>
#include <string>
#include <variant>

namespace neveu {

struct BoundaryClassification {
    bool extinct = false;
    bool explodes = false;
    bool comes_down = false;

    friend bool operator==(const BoundaryClassification&, const BoundaryClassification&) = default;
};

/// extinct iff beta < 1; explodes iff not (beta > theta + 1 or theta <= 1);
/// comes down from infinity iff beta > max(theta + 1, 2). r plays no role.
BoundaryClassification classify(const ModelParams& params) noexcept;

enum class Direction { L_le_dg, L_ge_dg };

const char* to_string(Direction d) noexcept;

struct GridSpec {
    int points = 512;
    /// Number of grid doublings; the last grid is (points-1) 2^k + 1 points
    /// and contains all coarser grids.
    int refinements = 1;
    /// Intervals reaching 0 or infinity are cut to [trunc_lo, trunc_hi].
    double trunc_lo = 1e-6;
    double trunc_hi = 1e6;
    double eps_pad = 0.01;
    /// Max relative change of the extremal ratio Lg/g under refinement.
    double stability = 0.05;
    /// Relative quadrature tolerance per generator term.
    double rel_tol = 1e-8;
    unsigned threads = 1;
};

struct ImpliedBound {
    std::string kind; // "down" (P{tau_a^- < tau_b^+}) or "up" (P{tau_b^+ < tau_a^-})
    double value = 0.0;
    double a = 0.0, b = 0.0, x = 0.0;
};

struct BoundCertificate {
    std::string function_tag;
    /// Interval as requested (may touch 0 or infinity).
    Interval interval;
    /// Interval actually sampled.
    Interval checked;
    bool lo_truncated = false;
    bool hi_truncated = false;
    Direction direction = Direction::L_le_dg;
    double d = 0.0;
    GridSpec grid_spec;
    int grid_points = 0;
    /// min over the grid of d g - Lg (L_le_dg) or Lg - d g (L_ge_dg).
    double margin = 0.0;
    /// max (L_le_dg) or min (L_ge_dg) of Lg/g on the finest and the coarsest grid.
    double extremal_ratio = 0.0;
    double coarse_extremal_ratio = 0.0;
    double extremal_u = 0.0;
    double regularity_delta = 0.5;
    double beta = 0.0, theta = 0.0, r = 1.0;
    std::optional<ImpliedBound> implied_bound;
};

struct Refusal {
    std::string reason;
    double witness_u = 0.0;
    double witness_value = 0.0;
};

using CertifyResult = std::variant<BoundCertificate, Refusal>;

/// Certifies Lg <= d g (d = max ratio padded up by eps_pad) or Lg >= d g
/// (d = (1 - eps_pad) min ratio, which must be positive) on the interval.
/// Refuses on generator divergence, g < 0, grid instability, or when the
/// extremal ratio keeps moving the wrong way at a truncated end.
CertifyResult certify(const TestFunction& f, Interval interval, Direction direction,
                      const ModelParams& params, const GridSpec& grid = {});

/// P{tau_a^- < tau_b^+} >= max(0, (g(x) - g(b)) / g(a)) for non-increasing g
/// certified with L_ge_dg on (a, b]. Throws InvalidArgument on a mismatched
/// certificate or a < x < b violated.
double passage_lower_bound_down(const TestFunction& g, double a, double b, double x,
                                const BoundCertificate& cert);

/// P{tau_b^+ < tau_a^-} >= max(0, (g(x) - g(a)) / sup_{[a,b)} g) for g
/// certified with L_ge_dg on [a, b). Throws on a mismatched certificate or an
/// unbounded g.
double passage_lower_bound_up(const TestFunction& g, double a, double b, double x,
                              const BoundCertificate& cert);

/// c(u) = int_{1/u}^inf [1 - (1+z)^-rho] z^-2 dz by quadrature.
double explosion_c(double u, double rho);

/// Smallest u0 in the doubling sequence 2, 4, 8, ... with
/// c(u0) - rho (1 + rho) > 0, rho = theta - 1. Requires theta > 1 and
/// beta <= theta + 1.
double explosion_threshold_u0(const ModelParams& params);

/// (1 - 2^-rho) * inner: extinction from x >= c chained through c/2.
double chain_extinction_bound(double x, double c, double rho, double inner);

/// Smallest lambda with a^beta lambda (1 - e^{-lambda/2}) / 2 - b^theta >= target.
double canonical_lambda0(double a, double b, const ModelParams& params, double target = 1.0);

/// rho (1-rho) 2^{rho-3} c^{beta+rho-1} - 1/(1-rho)
double power_gap_c_tilde(double c, double rho, double beta);

/// Half the largest c for which power_gap_c_tilde(c, rho, beta) > 0.
/// Requires beta < 1 and 0 < rho < 1 - beta.
double canonical_power_gap_c(double rho, double beta);

/// (n^{beta-1}(1 + 1/ln 3) + n^theta c_n) / ln ln 6 with c_n the sup of the
/// patched loglog_zero(n) on [1, inf).
double loglog_zero_reference_d(int n, const ModelParams& params);

std::string to_json(const BoundCertificate& cert);
std::string to_json(const Refusal& refusal);
std::string to_json(const BoundaryClassification& c, const ModelParams& params);

} // namespace neveu
