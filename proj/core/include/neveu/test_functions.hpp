#pragma once

// Catalog of C^2 test functions g with closed-form derivatives, used as
// Lyapunov functions in the boundary-classification criteria.

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace neveu {

/// Closed interval [lo, hi] on the half line; hi may be +infinity.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const noexcept { return !(hi > lo); }
    bool contains(double u) const noexcept { return u >= lo && u <= hi; }
};

struct TestFunction {
    using Fn = std::function<double(double)>;

    Fn eval;
    Fn d1;
    Fn d2;
    /// Where the closed form holds.
    Interval core_domain;
    /// Where a constructed C^2 extension is used (empty if none).
    Interval patch_domain;
    /// Points where closed form and patch meet; g''' may jump there.
    std::vector<double> seams;
    std::string tag;
    /// The delta in (0,1) used for the increment-regularity condition.
    double regularity_delta = 0.5;
    /// lim_{u->inf} g(u) when known in closed form (+inf if g is unbounded).
    std::optional<double> limit_at_infinity;

    double operator()(double u) const { return eval(u); }

    /// Wraps a user-supplied (g, g', g'') triple defined on (0, inf).
    static TestFunction from_triple(std::string tag, Fn g, Fn g1, Fn g2,
                                    double regularity_delta = 0.5);
};

// Catalog entries.
TestFunction exp_neg(double lambda);
TestFunction exp_capped(double b);
TestFunction power_gap(double c, double rho);
TestFunction one_minus_inv_pow(double rho);
TestFunction inv_pow(double rho);
TestFunction loglog_zero(int n);
TestFunction loglog_inf(int n);

/// Builds a catalog entry from a tag such as "exp_neg:lambda=2",
/// "power_gap:c=0.1,rho=0.25" or "loglog_zero:n=3". Throws InvalidArgument
/// for unknown names or missing/invalid parameters.
TestFunction make_test_function(const std::string& tag);

/// Names accepted by make_test_function with their parameter keys.
std::vector<std::string> catalog_names();

struct RegularityWitness {
    bool bounded = false;
    /// Empirical sup of |g'| + |g''| + |g(u+z) - g(u)| / z^delta.
    double sup = 0.0;
    /// Where the largest term was seen (the offending point when unbounded).
    double u = 0.0;
    double z = 0.0;
    int grid_size = 0;
};

/// Samples the regularity supremum over u in [v, 1e4 v] and z in [1, 1e6]
/// (log-spaced) and compares against the nested grid of twice the density.
/// Bounded iff the sup is finite, changes by less than 5% under refinement, and does not
/// keep growing toward the edges of the sampled z range.
RegularityWitness check_regularity(const TestFunction& f, double v, double delta, int grid_size = 64);

/// Max relative error between central finite differences of eval and d1, and
/// of d1 and d2, over 200 log-spaced points of the core domain (clipped to
/// [1e-3, 1e3]) plus two points straddling every seam.
double derivative_selfcheck(const TestFunction& f);

/// Largest value of g on [lo, hi] sampled on a log grid. For hi = inf the
/// grid is cut at 1e15 and combined with limit_at_infinity; without a known
/// limit, values still growing at the end of the grid count as unbounded.
/// Returns nullopt when g is (or looks) unbounded.
std::optional<double> sampled_sup(const TestFunction& f, double lo, double hi);

} // namespace neveu
