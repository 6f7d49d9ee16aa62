#include "neveu/model.hpp"

#include "neveu/error.hpp"
#include "neveu/quadrature.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace neveu {

ModelParams::ModelParams(double beta, double theta, double r) : beta_(beta), theta_(theta), r_(r) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw InvalidArgument("ModelParams: beta must be finite and >= 0");
    if (!(theta >= 0.0) || !std::isfinite(theta))
        throw InvalidArgument("ModelParams: theta must be finite and >= 0");
    if (!(r > 0.0) || !std::isfinite(r))
        throw InvalidArgument("ModelParams: r must be finite and > 0");
}

JumpBand::JumpBand(double lo, double hi)
    : lo_(lo), hi_(hi), inv_lo_(1.0 / lo), inv_hi_(std::isinf(hi) ? 0.0 : 1.0 / hi) {
    if (!(lo > 0.0) || !std::isfinite(lo) || !(hi > lo))
        throw InvalidArgument("JumpBand: need 0 < lo < hi");
}

double band_rate(const JumpBand& band) noexcept { return band.total_rate(); }

double band_cdf(const JumpBand& band, double z) noexcept {
    if (z <= band.lo()) return 0.0;
    if (z >= band.hi()) return 1.0;
    return (band.inv_lo() - 1.0 / z) / band.total_rate();
}

namespace {

// (e^x - 1 - x) / x^2, accurate for all x <= 0.
double phi2(double x) {
    if (std::abs(x) < 0.1) {
        // Taylor series: sum_k x^k / (k+2)!
        double term = 0.5, sum = 0.5;
        for (int k = 1; k < 12; ++k) {
            term *= x / (k + 2);
            sum += term;
        }
        return sum;
    }
    return (std::expm1(x) - x) / (x * x);
}

} // namespace

double branching_mechanism(double u, const ModelParams& params) {
    if (!(u > 0.0) || !std::isfinite(u))
        throw InvalidArgument("branching_mechanism: u must be finite and > 0");
    const double r = params.r();

    // Compensated part on (0, r]: integrand u^2 phi2(-zu), the Taylor
    // remainder form, which stays bounded as z -> 0.
    auto small = [u](double z) { return u * u * phi2(-z * u); };
    // Uncompensated part on (r, inf), mapped to (0, 1] by z = r / t.
    auto big = [u, r](double t) { return std::expm1(-u * r / t) / r; };

    quad::Options opt;
    opt.abs_tol = 1e-300;
    opt.rel_tol = 1e-13;
    opt.max_panels = 2000;

    const double scale = 1.0 / u;
    std::vector<double> small_pts = quad::decade_breakpoints(0.0, r, {scale});
    const auto s = quad::integrate(small, std::span<const double>(small_pts), opt);
    std::vector<double> big_pts = quad::decade_breakpoints(0.0, 1.0, {std::min(1.0, u * r)});
    const auto b = quad::integrate(big, std::span<const double>(big_pts), opt);

    const double value = s.value + b.value;
    const double err = s.abs_error + b.abs_error;
    const double magnitude = std::abs(s.value) + std::abs(b.value);
    if (err > 1e-10 * magnitude) {
        std::ostringstream os;
        os << "branching_mechanism: relative error " << err / magnitude << " above 1e-10";
        throw QuadratureError(os.str(), err);
    }
    return value;
}

double quoted_psi_constant(double r) noexcept { return std::log(r) - 5.0 * std::exp(-1.0) + 1.0; }

} // namespace neveu
