#pragma once

// Model parameters, the jump measure z^-2 dz restricted to bands, and the
// Neveu branching mechanism.

#include <limits>

namespace neveu {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Parameters (beta, theta, r) of the nonlinear Neveu SDE: small jumps (z < r)
/// arrive at rate X^beta, big jumps (z >= r) at rate X^theta.
class ModelParams {
public:
    /// Throws InvalidArgument unless beta >= 0, theta >= 0 and r > 0.
    ModelParams(double beta, double theta, double r = 1.0);

    double beta() const noexcept { return beta_; }
    double theta() const noexcept { return theta_; }
    double r() const noexcept { return r_; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    double beta_;
    double theta_;
    double r_;
};

/// The measure z^-2 dz restricted to [lo, hi); hi may be +infinity.
class JumpBand {
public:
    /// Throws InvalidArgument unless 0 < lo < hi.
    JumpBand(double lo, double hi);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double inv_lo() const noexcept { return inv_lo_; }
    /// 1/hi, exactly 0 for an unbounded band.
    double inv_hi() const noexcept { return inv_hi_; }
    double total_rate() const noexcept { return inv_lo_ - inv_hi_; }

private:
    double lo_;
    double hi_;
    double inv_lo_;
    double inv_hi_;
};

/// Mass of z^-2 dz on the band: 1/lo - 1/hi.
double band_rate(const JumpBand& band) noexcept;

/// Inverse-CDF sample from the density proportional to z^-2 on the band.
/// `u` must lie in (0, 1); the result lies in [lo, hi).
inline double sample_jump(const JumpBand& band, double u) noexcept {
    return 1.0 / (band.inv_lo() - u * (band.inv_lo() - band.inv_hi()));
}

/// CDF of the normalised band density, used by goodness-of-fit checks.
double band_cdf(const JumpBand& band, double z) noexcept;

/// psi(u) = int_0^inf [e^{-zu} - 1 + zu 1{z<=r}] z^-2 dz by adaptive
/// quadrature (relative accuracy 1e-10 or better). Requires u > 0.
double branching_mechanism(double u, const ModelParams& params);

/// The closed form ln r - 5/e + 1 sometimes quoted for the psi constant. Kept
/// only so reports can show how far it is from the quadrature value.
double quoted_psi_constant(double r) noexcept;

} // namespace neveu
