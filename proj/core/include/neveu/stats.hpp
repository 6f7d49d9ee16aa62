#pragma once

#include <cstdint>

namespace neveu {

/// Two-sided 95% standard normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
    double half_width() const noexcept { return 0.5 * (hi - lo); }
};

/// Wilson score interval for k successes in n trials; [0, 1] when n = 0.
/// Throws InvalidArgument when k > n.
WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z = kZ95);

} // namespace neveu
