#include "neveu/stats.hpp"

#include "neveu/error.hpp"

#include <algorithm>
#include <cmath>

namespace neveu {

WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n, double z) {
    if (k > n) throw InvalidArgument("wilson_interval: k > n");
    if (n == 0) return {};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    // Exact ends at k = 0 and k = n; clamp rounding elsewhere so lo <= p <= hi.
    const double lo = k == 0 ? 0.0 : std::clamp(center - half, 0.0, p);
    const double hi = k == n ? 1.0 : std::clamp(center + half, p, 1.0);
    return {lo, hi};
}

} // namespace neveu
