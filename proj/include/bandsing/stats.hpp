#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace bandsing {

/// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct ProportionInterval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Wilson score interval for `successes` out of `trials` at quantile z.
inline ProportionInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ99) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    // the endpoints are exact at 0 and 1 but rounding can miss them
    const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

}  // namespace bandsing
