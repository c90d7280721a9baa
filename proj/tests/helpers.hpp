#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "infonoise/grid.hpp"
#include "infonoise/rng.hpp"

namespace infonoise::testing {

// Kolmogorov-Smirnov statistic of n inverse-CDF draws against the density's
// own tabulated CDF.
inline double ks_statistic(const TabulatedDensity& density, std::size_t n, std::uint64_t seed) {
    auto rng = substream(seed, 900);
    std::vector<double> draws(n);
    for (auto& d : draws) {
        d = inverse_cdf_sample(density, uniform01(rng));
    }
    std::sort(draws.begin(), draws.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = evaluate_cdf(density, draws[i]);
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        worst = std::max({worst, std::abs(f - lo), std::abs(f - hi)});
    }
    return worst;
}

// Least-squares slope of log(values) against log(centers) over cells
// [first, last].
inline double loglog_slope(const Profile& profile, std::size_t first, std::size_t last) {
    double sx = 0.0, sy = 0.0;
    const auto n = static_cast<double>(last - first + 1);
    for (std::size_t k = first; k <= last; ++k) {
        sx += std::log(profile.grid.centers[k]);
        sy += std::log(profile.values[k]);
    }
    const double mx = sx / n, my = sy / n;
    double num = 0.0, den = 0.0;
    for (std::size_t k = first; k <= last; ++k) {
        const double dx = std::log(profile.grid.centers[k]) - mx;
        num += dx * (std::log(profile.values[k]) - my);
        den += dx * dx;
    }
    return num / den;
}

}  // namespace infonoise::testing
