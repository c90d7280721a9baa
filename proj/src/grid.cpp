#include "infonoise/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infonoise/errors.hpp"

namespace infonoise {

void validate_range(const SigmaRange& range) {
    if (!std::isfinite(range.sigma_min) || !std::isfinite(range.sigma_max) ||
        range.sigma_min <= 0.0 || range.sigma_min >= range.sigma_max) {
        throw ConfigError("invalid sigma range [" + std::to_string(range.sigma_min) + ", " +
                          std::to_string(range.sigma_max) + "]: need 0 < sigma_min < sigma_max");
    }
}

LogGrid build_log_grid(const SigmaRange& range, std::size_t K) {
    validate_range(range);
    if (K < 2) {
        throw ConfigError("log grid needs K >= 2 cells, got " + std::to_string(K));
    }
    LogGrid grid;
    grid.range = range;
    grid.K = K;
    grid.edges.resize(K + 1);
    grid.centers.resize(K);
    grid.widths.resize(K);
    const double log_lo = std::log(range.sigma_min);
    const double log_hi = std::log(range.sigma_max);
    for (std::size_t k = 0; k <= K; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(K);
        grid.edges[k] = std::exp(log_lo + t * (log_hi - log_lo));
    }
    grid.edges[0] = range.sigma_min;  // pin exactly
    grid.edges[K] = range.sigma_max;
    for (std::size_t k = 0; k < K; ++k) {
        grid.centers[k] = std::sqrt(grid.edges[k] * grid.edges[k + 1]);
        grid.widths[k] = grid.edges[k + 1] - grid.edges[k];
    }
    return grid;
}

std::size_t locate_bin(const LogGrid& grid, double sigma) {
    if (!(sigma >= grid.range.sigma_min && sigma <= grid.range.sigma_max)) {
        throw DomainError("sigma " + std::to_string(sigma) + " outside grid range [" +
                          std::to_string(grid.range.sigma_min) + ", " +
                          std::to_string(grid.range.sigma_max) + "]");
    }
    if (sigma == grid.range.sigma_max) {
        return grid.K - 1;
    }
    const double t = std::log(sigma / grid.range.sigma_min) /
                     std::log(grid.range.sigma_max / grid.range.sigma_min);
    auto k = static_cast<std::ptrdiff_t>(t * static_cast<double>(grid.K));
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(grid.K) - 1);
    // log arithmetic can be off by one ulp at cell boundaries
    while (k > 0 && sigma < grid.edges[static_cast<std::size_t>(k)]) {
        --k;
    }
    while (k + 1 < static_cast<std::ptrdiff_t>(grid.K) &&
           sigma >= grid.edges[static_cast<std::size_t>(k) + 1]) {
        ++k;
    }
    return static_cast<std::size_t>(k);
}

namespace {

void check_profile(const Profile& profile) {
    if (profile.grid.K == 0 || profile.values.size() != profile.grid.K) {
        throw ShapeError("profile has " + std::to_string(profile.values.size()) +
                         " values for a grid with K=" + std::to_string(profile.grid.K));
    }
}

}  // namespace

double integrate(const Profile& profile) {
    check_profile(profile);
    const auto& g = profile.grid;
    const auto& v = profile.values;
    const std::size_t K = g.K;
    // boundary cells extend their center value to the range endpoints
    double total = (g.centers[0] - g.range.sigma_min) * v[0];
    for (std::size_t k = 0; k + 1 < K; ++k) {
        total += 0.5 * (g.centers[k + 1] - g.centers[k]) * (v[k] + v[k + 1]);
    }
    total += (g.range.sigma_max - g.centers[K - 1]) * v[K - 1];
    return total;
}

TabulatedDensity normalize_to_density(const Profile& profile) {
    check_profile(profile);
    for (double v : profile.values) {
        if (!std::isfinite(v) || v < 0.0) {
            throw DegenerateError("profile has negative or non-finite values; cannot normalize");
        }
    }
    const double total = integrate(profile);
    if (total <= 0.0) {
        throw DegenerateError("profile integrates to zero; cannot normalize");
    }
    TabulatedDensity out;
    out.grid = profile.grid;
    const std::size_t K = out.grid.K;
    out.density.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        out.density[k] = profile.values[k] / total;
    }
    out.cdf.assign(K + 1, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        out.cdf[k + 1] = out.cdf[k] + out.density[k] * out.grid.widths[k];
    }
    const double mass = out.cdf[K];
    if (mass <= 0.0) {
        throw DegenerateError("density carries no mass");
    }
    for (std::size_t k = 1; k <= K; ++k) {
        out.cdf[k] /= mass;
    }
    out.cdf[K] = 1.0;  // exact endpoints
    return out;
}

double inverse_cdf_sample(const TabulatedDensity& density, double z) {
    if (!(z >= 0.0 && z <= 1.0)) {
        throw DomainError("inverse-CDF argument " + std::to_string(z) + " outside [0, 1]");
    }
    const auto& g = density.grid;
    if (z == 0.0) {
        return g.range.sigma_min;
    }
    if (z == 1.0) {
        return g.range.sigma_max;
    }
    // first edge with cdf > z; the segment before it contains z
    const auto it = std::upper_bound(density.cdf.begin(), density.cdf.end(), z);
    const auto m = static_cast<std::size_t>(it - density.cdf.begin());
    const std::size_t j = m - 1;
    const double lo = density.cdf[j];
    const double hi = density.cdf[m];
    return g.edges[j] + (z - lo) / (hi - lo) * (g.edges[m] - g.edges[j]);
}

double evaluate_density(const TabulatedDensity& density, double sigma) {
    const auto& g = density.grid;
    if (!(sigma >= g.range.sigma_min && sigma <= g.range.sigma_max)) {
        throw DomainError("sigma " + std::to_string(sigma) + " outside density range");
    }
    if (sigma <= g.centers.front()) {
        return density.density.front();
    }
    if (sigma >= g.centers.back()) {
        return density.density.back();
    }
    const auto it = std::upper_bound(g.centers.begin(), g.centers.end(), sigma);
    const auto k = static_cast<std::size_t>(it - g.centers.begin()) - 1;
    const double t = std::log(sigma / g.centers[k]) / std::log(g.centers[k + 1] / g.centers[k]);
    return (1.0 - t) * density.density[k] + t * density.density[k + 1];
}

double evaluate_cdf(const TabulatedDensity& density, double sigma) {
    const auto& g = density.grid;
    if (!(sigma >= g.range.sigma_min && sigma <= g.range.sigma_max)) {
        throw DomainError("sigma " + std::to_string(sigma) + " outside density range");
    }
    if (sigma == g.range.sigma_max) {
        return 1.0;
    }
    const std::size_t k = locate_bin(g, sigma);
    const double t = (sigma - g.edges[k]) / g.widths[k];
    return density.cdf[k] + t * (density.cdf[k + 1] - density.cdf[k]);
}

}  // namespace infonoise
