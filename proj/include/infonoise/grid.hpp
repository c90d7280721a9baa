#pragma once

#include <cstddef>
#include <vector>

namespace infonoise {

struct SigmaRange {
    double sigma_min = 0.002;
    double sigma_max = 80.0;
};

// Throws ConfigError unless 0 < sigma_min < sigma_max and both are finite.
void validate_range(const SigmaRange& range);

// Fixed partition of [sigma_min, sigma_max] into K cells of equal width in
// log(sigma). Cell k is I_k = [edges[k], edges[k+1]) (the last cell is
// closed), its center is the geometric midpoint sqrt(edges[k]*edges[k+1]).
struct LogGrid {
    SigmaRange range;
    std::size_t K = 0;
    std::vector<double> edges;    // K+1, edges[0]=sigma_min, edges[K]=sigma_max
    std::vector<double> centers;  // K
    std::vector<double> widths;   // K, edges[k+1]-edges[k]
};

LogGrid build_log_grid(const SigmaRange& range, std::size_t K);

// Index k with sigma in I_k; sigma == sigma_max maps to K-1. O(1) via log
// arithmetic plus a boundary fix-up. Throws DomainError out of range.
std::size_t locate_bin(const LogGrid& grid, double sigma);

// Nonnegative-or-signed tabulated function over the cell centers.
struct Profile {
    LogGrid grid;
    std::vector<double> values;  // one per center
};

// Trapezoid rule in sigma over [sigma_min, centers..., sigma_max] with
// constant extension of the boundary values to the range endpoints.
double integrate(const Profile& profile);

// Normalized density over the grid. `density` holds values at centers whose
// trapezoid integral is 1; `cdf` holds the cumulative per-cell masses
// density[k]*widths[k] at the edges, renormalized so cdf[0]=0 and cdf[K]=1.
// The CDF is piecewise linear in sigma between edges.
struct TabulatedDensity {
    LogGrid grid;
    std::vector<double> density;  // K
    std::vector<double> cdf;      // K+1
};

// Throws DegenerateError if any value is negative or the integral is zero.
TabulatedDensity normalize_to_density(const Profile& profile);

// Generalized inverse of the piecewise-linear CDF. z=0 -> sigma_min,
// z=1 -> sigma_max; strictly monotone in z wherever density > 0.
double inverse_cdf_sample(const TabulatedDensity& density, double z);

// Piecewise-linear interpolation of the density values in log(sigma)
// between adjacent centers, constant beyond the outermost centers.
double evaluate_density(const TabulatedDensity& density, double sigma);

// CDF at an arbitrary sigma (linear between edges).
double evaluate_cdf(const TabulatedDensity& density, double sigma);

}  // namespace infonoise
