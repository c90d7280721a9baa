#pragma once

#include <cstddef>

#include "infonoise/grid.hpp"

namespace infonoise {

// Smooth low-noise gate g_{c,n}(sigma) = sigma^n / (sigma^n + c^n).
struct GateParams {
    double c = 1.0;  // pivot
    double n = 3.0;  // exponent, >= 2
};

// Strictly increasing in sigma, equals 1/2 at sigma = c. Evaluated as a
// logistic in log(sigma/c) so extreme ratios neither overflow nor underflow.
double gate(double sigma, const GateParams& params);

// Per-noise loss weight of the training objective.
struct Weighting {
    enum class Kind { unit, edm };
    Kind kind = Kind::unit;
    double sigma_data = 0.5;  // only meaningful for edm

    static Weighting unit() { return Weighting{Kind::unit, 0.5}; }
    static Weighting edm(double sigma_data);
};

// unit -> 1; edm -> (sigma^2 + sigma_data^2) / (sigma * sigma_data)^2.
double loss_weight(const Weighting& w, double sigma);

struct PivotMethod {
    enum class Kind { onset, powerlaw };
    Kind kind = Kind::onset;
    double p = 0.002;         // onset threshold in (0, 1)
    std::size_t window = 9;   // powerlaw: sliding-window size W (cells)
    double slope_tol = 0.15;  // powerlaw: slope deviation tolerance tau

    static PivotMethod onset(double p = 0.002);
    static PivotMethod powerlaw(std::size_t window = 9, double slope_tol = 0.15);
};

// Onset-of-information rule: max-normalize the profile and return the
// largest grid center sigma such that the normalized profile stays below p
// on every center >= sigma. Returns sigma_min when the crossing set is
// empty (gate inert). Throws DegenerateError on an all-zero profile.
double calibrate_pivot_onset(const Profile& profile, double p);

// Power-law boundary rule: per-cell log-log slopes from least squares over
// sliding windows of `window` cells; grows the segment adjacent to
// sigma_min while every slope stays within `slope_tol` of the segment mean,
// and returns the segment's upper edge. Falls back to the log-log curvature
// knee when the segment is shorter than one window. Throws DegenerateError
// if any profile value is nonpositive.
double calibrate_pivot_powerlaw(const Profile& profile, std::size_t window, double slope_tol);

double calibrate_pivot(const Profile& profile, const PivotMethod& method);

// Pointwise product values[k] * gate(centers[k]).
Profile apply_gate(const Profile& profile, const GateParams& params);

// 3-point moving average on the log grid (boundary cells average the
// neighbors that exist).
Profile smooth_profile(const Profile& profile);

// Target allocation rho and its CDF u ("entropic time").
struct Allocation {
    TabulatedDensity rho;

    double entropic_time(double sigma) const { return evaluate_cdf(rho, sigma); }
    double sigma_at_time(double u) const { return inverse_cdf_sample(rho, u); }
};

Allocation build_allocation(const Profile& gated);

// Sampling schedule pi(sigma_k) proportional to rho(sigma_k)/w(sigma_k),
// renormalized, so the effective emphasis pi*w is proportional to rho.
// Throws ConfigError if w is not strictly positive at every center.
TabulatedDensity schedule_from_allocation(const Allocation& alloc, const Weighting& w);

// Same construction for an arbitrary positive weight function.
TabulatedDensity schedule_from_weight_fn(const Allocation& alloc, double (*w)(double));

// phi(sigma_k) = pi(sigma_k) * w(sigma_k).
Profile effective_emphasis(const TabulatedDensity& pi, const Weighting& w);

struct BaselineSampler {
    enum class Kind { log_uniform, log_normal };
    Kind kind = Kind::log_uniform;
    double mu = -1.2;  // log_normal: mean of log(sigma)
    double s = 1.2;    // log_normal: std of log(sigma)

    static BaselineSampler log_uniform();
    static BaselineSampler log_normal(double mu, double s);
};

// log_uniform: density proportional to 1/sigma on the range;
// log_normal: density of sigma with log(sigma) ~ Normal(mu, s^2), truncated
// to the range and renormalized.
TabulatedDensity baseline_sampler(const BaselineSampler& kind, const LogGrid& grid);

}  // namespace infonoise
