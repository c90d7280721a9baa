#include "infonoise/infer.hpp"

#include <cmath>
#include <string>

#include "infonoise/errors.hpp"

namespace infonoise {

InferenceGrid make_inference_grid(std::vector<double> nodes) {
    if (nodes.size() < 2) {
        throw ConfigError("inference grid needs at least two nodes");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i] > 0.0) || !std::isfinite(nodes[i])) {
            throw ConfigError("inference grid nodes must be positive and finite");
        }
        if (i > 0 && !(nodes[i] < nodes[i - 1])) {
            throw ConfigError("inference grid nodes must be strictly decreasing");
        }
    }
    return InferenceGrid{std::move(nodes)};
}

std::vector<double> GaussianPriorDenoiser::denoise(std::span<const double> x, double sigma) const {
    if (!(sigma > 0.0)) {
        throw DomainError("denoiser requires sigma > 0");
    }
    if (x.size() != prior_.d) {
        throw ShapeError("input dimension does not match the prior dimension");
    }
    const double s2 = prior_.s * prior_.s;
    const double shrink = s2 / (s2 + sigma * sigma);
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = shrink * x[j];
    }
    return out;
}

namespace {

// Normalized cumulative information coordinate over the rate's grid.
TabulatedDensity information_coordinate(const Profile& rate) {
    Profile weighted;
    weighted.grid = rate.grid;
    weighted.values.resize(rate.grid.K);
    for (std::size_t k = 0; k < rate.grid.K; ++k) {
        weighted.values[k] = rate.grid.centers[k] * rate.values[k];
    }
    return normalize_to_density(weighted);
}

void check_range_covered(const Profile& rate, const SigmaRange& range) {
    const auto& gr = rate.grid.range;
    const double tol = 1e-9;
    if (range.sigma_min < gr.sigma_min * (1.0 - tol) ||
        range.sigma_max > gr.sigma_max * (1.0 + tol)) {
        throw DomainError("rate profile does not cover the requested sigma range");
    }
}

}  // namespace

InferenceGrid infogrid(const Profile& rate, std::size_t N, const SigmaRange& range) {
    validate_range(range);
    if (N < 1) {
        throw ConfigError("infogrid needs N >= 1 steps");
    }
    check_range_covered(rate, range);
    const TabulatedDensity u = information_coordinate(rate);  // DegenerateError if rate is zero
    const auto& gr = rate.grid.range;
    const double lo = evaluate_cdf(u, std::max(range.sigma_min, gr.sigma_min));
    const double hi = evaluate_cdf(u, std::min(range.sigma_max, gr.sigma_max));
    if (!(hi > lo)) {
        throw DegenerateError("information coordinate is flat over the requested range");
    }
    std::vector<double> nodes(N + 1);
    nodes[0] = range.sigma_max;
    nodes[N] = range.sigma_min;
    for (std::size_t i = 1; i < N; ++i) {
        const double level = static_cast<double>(N - i) / static_cast<double>(N);
        nodes[i] = inverse_cdf_sample(u, lo + level * (hi - lo));
    }
    return make_inference_grid(std::move(nodes));
}

InferenceGrid reference_grid(std::size_t N, const SigmaRange& range, double rho_exp) {
    validate_range(range);
    if (N < 1) {
        throw ConfigError("reference grid needs N >= 1 steps");
    }
    if (!(rho_exp >= 1.0)) {
        throw ConfigError("reference grid exponent must be >= 1");
    }
    const double inv = 1.0 / rho_exp;
    const double top = std::pow(range.sigma_max, inv);
    const double bottom = std::pow(range.sigma_min, inv);
    std::vector<double> nodes(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(N);
        nodes[i] = std::pow(top + t * (bottom - top), rho_exp);
    }
    nodes[0] = range.sigma_max;
    nodes[N] = range.sigma_min;
    return make_inference_grid(std::move(nodes));
}

namespace {

void check_finite(const std::vector<double>& v, std::size_t step) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw DegenerateError("non-finite denoiser output at integration step " +
                                  std::to_string(step));
        }
    }
}

}  // namespace

std::vector<double> heun_sample(const Denoiser& denoiser, const InferenceGrid& grid,
                                std::span<const double> x_init) {
    const std::size_t N = grid.steps();
    if (N == 0) {
        throw ConfigError("heun_sample needs a grid with at least one step");
    }
    std::vector<double> x(x_init.begin(), x_init.end());
    const std::size_t d = x.size();
    std::vector<double> drift(d), x_euler(d);
    for (std::size_t i = 0; i < N; ++i) {
        const double s = grid.nodes[i];
        const double s_next = grid.nodes[i + 1];
        const double h = s_next - s;
        const auto xhat = denoiser.denoise(x, s);
        check_finite(xhat, i);
        for (std::size_t j = 0; j < d; ++j) {
            drift[j] = (x[j] - xhat[j]) / s;
            x_euler[j] = x[j] + h * drift[j];
        }
        if (i + 1 < N) {
            const auto xhat2 = denoiser.denoise(x_euler, s_next);
            check_finite(xhat2, i);
            for (std::size_t j = 0; j < d; ++j) {
                const double drift2 = (x_euler[j] - xhat2[j]) / s_next;
                x[j] += h * 0.5 * (drift[j] + drift2);
            }
        } else {
            x = x_euler;  // final step: plain Euler, no corrector
        }
    }
    return x;
}

double grid_uniformity(const InferenceGrid& grid, const Profile& rate) {
    const TabulatedDensity u = information_coordinate(rate);
    const auto& gr = rate.grid.range;
    const auto u_at = [&](double sigma) {
        return evaluate_cdf(u, std::clamp(sigma, gr.sigma_min, gr.sigma_max));
    };
    const std::size_t N = grid.steps();
    const double target = 1.0 / static_cast<double>(N);
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double du = u_at(grid.nodes[i]) - u_at(grid.nodes[i + 1]);
        worst = std::max(worst, std::abs(du - target));
    }
    return worst;
}

}  // namespace infonoise
