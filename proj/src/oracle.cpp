#include "infonoise/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "infonoise/errors.hpp"
#include "infonoise/rng.hpp"

namespace infonoise {

Dataset::Dataset(std::size_t dim, std::vector<double> flat_samples) : d_(dim), data_(std::move(flat_samples)) {
    if (d_ < 1) {
        throw ConfigError("dataset dimension must be >= 1");
    }
    if (data_.empty() || data_.size() % d_ != 0) {
        throw ShapeError("flat sample buffer of size " + std::to_string(data_.size()) +
                         " is not a multiple of d=" + std::to_string(d_));
    }
    n_ = data_.size() / d_;
    for (double v : data_) {
        if (!std::isfinite(v)) {
            throw DataError("dataset contains a non-finite value");
        }
    }
    sq_norms_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d_; ++j) {
            acc += data_[i * d_ + j] * data_[i * d_ + j];
        }
        sq_norms_[i] = acc;
    }
}

Dataset Dataset::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) {
        throw DataError("dataset needs at least one sample");
    }
    const std::size_t d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (const auto& r : rows) {
        if (r.size() != d) {
            throw ShapeError("ragged dataset rows");
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return Dataset(d, std::move(flat));
}

namespace {

void check_query(const Dataset& data, std::span<const double> x, double sigma) {
    if (!(sigma > 0.0)) {
        throw DomainError("oracle query requires sigma > 0, got " + std::to_string(sigma));
    }
    if (x.size() != data.dim()) {
        throw ShapeError("query dimension " + std::to_string(x.size()) + " != dataset dimension " +
                         std::to_string(data.dim()));
    }
}

// Squared distances ||x - x_i||^2 via the cached-norm expansion, with a
// direct recomputation when cancellation eats 6 or more digits.
void squared_distances(const Dataset& data, std::span<const double> x, std::vector<double>& out) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    out.resize(n);
    double xx = 0.0;
    for (double v : x) {
        xx += v * v;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = data.sample(i);
        double cross = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            cross += x[j] * xi[j];
        }
        double d2 = xx + data.sq_norm(i) - 2.0 * cross;
        const double scale = xx + data.sq_norm(i);
        if (d2 < 1e-6 * scale) {
            double direct = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = x[j] - xi[j];
                direct += diff * diff;
            }
            d2 = direct;
        }
        out[i] = std::max(d2, 0.0);
    }
}

// logits_i = -||x - x_i||^2 / (2 sigma^2); returns logsumexp(logits)
double fill_logits(const Dataset& data, std::span<const double> x, double sigma,
                   std::vector<double>& logits) {
    squared_distances(data, x, logits);
    const double inv = -0.5 / (sigma * sigma);
    double peak = -std::numeric_limits<double>::infinity();
    for (auto& v : logits) {
        v *= inv;
        peak = std::max(peak, v);
    }
    double acc = 0.0;
    for (double v : logits) {
        acc += std::exp(v - peak);
    }
    return peak + std::log(acc);
}

}  // namespace

PosteriorStats posterior_stats(const Dataset& data, std::span<const double> x, double sigma) {
    check_query(data, x, sigma);
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    PosteriorStats stats;
    stats.weights.resize(n);
    const double lse = fill_logits(data, x, sigma, stats.weights);
    if (!std::isfinite(lse)) {
        // every logit overflowed to -inf; the posterior limit is a point
        // mass on the nearest atom
        std::vector<double> d2;
        squared_distances(data, x, d2);
        const auto nearest = static_cast<std::size_t>(
            std::min_element(d2.begin(), d2.end()) - d2.begin());
        stats.weights.assign(n, 0.0);
        stats.weights[nearest] = 1.0;
    } else {
        for (auto& w : stats.weights) {
            w = std::exp(w - lse);
        }
    }
    stats.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = data.sample(i);
        for (std::size_t j = 0; j < d; ++j) {
            stats.mean[j] += stats.weights[i] * xi[j];
        }
    }
    stats.trace_cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = data.sample(i);
        double dist2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = xi[j] - stats.mean[j];
            dist2 += diff * diff;
        }
        stats.trace_cov += stats.weights[i] * dist2;
    }
    return stats;
}

std::vector<double> posterior_weights(const Dataset& data, std::span<const double> x, double sigma) {
    return posterior_stats(data, x, sigma).weights;
}

std::vector<double> bayes_denoiser(const Dataset& data, std::span<const double> x, double sigma) {
    return posterior_stats(data, x, sigma).mean;
}

double posterior_trace_cov(const Dataset& data, std::span<const double> x, double sigma) {
    return posterior_stats(data, x, sigma).trace_cov;
}

Profile mmse_profile(const Dataset& data, const LogGrid& grid, std::size_t n_mc,
                     std::uint64_t seed) {
    if (n_mc < 1) {
        throw ConfigError("mmse_profile needs n_mc >= 1");
    }
    Profile out;
    out.grid = grid;
    out.values.assign(grid.K, 0.0);
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    std::vector<double> x(d);
    for (std::size_t k = 0; k < grid.K; ++k) {
        auto rng = substream(seed, k);
        const double sigma = grid.centers[k];
        double acc = 0.0;
        for (std::size_t t = 0; t < n_mc; ++t) {
            const auto i = std::min<std::size_t>(
                static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)), n - 1);
            const auto x0 = data.sample(i);
            for (std::size_t j = 0; j < d; ++j) {
                x[j] = x0[j] + sigma * normal01(rng);
            }
            acc += posterior_trace_cov(data, x, sigma);
        }
        out.values[k] = acc / static_cast<double>(n_mc);
    }
    return out;
}

Profile entropy_rate_profile(const Profile& mmse) {
    Profile out = mmse;
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        if (mmse.values[k] < 0.0) {
            throw DomainError("entropy_rate_profile requires nonnegative mmse values");
        }
        const double s = mmse.grid.centers[k];
        out.values[k] = mmse.values[k] / (s * s * s);
    }
    return out;
}

double entropy_rate_logsnr(double mmse_value, double sigma) {
    if (!(sigma > 0.0)) {
        throw DomainError("entropy_rate_logsnr requires sigma > 0");
    }
    return 0.5 * mmse_value / (sigma * sigma);
}

double log_density(const Dataset& data, std::span<const double> x, double sigma) {
    check_query(data, x, sigma);
    std::vector<double> logits;
    const double lse = fill_logits(data, x, sigma, logits);
    const double d = static_cast<double>(data.dim());
    return -0.5 * d * std::log(2.0 * M_PI * sigma * sigma) + lse -
           std::log(static_cast<double>(data.size()));
}

std::vector<double> score(const Dataset& data, std::span<const double> x, double sigma) {
    auto stats = posterior_stats(data, x, sigma);
    std::vector<double> out(data.dim());
    const double inv = 1.0 / (sigma * sigma);
    for (std::size_t j = 0; j < data.dim(); ++j) {
        out[j] = (stats.mean[j] - x[j]) * inv;
    }
    return out;
}

namespace {

void check_prior(const GaussianPrior& prior, double sigma) {
    if (!(prior.s > 0.0) || prior.d < 1) {
        throw ConfigError("gaussian prior requires s > 0 and d >= 1");
    }
    if (!(sigma > 0.0)) {
        throw DomainError("gaussian oracle requires sigma > 0");
    }
}

}  // namespace

double gaussian_mmse(const GaussianPrior& prior, double sigma) {
    check_prior(prior, sigma);
    const double s2 = prior.s * prior.s;
    const double g2 = sigma * sigma;
    return static_cast<double>(prior.d) * s2 * g2 / (s2 + g2);
}

double gaussian_cond_entropy(const GaussianPrior& prior, double sigma) {
    check_prior(prior, sigma);
    const double s2 = prior.s * prior.s;
    const double g2 = sigma * sigma;
    const double post_var = s2 * g2 / (s2 + g2);
    return 0.5 * static_cast<double>(prior.d) * std::log(2.0 * M_PI * M_E * post_var);
}

}  // namespace infonoise
