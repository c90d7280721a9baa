#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "infonoise/grid.hpp"

namespace infonoise {

// Finite dataset defining the empirical prior. Samples are stored row-major
// (N rows of d values) with squared norms cached for the distance expansion
// ||x - x_i||^2 = ||x||^2 + ||x_i||^2 - 2 x.x_i.
class Dataset {
public:
    Dataset(std::size_t dim, std::vector<double> flat_samples);

    static Dataset from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t size() const { return n_; }
    std::size_t dim() const { return d_; }
    std::span<const double> sample(std::size_t i) const {
        return {data_.data() + i * d_, d_};
    }
    double sq_norm(std::size_t i) const { return sq_norms_[i]; }

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> data_;
    std::vector<double> sq_norms_;
};

struct PosteriorStats {
    std::vector<double> weights;  // simplex over the N atoms
    std::vector<double> mean;     // Bayes denoiser x_hat*
    double trace_cov = 0.0;       // conditional MSE
};

// Softmax posterior over the atoms, computed in log space. Weights, mean
// and trace covariance in one pass.
PosteriorStats posterior_stats(const Dataset& data, std::span<const double> x, double sigma);

std::vector<double> posterior_weights(const Dataset& data, std::span<const double> x, double sigma);
std::vector<double> bayes_denoiser(const Dataset& data, std::span<const double> x, double sigma);
double posterior_trace_cov(const Dataset& data, std::span<const double> x, double sigma);

// Monte-Carlo mmse(sigma_k): average posterior_trace_cov over n_mc draws of
// x0 + sigma_k*eps with x0 uniform over the atoms. Each cell owns a
// seed-derived substream, so values do not depend on evaluation order.
Profile mmse_profile(const Dataset& data, const LogGrid& grid, std::size_t n_mc,
                     std::uint64_t seed);

// Entropy rate dH/dsigma = mmse/sigma^3, per cell.
Profile entropy_rate_profile(const Profile& mmse);

// Negated log-SNR derivative of the conditional entropy: mmse/(2 sigma^2).
double entropy_rate_logsnr(double mmse_value, double sigma);

// Mixture log-density of the noisy marginal at x.
double log_density(const Dataset& data, std::span<const double> x, double sigma);

// Score via the denoiser identity: (x_hat* - x)/sigma^2.
std::vector<double> score(const Dataset& data, std::span<const double> x, double sigma);

// Closed-form reference: isotropic Gaussian prior N(0, s^2 I_d).
struct GaussianPrior {
    double s = 1.0;
    std::size_t d = 1;
};

// mmse = d s^2 sigma^2 / (s^2 + sigma^2)
double gaussian_mmse(const GaussianPrior& prior, double sigma);
// H[x0|x_sigma] = (d/2) log(2 pi e s^2 sigma^2 / (s^2 + sigma^2))
double gaussian_cond_entropy(const GaussianPrior& prior, double sigma);

}  // namespace infonoise
