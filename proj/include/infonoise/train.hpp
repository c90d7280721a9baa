#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "infonoise/infer.hpp"
#include "infonoise/oracle.hpp"
#include "infonoise/scheduler.hpp"

namespace infonoise {

// Small fully-connected net: tanh hidden layers, linear output. Weights are
// row-major (sizes[l+1] x sizes[l]); explicit analytic gradients, no
// autodiff involved.
struct Mlp {
    std::vector<std::size_t> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static Mlp create(std::vector<std::size_t> sizes, std::mt19937_64& rng);

    std::vector<double> forward(std::span<const double> input) const;
    std::size_t layer_count() const { return sizes.size() - 1; }
};

// Gradient (or velocity) container mirroring an Mlp's parameters.
struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static MlpGradients zeros_like(const Mlp& mlp);
    void reset();
};

// Accumulates coeff * d/dtheta ||target - mlp(input)||^2 into grads and
// returns the unweighted squared error of this item.
double backprop_squared_error(const Mlp& mlp, std::span<const double> input,
                              std::span<const double> target, double coeff, MlpGradients& grads);

// Denoiser wrapper: the net consumes [x..., log(sigma)] and emits x_hat.
class MlpDenoiser : public Denoiser {
public:
    MlpDenoiser(std::size_t data_dim, const std::vector<std::size_t>& hidden, std::uint64_t seed);
    MlpDenoiser(std::size_t data_dim, Mlp net);

    std::vector<double> denoise(std::span<const double> x, double sigma) const override;
    std::size_t dim() const override { return data_dim_; }

    const Mlp& net() const { return net_; }
    Mlp& net() { return net_; }

private:
    std::size_t data_dim_;
    Mlp net_;
};

struct TrainItem {
    std::vector<double> x0;
    double sigma = 1.0;
    std::vector<double> eps;
};

struct LossAndGrad {
    double objective = 0.0;                 // mean of w(sigma) * per-item loss
    MlpGradients grads;                     // gradient of the objective
    std::vector<double> per_item_loss;      // unweighted ||x0 - x_hat||^2, for the scheduler
};

// Per item: noisy input x0 + sigma*eps, loss ||x0 - x_hat||^2; the
// objective averages w(sigma)*loss over the batch. The unweighted losses
// are returned separately because the scheduler consumes those, not w*loss.
LossAndGrad loss_and_grad(const MlpDenoiser& denoiser, std::span<const TrainItem> batch,
                          const Weighting& w);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::uint64_t steps = 0;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    bool sigma_per_batch = false;  // default: one sigma per item
    std::uint64_t log_every = 100;
};

struct TrainLogRow {
    std::uint64_t step = 0;
    double mean_loss = 0.0;
    std::uint64_t snapshot_version = 0;
};

struct TrainResult {
    std::vector<TrainLogRow> log;
};

// One optimizer update per step: draw sigma through the scheduler, form the
// noisy batch, SGD(+momentum) on the weighted objective, feed the
// unweighted losses back, and let the scheduler refresh. Deterministic
// given cfg.seed.
TrainResult train_loop(const Dataset& data, Scheduler& sched, MlpDenoiser& denoiser,
                       const TrainConfig& cfg);

}  // namespace infonoise
