#include "infonoise/train.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "infonoise/errors.hpp"
#include "infonoise/rng.hpp"

namespace infonoise {

Mlp Mlp::create(std::vector<std::size_t> sizes, std::mt19937_64& rng) {
    if (sizes.size() < 2) {
        throw ConfigError("mlp needs at least an input and an output layer");
    }
    for (std::size_t s : sizes) {
        if (s == 0) {
            throw ConfigError("mlp layer sizes must be positive");
        }
    }
    Mlp mlp;
    mlp.sizes = std::move(sizes);
    const std::size_t L = mlp.layer_count();
    mlp.weights.resize(L);
    mlp.biases.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t fan_in = mlp.sizes[l];
        const std::size_t fan_out = mlp.sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        mlp.weights[l].resize(fan_in * fan_out);
        for (auto& w : mlp.weights[l]) {
            w = bound * (2.0 * uniform01(rng) - 1.0);
        }
        mlp.biases[l].assign(fan_out, 0.0);
    }
    return mlp;
}

namespace {

// activations[l] holds the output of layer l (activations[0] = input)
void forward_trace(const Mlp& mlp, std::span<const double> input,
                   std::vector<std::vector<double>>& activations) {
    const std::size_t L = mlp.layer_count();
    activations.resize(L + 1);
    activations[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l < L; ++l) {
        const std::size_t in = mlp.sizes[l];
        const std::size_t out = mlp.sizes[l + 1];
        auto& a = activations[l + 1];
        a.assign(out, 0.0);
        const auto& prev = activations[l];
        for (std::size_t r = 0; r < out; ++r) {
            double z = mlp.biases[l][r];
            const double* wrow = mlp.weights[l].data() + r * in;
            for (std::size_t c = 0; c < in; ++c) {
                z += wrow[c] * prev[c];
            }
            a[r] = (l + 1 < L) ? std::tanh(z) : z;  // linear output layer
        }
    }
}

}  // namespace

std::vector<double> Mlp::forward(std::span<const double> input) const {
    if (input.size() != sizes.front()) {
        throw ShapeError("mlp input size " + std::to_string(input.size()) + " != " +
                         std::to_string(sizes.front()));
    }
    std::vector<std::vector<double>> acts;
    forward_trace(*this, input, acts);
    return acts.back();
}

MlpGradients MlpGradients::zeros_like(const Mlp& mlp) {
    MlpGradients g;
    g.weights.resize(mlp.weights.size());
    g.biases.resize(mlp.biases.size());
    for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
        g.weights[l].assign(mlp.weights[l].size(), 0.0);
        g.biases[l].assign(mlp.biases[l].size(), 0.0);
    }
    return g;
}

void MlpGradients::reset() {
    for (auto& w : weights) {
        w.assign(w.size(), 0.0);
    }
    for (auto& b : biases) {
        b.assign(b.size(), 0.0);
    }
}

double backprop_squared_error(const Mlp& mlp, std::span<const double> input,
                              std::span<const double> target, double coeff, MlpGradients& grads) {
    if (input.size() != mlp.sizes.front() || target.size() != mlp.sizes.back()) {
        throw ShapeError("backprop input/target sizes do not match the net");
    }
    std::vector<std::vector<double>> acts;
    forward_trace(mlp, input, acts);
    const std::size_t L = mlp.layer_count();
    const auto& out = acts[L];
    double loss = 0.0;
    std::vector<double> delta(out.size());
    for (std::size_t r = 0; r < out.size(); ++r) {
        const double err = out[r] - target[r];
        loss += err * err;
        delta[r] = coeff * 2.0 * err;  // d(coeff*loss)/d(out)
    }
    for (std::size_t l = L; l-- > 0;) {
        const std::size_t in = mlp.sizes[l];
        const std::size_t rows = mlp.sizes[l + 1];
        const auto& prev = acts[l];
        for (std::size_t r = 0; r < rows; ++r) {
            grads.biases[l][r] += delta[r];
            double* grow = grads.weights[l].data() + r * in;
            for (std::size_t c = 0; c < in; ++c) {
                grow[c] += delta[r] * prev[c];
            }
        }
        if (l == 0) {
            break;
        }
        std::vector<double> prev_delta(in, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* wrow = mlp.weights[l].data() + r * in;
            for (std::size_t c = 0; c < in; ++c) {
                prev_delta[c] += wrow[c] * delta[r];
            }
        }
        // layer l's output went through tanh
        for (std::size_t c = 0; c < in; ++c) {
            prev_delta[c] *= 1.0 - prev[c] * prev[c];
        }
        delta = std::move(prev_delta);
    }
    return loss;
}

MlpDenoiser::MlpDenoiser(std::size_t data_dim, const std::vector<std::size_t>& hidden,
                         std::uint64_t seed)
    : data_dim_(data_dim) {
    if (data_dim_ < 1) {
        throw ConfigError("denoiser data dimension must be >= 1");
    }
    std::vector<std::size_t> sizes;
    sizes.push_back(data_dim_ + 1);  // x plus the log-sigma channel
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(data_dim_);
    auto rng = substream(seed, StreamId::init);
    net_ = Mlp::create(std::move(sizes), rng);
}

MlpDenoiser::MlpDenoiser(std::size_t data_dim, Mlp net) : data_dim_(data_dim), net_(std::move(net)) {
    if (net_.sizes.front() != data_dim_ + 1 || net_.sizes.back() != data_dim_) {
        throw ShapeError("mlp layer sizes are inconsistent with the data dimension");
    }
}

std::vector<double> MlpDenoiser::denoise(std::span<const double> x, double sigma) const {
    if (!(sigma > 0.0)) {
        throw DomainError("denoiser requires sigma > 0");
    }
    if (x.size() != data_dim_) {
        throw ShapeError("denoiser input dimension mismatch");
    }
    std::vector<double> input(x.begin(), x.end());
    input.push_back(std::log(sigma));
    return net_.forward(input);
}

LossAndGrad loss_and_grad(const MlpDenoiser& denoiser, std::span<const TrainItem> batch,
                          const Weighting& w) {
    if (batch.empty()) {
        throw DataError("loss_and_grad requires a nonempty batch");
    }
    const std::size_t d = denoiser.dim();
    LossAndGrad result;
    result.grads = MlpGradients::zeros_like(denoiser.net());
    result.per_item_loss.reserve(batch.size());
    std::vector<double> input(d + 1);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    for (const auto& item : batch) {
        if (item.x0.size() != d || item.eps.size() != d) {
            throw ShapeError("batch item dimension mismatch");
        }
        if (!(item.sigma > 0.0)) {
            throw DomainError("batch item requires sigma > 0");
        }
        for (std::size_t j = 0; j < d; ++j) {
            input[j] = item.x0[j] + item.sigma * item.eps[j];
        }
        input[d] = std::log(item.sigma);
        const double coeff = loss_weight(w, item.sigma) * inv_batch;
        const double loss =
            backprop_squared_error(denoiser.net(), input, item.x0, coeff, result.grads);
        result.per_item_loss.push_back(loss);
        result.objective += coeff * loss;
    }
    return result;
}

TrainResult train_loop(const Dataset& data, Scheduler& sched, MlpDenoiser& denoiser,
                       const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) {
        throw ConfigError("learning rate must be positive");
    }
    if (cfg.batch_size < 1) {
        throw ConfigError("batch size must be >= 1");
    }
    if (data.dim() != denoiser.dim()) {
        throw ShapeError("dataset dimension does not match the denoiser");
    }
    auto rng_sched = substream(cfg.seed, StreamId::scheduler);
    auto rng_data = substream(cfg.seed, StreamId::train);
    MlpGradients velocity = MlpGradients::zeros_like(denoiser.net());
    std::vector<TrainItem> batch(cfg.batch_size);
    const std::size_t d = data.dim();
    TrainResult result;
    for (std::uint64_t step = 1; step <= cfg.steps; ++step) {
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            auto& item = batch[b];
            item.sigma = (cfg.sigma_per_batch && b > 0) ? batch[0].sigma
                                                        : sched.sample_sigma(rng_sched);
            const auto i = std::min<std::size_t>(
                static_cast<std::size_t>(uniform01(rng_data) * static_cast<double>(data.size())),
                data.size() - 1);
            const auto x0 = data.sample(i);
            item.x0.assign(x0.begin(), x0.end());
            item.eps.resize(d);
            for (std::size_t j = 0; j < d; ++j) {
                item.eps[j] = normal01(rng_data);
            }
        }
        const auto lag = loss_and_grad(denoiser, batch, sched.config().weighting);
        auto& net = denoiser.net();
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
                velocity.weights[l][i] =
                    cfg.momentum * velocity.weights[l][i] - cfg.learning_rate * lag.grads.weights[l][i];
                net.weights[l][i] += velocity.weights[l][i];
            }
            for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
                velocity.biases[l][i] =
                    cfg.momentum * velocity.biases[l][i] - cfg.learning_rate * lag.grads.biases[l][i];
                net.biases[l][i] += velocity.biases[l][i];
            }
        }
        // Algorithm order: update first, then feed the scheduler
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            sched.record_loss(batch[b].sigma, lag.per_item_loss[b]);
        }
        sched.maybe_refresh();
        if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step == cfg.steps)) {
            double mean_loss = 0.0;
            for (double l : lag.per_item_loss) {
                mean_loss += l;
            }
            mean_loss /= static_cast<double>(cfg.batch_size);
            result.log.push_back(TrainLogRow{step, mean_loss, sched.snapshot()->version});
        }
    }
    return result;
}

}  // namespace infonoise
