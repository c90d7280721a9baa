#include "infonoise/scheduler.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "infonoise/errors.hpp"
#include "infonoise/rng.hpp"

namespace infonoise {

FifoBuffer::FifoBuffer(std::size_t capacity) : buf_(capacity) {
    if (capacity == 0) {
        throw ConfigError("FIFO capacity must be >= 1");
    }
}

void FifoBuffer::push(double v) {
    buf_[head_] = v;
    head_ = (head_ + 1) % buf_.size();
    if (count_ < buf_.size()) {
        ++count_;
    }
}

double FifoBuffer::mean() const {
    if (count_ == 0) {
        throw DataError("mean of an empty FIFO buffer");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < count_; ++i) {
        acc += buf_[i];
    }
    return acc / static_cast<double>(count_);
}

void FifoBuffer::clear() {
    head_ = 0;
    count_ = 0;
}

TabulatedDensity build_sampler(const std::vector<double>& q, const LogGrid& grid) {
    Profile p;
    p.grid = grid;
    p.values = q;
    return normalize_to_density(p);  // DegenerateError on all-zero q
}

namespace {

void validate_config(const SchedulerConfig& cfg) {
    validate_range(cfg.range);
    if (cfg.K < 2) {
        throw ConfigError("scheduler needs K >= 2");
    }
    if (cfg.M < 1) {
        throw ConfigError("refresh period M must be >= 1");
    }
    if (cfg.B < 1) {
        throw ConfigError("FIFO capacity B must be >= 1");
    }
    if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) {
        throw ConfigError("EMA rate beta must lie in (0, 1]");
    }
    if (cfg.N_min < 1) {
        throw ConfigError("N_min must be >= 1");
    }
    if (!(cfg.n_gate >= 2.0)) {
        throw ConfigError("gate exponent must be >= 2");
    }
    switch (cfg.pivot.kind) {
        case PivotMethod::Kind::onset:
            if (!(cfg.pivot.p > 0.0 && cfg.pivot.p < 1.0)) {
                throw ConfigError("onset threshold must lie in (0, 1)");
            }
            break;
        case PivotMethod::Kind::powerlaw:
            if (cfg.pivot.window < 3 || !(cfg.pivot.slope_tol > 0.0)) {
                throw ConfigError("powerlaw pivot needs window >= 3 and slope_tol > 0");
            }
            if (cfg.pivot.window > cfg.K) {
                throw ConfigError("powerlaw window exceeds the grid size");
            }
            break;
    }
}

}  // namespace

Scheduler::Scheduler(SchedulerConfig config) : cfg_(std::move(config)) {
    validate_config(cfg_);
    grid_ = build_log_grid(cfg_.range, cfg_.K);
    if (cfg_.pi_base.grid.K == 0) {
        pi_base_ = baseline_sampler(BaselineSampler::log_uniform(), grid_);
    } else {
        if (cfg_.pi_base.grid.K != cfg_.K ||
            cfg_.pi_base.grid.range.sigma_min != cfg_.range.sigma_min ||
            cfg_.pi_base.grid.range.sigma_max != cfg_.range.sigma_max) {
            throw ConfigError("pi_base grid does not match the scheduler grid");
        }
        pi_base_ = cfg_.pi_base;
    }
    bins_.assign(cfg_.K, FifoBuffer(cfg_.B));
    ema_.assign(cfg_.K, 0.0);
    ema_init_.assign(cfg_.K, 0);
    auto snap = std::make_shared<ScheduleSnapshot>();
    snap->version = 0;
    snap->density = pi_base_;
    snap->pivot_c = 0.0;
    snap_ = std::move(snap);
}

double Scheduler::sample_sigma(std::mt19937_64& rng) {
    ++step_;
    const double z = uniform01(rng);
    if (step_ <= cfg_.N_warm) {
        return inverse_cdf_sample(pi_base_, z);
    }
    const auto snap = snapshot();
    return inverse_cdf_sample(snap->density, z);
}

void Scheduler::record_loss(double sigma, double loss) {
    if (!std::isfinite(loss) || loss < 0.0) {
        throw DataError("rejected loss " + std::to_string(loss) +
                        ": losses must be finite and nonnegative");
    }
    const std::size_t k = locate_bin(grid_, sigma);
    bins_[k].push(loss);
}

std::optional<ScheduleSnapshot> Scheduler::maybe_refresh() {
    if (step_ <= cfg_.N_warm || step_ % cfg_.M != 0) {
        return std::nullopt;
    }
    for (const auto& bin : bins_) {
        if (bin.size() < cfg_.N_min) {
            return std::nullopt;
        }
    }
    // buffer means, then the cross-refresh EMA
    for (std::size_t k = 0; k < cfg_.K; ++k) {
        const double lbar = bins_[k].mean();
        if (cfg_.seed_ema_with_first && !ema_init_[k]) {
            ema_[k] = lbar;
        } else {
            ema_[k] = (1.0 - cfg_.beta) * ema_[k] + cfg_.beta * lbar;
        }
        ema_init_[k] = 1;
    }
    Profile r_hat;
    r_hat.grid = grid_;
    r_hat.values.resize(cfg_.K);
    for (std::size_t k = 0; k < cfg_.K; ++k) {
        const double s = grid_.centers[k];
        r_hat.values[k] = ema_[k] / (s * s * s);
    }
    try {
        const double c = calibrate_pivot(r_hat, cfg_.pivot);
        Profile r_tilde = apply_gate(r_hat, GateParams{c, cfg_.n_gate});
        if (cfg_.smoothing) {
            r_tilde = smooth_profile(r_tilde);
        }
        std::vector<double> q(cfg_.K);
        for (std::size_t k = 0; k < cfg_.K; ++k) {
            q[k] = r_tilde.values[k] / loss_weight(cfg_.weighting, grid_.centers[k]);
        }
        TabulatedDensity density = build_sampler(q, grid_);

        auto snap = std::make_shared<ScheduleSnapshot>();
        snap->version = snapshot()->version + 1;
        snap->density = std::move(density);
        snap->rate_profile = std::move(r_tilde);
        snap->pivot_c = c;
        last_r_hat_ = r_hat.values;
        have_r_hat_ = true;
        log_.push_back(RefreshRecord{step_, snap->version, c, r_hat.values,
                                     snap->rate_profile.values, snap->density.density});
        if (cfg_.clear_buffers_on_refresh) {
            for (auto& bin : bins_) {
                bin.clear();
            }
        }
        publish(snap);
        return *snap;
    } catch (const DegenerateError&) {
        // never publish an invalid density; keep the previous snapshot
        ++degenerate_;
        return std::nullopt;
    }
}

Profile Scheduler::export_profile() const {
    if (!have_r_hat_) {
        throw DataError("no refresh has completed; the rate profile is absent");
    }
    Profile out;
    out.grid = grid_;
    out.values = last_r_hat_;
    return out;
}

std::shared_ptr<const ScheduleSnapshot> Scheduler::snapshot() const {
    std::lock_guard<std::mutex> lock(snap_mu_);
    return snap_;
}

void Scheduler::publish(std::shared_ptr<const ScheduleSnapshot> snap) {
    std::lock_guard<std::mutex> lock(snap_mu_);
    snap_ = std::move(snap);
}

}  // namespace infonoise
