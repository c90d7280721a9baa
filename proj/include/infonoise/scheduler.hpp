#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "infonoise/allocate.hpp"
#include "infonoise/grid.hpp"

namespace infonoise {

struct SchedulerConfig {
    SigmaRange range;
    std::size_t K = 128;
    // Baseline sampler used during warm-up; when left empty (grid.K == 0)
    // the scheduler builds the log-uniform baseline on its own grid.
    TabulatedDensity pi_base;
    std::uint64_t N_warm = 5000;  // warm-up steps under pi_base
    std::uint64_t M = 1000;       // refresh period in steps
    std::size_t B = 256;          // FIFO capacity per bin
    double beta = 0.1;            // EMA rate in (0, 1]
    Weighting weighting;
    double n_gate = 3.0;
    std::size_t N_min = 8;  // minimum per-bin count before a refresh
    PivotMethod pivot;
    bool smoothing = true;  // 3-point moving average of the gated profile

    // First EMA update seeds with the buffer mean instead of decaying from
    // zero; the literal from-zero update is available for fidelity runs.
    bool seed_ema_with_first = true;
    // Buffers persist across refreshes by default (pure FIFO semantics).
    bool clear_buffers_on_refresh = false;
};

// Fixed-capacity ring buffer of the most recent losses in a bin.
class FifoBuffer {
public:
    explicit FifoBuffer(std::size_t capacity);
    void push(double v);
    std::size_t size() const { return count_; }
    double mean() const;
    void clear();

private:
    std::vector<double> buf_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
};

// Immutable published sampling state. Version 0 wraps pi_base and carries
// no rate profile (no data yet).
struct ScheduleSnapshot {
    std::uint64_t version = 0;
    TabulatedDensity density;
    Profile rate_profile;  // gated (and optionally smoothed) r~; empty at version 0
    double pivot_c = 0.0;
};

struct RefreshRecord {
    std::uint64_t step = 0;
    std::uint64_t version = 0;
    double pivot_c = 0.0;
    std::vector<double> r_hat;
    std::vector<double> r_tilde;
    std::vector<double> density;
};

// Builds a continuous sampler from per-cell rates: normalizes with the cell
// widths, tabulates the CDF, samples via inverse-CDF interpolation.
TabulatedDensity build_sampler(const std::vector<double>& q, const LogGrid& grid);

// Online state machine: per-bin FIFO loss buffers, EMA mmse estimates,
// entropy-rate construction, automatic pivot, periodic sampler refresh.
// Single-writer contract: one owner calls sample_sigma/record_loss/
// maybe_refresh; snapshot() hands concurrent readers an immutable state.
class Scheduler {
public:
    explicit Scheduler(SchedulerConfig config);

    // Increments the step counter; draws from pi_base during warm-up and
    // from the published snapshot afterwards.
    double sample_sigma(std::mt19937_64& rng);

    // Routes the loss to the bin containing sigma, evicting the oldest
    // entry when full. Rejects non-finite or negative losses (DataError)
    // without touching any state.
    void record_loss(double sigma, double loss);

    // Publishes a new snapshot when past warm-up, at a step multiple of M,
    // with every bin at N_min or more samples; otherwise returns nothing.
    // A degenerate rebuild keeps the previous snapshot and increments the
    // diagnostic counter.
    std::optional<ScheduleSnapshot> maybe_refresh();

    // Current ungated r_hat profile; DataError before the first refresh.
    Profile export_profile() const;

    std::shared_ptr<const ScheduleSnapshot> snapshot() const;
    const LogGrid& grid() const { return grid_; }
    const SchedulerConfig& config() const { return cfg_; }
    std::uint64_t step() const { return step_; }
    std::uint64_t degenerate_refreshes() const { return degenerate_; }
    const std::vector<RefreshRecord>& refresh_log() const { return log_; }

    // bin diagnostics
    std::size_t bin_count(std::size_t k) const { return bins_.at(k).size(); }
    double bin_mean(std::size_t k) const { return bins_.at(k).mean(); }

private:
    void publish(std::shared_ptr<const ScheduleSnapshot> snap);

    SchedulerConfig cfg_;
    LogGrid grid_;
    TabulatedDensity pi_base_;
    std::vector<FifoBuffer> bins_;
    std::vector<double> ema_;
    std::vector<char> ema_init_;
    std::vector<double> last_r_hat_;
    bool have_r_hat_ = false;
    std::uint64_t step_ = 0;
    std::uint64_t degenerate_ = 0;
    std::vector<RefreshRecord> log_;
    std::shared_ptr<const ScheduleSnapshot> snap_;
    mutable std::mutex snap_mu_;
};

}  // namespace infonoise
