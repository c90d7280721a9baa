#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "infonoise/allocate.hpp"
#include "infonoise/grid.hpp"
#include "infonoise/infer.hpp"
#include "infonoise/oracle.hpp"
#include "infonoise/scheduler.hpp"
#include "infonoise/train.hpp"

namespace infonoise {

// Double formatted with 17 significant digits: round-trips bit-exactly.
std::string format_double(double v);

// Profile CSV: header "sigma,value", one row per cell center.
void write_profile_csv(const std::filesystem::path& path, const Profile& profile);

// Reads a profile CSV. Accepts the plain "sigma,value" layout as well as
// multi-column files (e.g. "sigma,mmse,entropy_rate"); `column` picks the
// value column by header name, or "auto" preferring entropy_rate, then
// value, then mmse. The log grid is reconstructed from the centers.
Profile read_profile_csv(const std::filesystem::path& path, const std::string& column = "auto");

// Rate CSV written by the profile command: sigma,mmse,entropy_rate.
void write_rate_csv(const std::filesystem::path& path, const Profile& mmse, const Profile& rate);

// Density JSON: {sigma_min, sigma_max, K, edges, centers, density, cdf}.
void write_density_json(const std::filesystem::path& path, const TabulatedDensity& density);
TabulatedDensity read_density_json(const std::filesystem::path& path);

// Schedule JSON: density JSON of pi plus the weighting descriptor, gate,
// pivot method, u_cdf (CDF of rho at the edges), rho and phi arrays, so u
// and its inverse rebuild bit-exactly from the file.
struct ScheduleArtifacts {
    TabulatedDensity pi;
    std::vector<double> rho;    // target allocation values at centers
    std::vector<double> u_cdf;  // rho CDF at edges
    std::vector<double> phi;    // pi * w at centers
    Weighting weighting;
    GateParams gate;
    PivotMethod pivot;
};

void write_schedule_json(const std::filesystem::path& path, const ScheduleArtifacts& artifacts);
ScheduleArtifacts read_schedule_json(const std::filesystem::path& path);

// Dataset CSV: one sample per row, d float columns, no header by default.
Dataset read_dataset_csv(const std::filesystem::path& path, bool skip_header = false);
void write_dataset_csv(const std::filesystem::path& path, const std::vector<std::vector<double>>& rows);

// Inference grid CSV: header "index,sigma".
void write_grid_csv(const std::filesystem::path& path, const InferenceGrid& grid);
InferenceGrid read_grid_csv(const std::filesystem::path& path);

// Versioned MLP checkpoint (JSON): layer sizes plus flat parameter arrays.
void write_checkpoint_json(const std::filesystem::path& path, const MlpDenoiser& denoiser);
MlpDenoiser read_checkpoint_json(const std::filesystem::path& path);

// Refresh log: JSON-lines, one record per refresh. tv_to_reference is
// emitted when a reference density was supplied (NaN marks absence).
void write_refresh_log(const std::filesystem::path& path, const std::vector<RefreshRecord>& log,
                       const std::vector<double>& tv_to_reference = {});

// Training log CSV: step,mean_loss,snapshot_version.
void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows);

// Scheduler config as a key = value document mirroring SchedulerConfig
// field names. Unknown keys are rejected. When baseline_out is given it
// receives the parsed pi_base descriptor.
SchedulerConfig read_scheduler_config(const std::filesystem::path& path,
                                      BaselineSampler* baseline_out = nullptr);

}  // namespace infonoise
