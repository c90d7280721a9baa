#include "infonoise/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "infonoise/allocate.hpp"
#include "infonoise/errors.hpp"
#include "infonoise/grid.hpp"
#include "infonoise/infer.hpp"
#include "infonoise/io.hpp"
#include "infonoise/oracle.hpp"
#include "infonoise/rng.hpp"
#include "infonoise/scheduler.hpp"
#include "infonoise/toy.hpp"
#include "infonoise/train.hpp"

namespace infonoise {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative outputs land in $INFONOISE_OUT when it is set.
fs::path resolve_out(const std::string& path) {
    fs::path p(path);
    if (p.is_relative()) {
        if (const char* base = std::getenv("INFONOISE_OUT")) {
            p = fs::path(base) / p;
        }
    }
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    return p;
}

void write_manifest(const fs::path& primary_out, const std::string& subcommand,
                    std::uint64_t seed, const json& inputs, const json& outputs,
                    const json& config) {
    json manifest{{"artifact_version", "1"}, {"subcommand", subcommand}, {"seed", seed},
                  {"inputs", inputs},        {"outputs", outputs},       {"config", config}};
    fs::path path = primary_out;
    path += ".manifest.json";
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write manifest " + path.string());
    }
    out << manifest.dump(2) << "\n";
}

json weighting_json(const Weighting& w) {
    json j{{"kind", w.kind == Weighting::Kind::unit ? "unit" : "edm"}};
    if (w.kind == Weighting::Kind::edm) {
        j["sigma_data"] = w.sigma_data;
    }
    return j;
}

json pivot_json(const PivotMethod& p) {
    if (p.kind == PivotMethod::Kind::onset) {
        return json{{"kind", "onset"}, {"p", p.p}};
    }
    return json{{"kind", "powerlaw"}, {"window", p.window}, {"slope_tol", p.slope_tol}};
}

json scheduler_config_json(const SchedulerConfig& cfg, const std::string& pi_base,
                           double pi_base_mu, double pi_base_s) {
    json j{{"sigma_min", cfg.range.sigma_min},
           {"sigma_max", cfg.range.sigma_max},
           {"K", cfg.K},
           {"N_warm", cfg.N_warm},
           {"M", cfg.M},
           {"B", cfg.B},
           {"beta", cfg.beta},
           {"N_min", cfg.N_min},
           {"n_gate", cfg.n_gate},
           {"smoothing", cfg.smoothing},
           {"seed_ema_with_first", cfg.seed_ema_with_first},
           {"clear_buffers_on_refresh", cfg.clear_buffers_on_refresh},
           {"weighting", weighting_json(cfg.weighting)},
           {"pivot", pivot_json(cfg.pivot)},
           {"pi_base", pi_base}};
    if (pi_base == "log_normal") {
        j["pi_base_mu"] = pi_base_mu;
        j["pi_base_s"] = pi_base_s;
    }
    return j;
}

// Scheduler options shared by `simulate` and `train`. Resolution order:
// built-in defaults, then --config file values, then explicit flags.
struct SchedulerCli {
    std::string config_file;
    SchedulerConfig cfg;
    std::string weighting = "unit";
    double sigma_data = 0.5;
    std::string pivot = "onset";
    double pivot_p = 0.002;
    std::size_t pivot_window = 9;
    double pivot_slope_tol = 0.15;
    std::string smoothing = "on";
    std::string pi_base = "log_uniform";
    double pi_base_mu = -1.2;
    double pi_base_s = 1.2;

    void add_flags(CLI::App* sub) {
        sub->add_option("--config", config_file,
                        "scheduler config file (key = value, SchedulerConfig field names)");
        sub->add_option("--sigma_min", cfg.range.sigma_min, "grid lower edge");
        sub->add_option("--sigma_max", cfg.range.sigma_max, "grid upper edge");
        sub->add_option("--K", cfg.K, "grid cell count");
        sub->add_option("--N_warm", cfg.N_warm, "warm-up steps under pi_base");
        sub->add_option("--M", cfg.M, "refresh period in steps");
        sub->add_option("--B", cfg.B, "FIFO capacity per bin");
        sub->add_option("--beta", cfg.beta, "EMA rate in (0,1]");
        sub->add_option("--N_min", cfg.N_min, "minimum per-bin count before refresh");
        sub->add_option("--n_gate", cfg.n_gate, "gate exponent");
        sub->add_option("--weighting", weighting, "unit|edm")
            ->check(CLI::IsMember({"unit", "edm"}));
        sub->add_option("--sigma_data", sigma_data, "edm weighting sigma_data");
        sub->add_option("--pivot", pivot, "onset|powerlaw")
            ->check(CLI::IsMember({"onset", "powerlaw"}));
        sub->add_option("--pivot_p", pivot_p, "onset threshold");
        sub->add_option("--pivot_window", pivot_window, "powerlaw window cells");
        sub->add_option("--pivot_slope_tol", pivot_slope_tol, "powerlaw slope tolerance");
        sub->add_option("--smoothing", smoothing, "on|off")
            ->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--pi_base", pi_base, "log_uniform|log_normal")
            ->check(CLI::IsMember({"log_uniform", "log_normal"}));
        sub->add_option("--pi_base_mu", pi_base_mu, "log-normal baseline mu");
        sub->add_option("--pi_base_s", pi_base_s, "log-normal baseline s");
    }

    // Defaults, then config-file values, then explicit flags. The pi_base
    // descriptor members end up reflecting the resolved baseline so the
    // manifest can reproduce it.
    SchedulerConfig resolve(CLI::App* sub) {
        SchedulerConfig out;
        if (!config_file.empty()) {
            BaselineSampler file_base = BaselineSampler::log_uniform();
            out = read_scheduler_config(config_file, &file_base);
            // flags win over the file; CLI11 already wrote them into members
            if (file_base.kind == BaselineSampler::Kind::log_normal) {
                if (sub->count("--pi_base") == 0) pi_base = "log_normal";
                if (sub->count("--pi_base_mu") == 0) pi_base_mu = file_base.mu;
                if (sub->count("--pi_base_s") == 0) pi_base_s = file_base.s;
            }
        }
        const auto passed = [&](const std::string& name) { return sub->count(name) > 0; };
        if (passed("--sigma_min")) out.range.sigma_min = cfg.range.sigma_min;
        if (passed("--sigma_max")) out.range.sigma_max = cfg.range.sigma_max;
        if (passed("--K")) out.K = cfg.K;
        if (passed("--N_warm")) out.N_warm = cfg.N_warm;
        if (passed("--M")) out.M = cfg.M;
        if (passed("--B")) out.B = cfg.B;
        if (passed("--beta")) out.beta = cfg.beta;
        if (passed("--N_min")) out.N_min = cfg.N_min;
        if (passed("--n_gate")) out.n_gate = cfg.n_gate;
        if (passed("--weighting")) {
            out.weighting = (weighting == "unit") ? Weighting::unit() : Weighting::edm(sigma_data);
        } else if (passed("--sigma_data") && out.weighting.kind == Weighting::Kind::edm) {
            out.weighting.sigma_data = sigma_data;
        }
        if (passed("--pivot")) {
            out.pivot = (pivot == "onset") ? PivotMethod::onset(pivot_p)
                                           : PivotMethod::powerlaw(pivot_window, pivot_slope_tol);
        }
        if (passed("--pivot_p")) out.pivot.p = pivot_p;
        if (passed("--pivot_window")) out.pivot.window = pivot_window;
        if (passed("--pivot_slope_tol")) out.pivot.slope_tol = pivot_slope_tol;
        if (passed("--smoothing")) out.smoothing = (smoothing == "on");
        // rebuild the baseline on the final grid from the resolved descriptor
        const BaselineSampler base = (pi_base == "log_uniform")
                                         ? BaselineSampler::log_uniform()
                                         : BaselineSampler::log_normal(pi_base_mu, pi_base_s);
        out.pi_base = baseline_sampler(base, build_log_grid(out.range, out.K));
        return out;
    }
};

double tv_distance(const LogGrid& grid, const std::vector<double>& p,
                   const std::vector<double>& q) {
    Profile diff;
    diff.grid = grid;
    diff.values.resize(grid.K);
    for (std::size_t k = 0; k < grid.K; ++k) {
        diff.values[k] = std::abs(p[k] - q[k]);
    }
    return 0.5 * integrate(diff);
}

// Offline reference schedule: the allocate pipeline applied to a rate
// profile with the scheduler's own gate/pivot/weighting/smoothing.
TabulatedDensity offline_reference(const Profile& rate, const SchedulerConfig& cfg) {
    const double c = calibrate_pivot(rate, cfg.pivot);
    Profile gated = apply_gate(rate, GateParams{c, cfg.n_gate});
    if (cfg.smoothing) {
        gated = smooth_profile(gated);
    }
    return schedule_from_allocation(build_allocation(gated), cfg.weighting);
}

int cmd_toy(double a, const SigmaRange& range, std::size_t K, std::size_t quad_order,
            const std::string& out) {
    const TwoPointModel model{a};
    const LogGrid grid = build_log_grid(range, K);
    const fs::path out_path = resolve_out(out);
    std::ofstream file(out_path);
    if (!file) {
        throw DataError("cannot open " + out_path.string() + " for writing");
    }
    file << "sigma,mmse,entropy_rate,x_star_pos,hessian_at_zero\n";
    for (std::size_t k = 0; k < K; ++k) {
        const double sigma = grid.centers[k];
        const double mmse = toy_mmse(model, sigma, quad_order);
        const double rate = mmse / (sigma * sigma * sigma);
        const auto roots = fixed_points(model, sigma, 1e-12);
        const double x_star = roots.back();
        file << format_double(sigma) << "," << format_double(mmse) << "," << format_double(rate)
             << "," << format_double(x_star) << "," << format_double(hessian_at_zero(model, sigma))
             << "\n";
    }
    file.close();
    write_manifest(out_path, "toy", 0, json::object(), json{{"csv", out_path.string()}},
                   json{{"a", a},
                        {"sigma_min", range.sigma_min},
                        {"sigma_max", range.sigma_max},
                        {"K", K},
                        {"quad_order", quad_order}});
    return 0;
}

int cmd_profile(const std::string& data, bool header, const SigmaRange& range, std::size_t K,
                std::size_t n_mc, std::uint64_t seed, const std::string& out) {
    const Dataset dataset = read_dataset_csv(data, header);
    const LogGrid grid = build_log_grid(range, K);
    const Profile mmse =
        mmse_profile(dataset, grid, n_mc, derive_seed(seed, StreamId::profile_mc));
    const Profile rate = entropy_rate_profile(mmse);
    const fs::path out_path = resolve_out(out);
    write_rate_csv(out_path, mmse, rate);
    write_manifest(out_path, "profile", seed, json{{"data", data}},
                   json{{"csv", out_path.string()}},
                   json{{"header", header},
                        {"sigma_min", range.sigma_min},
                        {"sigma_max", range.sigma_max},
                        {"K", K},
                        {"n_mc", n_mc}});
    return 0;
}

int cmd_schedule(const std::string& profile_path, const std::string& column,
                 const Weighting& weighting, double gate_n, const PivotMethod& pivot, bool smooth,
                 const std::string& out) {
    const Profile rate = read_profile_csv(profile_path, column);
    const double c = calibrate_pivot(rate, pivot);
    Profile gated = apply_gate(rate, GateParams{c, gate_n});
    if (smooth) {
        gated = smooth_profile(gated);
    }
    const Allocation alloc = build_allocation(gated);
    const TabulatedDensity pi = schedule_from_allocation(alloc, weighting);
    const Profile phi = effective_emphasis(pi, weighting);

    ScheduleArtifacts artifacts;
    artifacts.pi = pi;
    artifacts.rho = alloc.rho.density;
    artifacts.u_cdf = alloc.rho.cdf;
    artifacts.phi = phi.values;
    artifacts.weighting = weighting;
    artifacts.gate = GateParams{c, gate_n};
    artifacts.pivot = pivot;
    const fs::path out_path = resolve_out(out);
    write_schedule_json(out_path, artifacts);
    std::cout << "pivot_c " << format_double(c) << "\n";
    write_manifest(out_path, "schedule", 0, json{{"profile", profile_path}},
                   json{{"schedule", out_path.string()}},
                   json{{"column", column},
                        {"weighting", weighting_json(weighting)},
                        {"gate_n", gate_n},
                        {"pivot", pivot_json(pivot)},
                        {"smoothing", smooth}});
    return 0;
}

int cmd_simulate(const std::string& data, bool header, std::uint64_t steps, std::uint64_t seed,
                 const SchedulerConfig& cfg, const json& cfg_json,
                 const std::string& reference_profile, const std::string& out) {
    const Dataset dataset = read_dataset_csv(data, header);
    Scheduler sched(cfg);
    auto rng_sigma = substream(seed, StreamId::scheduler);
    auto rng_data = substream(seed, StreamId::train);
    const std::size_t d = dataset.dim();
    std::vector<double> x(d);
    for (std::uint64_t s = 0; s < steps; ++s) {
        const double sigma = sched.sample_sigma(rng_sigma);
        const auto i = std::min<std::size_t>(
            static_cast<std::size_t>(uniform01(rng_data) * static_cast<double>(dataset.size())),
            dataset.size() - 1);
        const auto x0 = dataset.sample(i);
        for (std::size_t j = 0; j < d; ++j) {
            x[j] = x0[j] + sigma * normal01(rng_data);
        }
        sched.record_loss(sigma, posterior_trace_cov(dataset, x, sigma));
        sched.maybe_refresh();
    }
    std::vector<double> tvs;
    if (!reference_profile.empty()) {
        const Profile ref_rate = read_profile_csv(reference_profile);
        if (ref_rate.grid.K != sched.grid().K ||
            std::abs(ref_rate.grid.range.sigma_min - cfg.range.sigma_min) >
                1e-9 * cfg.range.sigma_min ||
            std::abs(ref_rate.grid.range.sigma_max - cfg.range.sigma_max) >
                1e-9 * cfg.range.sigma_max) {
            throw DataError("reference profile grid does not match the scheduler grid");
        }
        const TabulatedDensity pi_ref = offline_reference(ref_rate, cfg);
        for (const auto& rec : sched.refresh_log()) {
            tvs.push_back(tv_distance(sched.grid(), rec.density, pi_ref.density));
        }
    }
    const fs::path out_path = resolve_out(out);
    write_refresh_log(out_path, sched.refresh_log(), tvs);
    std::cout << "steps " << steps << " refreshes " << sched.refresh_log().size()
              << " degenerate " << sched.degenerate_refreshes() << "\n";
    if (!sched.refresh_log().empty()) {
        std::cout << "final_pivot_c " << format_double(sched.refresh_log().back().pivot_c) << "\n";
    }
    if (!tvs.empty()) {
        std::cout << "final_tv " << format_double(tvs.back()) << "\n";
    }
    json inputs{{"data", data}};
    if (!reference_profile.empty()) {
        inputs["reference_profile"] = reference_profile;
    }
    json config = cfg_json;
    config["steps"] = steps;
    config["header"] = header;
    write_manifest(out_path, "simulate", seed, inputs, json{{"refresh_log", out_path.string()}},
                   config);
    return 0;
}

int cmd_train(const std::string& data, bool header, const SchedulerConfig& cfg,
              const json& cfg_json, const TrainConfig& tcfg,
              const std::vector<std::size_t>& hidden, const std::string& out_checkpoint,
              const std::string& out_log, const std::string& out_refresh_log) {
    const Dataset dataset = read_dataset_csv(data, header);
    Scheduler sched(cfg);
    MlpDenoiser denoiser(dataset.dim(), hidden, tcfg.seed);
    const TrainResult result = train_loop(dataset, sched, denoiser, tcfg);
    const fs::path ckpt_path = resolve_out(out_checkpoint);
    write_checkpoint_json(ckpt_path, denoiser);
    const fs::path log_path = resolve_out(out_log);
    write_train_log_csv(log_path, result.log);
    json outputs{{"checkpoint", ckpt_path.string()}, {"train_log", log_path.string()}};
    if (!out_refresh_log.empty()) {
        const fs::path rl_path = resolve_out(out_refresh_log);
        write_refresh_log(rl_path, sched.refresh_log());
        outputs["refresh_log"] = rl_path.string();
    }
    if (!result.log.empty()) {
        std::cout << "final_mean_loss " << format_double(result.log.back().mean_loss) << "\n";
    }
    std::cout << "refreshes " << sched.refresh_log().size() << "\n";
    json config = cfg_json;
    config["learning_rate"] = tcfg.learning_rate;
    config["batch_size"] = tcfg.batch_size;
    config["steps"] = tcfg.steps;
    config["momentum"] = tcfg.momentum;
    config["sigma_per_batch"] = tcfg.sigma_per_batch;
    config["hidden"] = hidden;
    config["header"] = header;
    write_manifest(ckpt_path, "train", tcfg.seed, json{{"data", data}}, outputs, config);
    return 0;
}

int cmd_grid(const std::string& mode, const std::string& profile_path, std::size_t steps,
             const SigmaRange& range, bool range_given, double rho, std::size_t nfe_check,
             const std::string& out) {
    if (nfe_check > 0) {
        std::cout << "NFE " << (2 * nfe_check - 1) << "\n";
        if (out.empty()) {
            return 0;
        }
    }
    if (out.empty()) {
        throw ConfigError("grid: --out is required unless only --nfe_check is requested");
    }
    InferenceGrid grid;
    std::optional<Profile> rate;
    if (mode == "infogrid") {
        if (profile_path.empty()) {
            throw ConfigError("grid --mode infogrid requires --profile");
        }
        rate = read_profile_csv(profile_path);
        const SigmaRange r = range_given ? range : rate->grid.range;
        grid = infogrid(*rate, steps, r);
    } else if (mode == "reference") {
        grid = reference_grid(steps, range, rho);
        if (!profile_path.empty()) {
            rate = read_profile_csv(profile_path);
        }
    } else {
        throw ConfigError("grid mode must be infogrid or reference");
    }
    const fs::path out_path = resolve_out(out);
    write_grid_csv(out_path, grid);
    if (rate) {
        std::cout << "uniformity " << format_double(grid_uniformity(grid, *rate)) << "\n";
    }
    std::cout << "NFE " << (2 * grid.steps() - 1) << "\n";
    json inputs = json::object();
    if (!profile_path.empty()) {
        inputs["profile"] = profile_path;
    }
    write_manifest(out_path, "grid", 0, inputs, json{{"grid", out_path.string()}},
                   json{{"mode", mode},
                        {"steps", steps},
                        {"sigma_min", range.sigma_min},
                        {"sigma_max", range.sigma_max},
                        {"rho", rho}});
    return 0;
}

int cmd_sample(const std::string& denoiser_kind, const std::string& data, bool header,
               const std::string& checkpoint, const std::string& grid_file,
               const std::string& grid_mode, const std::string& profile_path, std::size_t steps,
               const SigmaRange& range, double rho, std::size_t n_samples, std::uint64_t seed,
               const std::string& out) {
    std::unique_ptr<Denoiser> denoiser;
    if (denoiser_kind == "oracle") {
        if (data.empty()) {
            throw ConfigError("sample --denoiser oracle requires --data");
        }
        denoiser = std::make_unique<OracleDenoiser>(read_dataset_csv(data, header));
    } else if (denoiser_kind == "checkpoint") {
        if (checkpoint.empty()) {
            throw ConfigError("sample --denoiser checkpoint requires --checkpoint");
        }
        denoiser = std::make_unique<MlpDenoiser>(read_checkpoint_json(checkpoint));
    } else {
        throw ConfigError("sample denoiser must be oracle or checkpoint");
    }
    InferenceGrid grid;
    if (!grid_file.empty()) {
        grid = read_grid_csv(grid_file);
    } else if (grid_mode == "reference") {
        grid = reference_grid(steps, range, rho);
    } else if (grid_mode == "infogrid") {
        if (profile_path.empty()) {
            throw ConfigError("sample --grid_mode infogrid requires --profile");
        }
        const Profile rate = read_profile_csv(profile_path);
        grid = infogrid(rate, steps, range);
    } else {
        throw ConfigError("sample grid mode must be reference or infogrid");
    }
    auto rng = substream(seed, StreamId::sample);
    const std::size_t d = denoiser->dim();
    const double sigma_max = grid.nodes.front();
    std::vector<std::vector<double>> rows;
    rows.reserve(n_samples);
    std::vector<double> x_init(d);
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t j = 0; j < d; ++j) {
            x_init[j] = sigma_max * normal01(rng);
        }
        rows.push_back(heun_sample(*denoiser, grid, x_init));
    }
    const fs::path out_path = resolve_out(out);
    write_dataset_csv(out_path, rows);
    json inputs = json::object();
    if (!data.empty()) inputs["data"] = data;
    if (!checkpoint.empty()) inputs["checkpoint"] = checkpoint;
    if (!grid_file.empty()) inputs["grid_file"] = grid_file;
    if (!profile_path.empty()) inputs["profile"] = profile_path;
    write_manifest(out_path, "sample", seed, inputs, json{{"samples", out_path.string()}},
                   json{{"denoiser", denoiser_kind},
                        {"grid_mode", grid_file.empty() ? grid_mode : "file"},
                        {"steps", steps},
                        {"sigma_min", range.sigma_min},
                        {"sigma_max", range.sigma_max},
                        {"rho", rho},
                        {"n_samples", n_samples},
                        {"header", header}});
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"information-guided noise allocation for diffusion training"};
    app.require_subcommand(1);
    std::function<int()> action;

    // toy
    {
        auto* sub = app.add_subcommand("toy", "closed-form two-point model profile CSV");
        auto a = std::make_shared<double>(1.0);
        auto range = std::make_shared<SigmaRange>(SigmaRange{0.01, 100.0});
        auto K = std::make_shared<std::size_t>(128);
        auto quad = std::make_shared<std::size_t>(128);
        auto out = std::make_shared<std::string>("toy.csv");
        sub->add_option("--a", *a, "atom location (atoms at -a, +a)");
        sub->add_option("--sigma_min", range->sigma_min, "grid lower edge");
        sub->add_option("--sigma_max", range->sigma_max, "grid upper edge");
        sub->add_option("--K", *K, "grid cell count");
        sub->add_option("--quad_order", *quad, "Gauss-Hermite order");
        sub->add_option("--out", *out, "output CSV path");
        sub->callback([=, &action]() mutable {
            action = [=]() { return cmd_toy(*a, *range, *K, *quad, *out); };
        });
    }

    // profile
    {
        auto* sub = app.add_subcommand("profile", "oracle mmse/entropy-rate profile from a dataset");
        auto data = std::make_shared<std::string>();
        auto header = std::make_shared<bool>(false);
        auto range = std::make_shared<SigmaRange>();
        auto K = std::make_shared<std::size_t>(128);
        auto n_mc = std::make_shared<std::size_t>(20000);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out = std::make_shared<std::string>("profile.csv");
        sub->add_option("--data", *data, "dataset CSV")->required();
        sub->add_flag("--header", *header, "skip the first line of the dataset");
        sub->add_option("--sigma_min", range->sigma_min, "grid lower edge");
        sub->add_option("--sigma_max", range->sigma_max, "grid upper edge");
        sub->add_option("--K", *K, "grid cell count");
        sub->add_option("--n_mc", *n_mc, "Monte-Carlo draws per cell");
        sub->add_option("--seed", *seed, "run seed");
        sub->add_option("--out", *out, "output CSV path");
        sub->callback([=, &action]() mutable {
            action = [=]() { return cmd_profile(*data, *header, *range, *K, *n_mc, *seed, *out); };
        });
    }

    // schedule
    {
        auto* sub = app.add_subcommand("schedule", "build the sampling schedule from a profile");
        auto profile = std::make_shared<std::string>();
        auto column = std::make_shared<std::string>("auto");
        auto weighting = std::make_shared<std::string>("unit");
        auto sigma_data = std::make_shared<double>(0.5);
        auto gate_n = std::make_shared<double>(3.0);
        auto pivot = std::make_shared<std::string>("onset");
        auto pivot_p = std::make_shared<double>(0.002);
        auto pivot_window = std::make_shared<std::size_t>(9);
        auto pivot_tol = std::make_shared<double>(0.15);
        auto smoothing = std::make_shared<std::string>("on");
        auto out = std::make_shared<std::string>("schedule.json");
        sub->add_option("--profile", *profile, "rate profile CSV")->required();
        sub->add_option("--column", *column, "value column name or 'auto'");
        sub->add_option("--weighting", *weighting)->check(CLI::IsMember({"unit", "edm"}));
        sub->add_option("--sigma_data", *sigma_data, "edm sigma_data");
        sub->add_option("--gate_n", *gate_n, "gate exponent");
        sub->add_option("--pivot", *pivot)->check(CLI::IsMember({"onset", "powerlaw"}));
        sub->add_option("--pivot_p", *pivot_p, "onset threshold");
        sub->add_option("--pivot_window", *pivot_window, "powerlaw window");
        sub->add_option("--pivot_slope_tol", *pivot_tol, "powerlaw slope tolerance");
        sub->add_option("--smoothing", *smoothing)->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--out", *out, "output JSON path");
        sub->callback([=, &action]() mutable {
            action = [=]() {
                const Weighting w = (*weighting == "unit") ? Weighting::unit()
                                                           : Weighting::edm(*sigma_data);
                const PivotMethod pm = (*pivot == "onset")
                                           ? PivotMethod::onset(*pivot_p)
                                           : PivotMethod::powerlaw(*pivot_window, *pivot_tol);
                return cmd_schedule(*profile, *column, w, *gate_n, pm, *smoothing == "on", *out);
            };
        });
    }

    // simulate
    {
        auto* sub = app.add_subcommand("simulate", "drive the scheduler with oracle losses");
        auto data = std::make_shared<std::string>();
        auto header = std::make_shared<bool>(false);
        auto steps = std::make_shared<std::uint64_t>(50000);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto reference = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("refresh_log.jsonl");
        auto sched_cli = std::make_shared<SchedulerCli>();
        sub->add_option("--data", *data, "dataset CSV")->required();
        sub->add_flag("--header", *header, "skip the first line of the dataset");
        sub->add_option("--steps", *steps, "number of draws");
        sub->add_option("--seed", *seed, "run seed");
        sub->add_option("--reference_profile", *reference,
                        "rate profile CSV for offline TV comparison");
        sub->add_option("--out", *out, "refresh log path (JSON lines)");
        sched_cli->add_flags(sub);
        sub->callback([=, &action]() mutable {
            action = [=]() {
                const SchedulerConfig cfg = sched_cli->resolve(sub);
                const json cfg_json = scheduler_config_json(cfg, sched_cli->pi_base,
                                                            sched_cli->pi_base_mu,
                                                            sched_cli->pi_base_s);
                return cmd_simulate(*data, *header, *steps, *seed, cfg, cfg_json, *reference, *out);
            };
        });
    }

    // train
    {
        auto* sub = app.add_subcommand("train", "train the MLP denoiser with the scheduler");
        auto data = std::make_shared<std::string>();
        auto header = std::make_shared<bool>(false);
        auto tcfg = std::make_shared<TrainConfig>();
        auto hidden = std::make_shared<std::vector<std::size_t>>(std::vector<std::size_t>{32});
        auto out_ckpt = std::make_shared<std::string>("checkpoint.json");
        auto out_log = std::make_shared<std::string>("train_log.csv");
        auto out_refresh = std::make_shared<std::string>();
        auto sched_cli = std::make_shared<SchedulerCli>();
        tcfg->steps = 10000;
        sub->add_option("--data", *data, "dataset CSV")->required();
        sub->add_flag("--header", *header, "skip the first line of the dataset");
        sub->add_option("--learning_rate", tcfg->learning_rate, "SGD learning rate");
        sub->add_option("--batch_size", tcfg->batch_size, "batch size");
        sub->add_option("--steps", tcfg->steps, "optimizer steps");
        sub->add_option("--momentum", tcfg->momentum, "SGD momentum");
        sub->add_option("--seed", tcfg->seed, "run seed");
        sub->add_flag("--sigma_per_batch", tcfg->sigma_per_batch,
                      "draw one sigma per batch instead of per item");
        sub->add_option("--log_every", tcfg->log_every, "training log cadence");
        sub->add_option("--hidden", *hidden, "hidden layer sizes");
        sub->add_option("--out_checkpoint", *out_ckpt, "checkpoint path");
        sub->add_option("--out_log", *out_log, "training log CSV path");
        sub->add_option("--out_refresh_log", *out_refresh, "refresh log path");
        sched_cli->add_flags(sub);
        sub->callback([=, &action]() mutable {
            action = [=]() {
                const SchedulerConfig cfg = sched_cli->resolve(sub);
                const json cfg_json = scheduler_config_json(cfg, sched_cli->pi_base,
                                                            sched_cli->pi_base_mu,
                                                            sched_cli->pi_base_s);
                return cmd_train(*data, *header, cfg, cfg_json, *tcfg, *hidden, *out_ckpt,
                                 *out_log, *out_refresh);
            };
        });
    }

    // grid
    {
        auto* sub = app.add_subcommand("grid", "inference-time sigma grid CSV");
        auto mode = std::make_shared<std::string>("reference");
        auto profile = std::make_shared<std::string>();
        auto steps = std::make_shared<std::size_t>(18);
        auto range = std::make_shared<SigmaRange>();
        auto rho = std::make_shared<double>(7.0);
        auto nfe_check = std::make_shared<std::size_t>(0);
        auto out = std::make_shared<std::string>();
        sub->add_option("--mode", *mode)->check(CLI::IsMember({"infogrid", "reference"}));
        sub->add_option("--profile", *profile, "rate profile CSV (infogrid source)");
        sub->add_option("--steps", *steps, "number of integration steps N");
        auto* smin = sub->add_option("--sigma_min", range->sigma_min, "grid lower edge");
        auto* smax = sub->add_option("--sigma_max", range->sigma_max, "grid upper edge");
        sub->add_option("--rho", *rho, "reference grid exponent");
        sub->add_option("--nfe_check", *nfe_check, "print the NFE for N steps and exit");
        sub->add_option("--out", *out, "output CSV path");
        sub->callback([=, &action]() mutable {
            const bool range_given = smin->count() > 0 || smax->count() > 0;
            action = [=]() {
                return cmd_grid(*mode, *profile, *steps, *range, range_given, *rho, *nfe_check,
                                *out);
            };
        });
    }

    // sample
    {
        auto* sub = app.add_subcommand("sample", "generate points with the PF-ODE Heun sampler");
        auto denoiser = std::make_shared<std::string>("oracle");
        auto data = std::make_shared<std::string>();
        auto header = std::make_shared<bool>(false);
        auto checkpoint = std::make_shared<std::string>();
        auto grid_file = std::make_shared<std::string>();
        auto grid_mode = std::make_shared<std::string>("reference");
        auto profile = std::make_shared<std::string>();
        auto steps = std::make_shared<std::size_t>(18);
        auto range = std::make_shared<SigmaRange>();
        auto rho = std::make_shared<double>(7.0);
        auto n_samples = std::make_shared<std::size_t>(1000);
        auto seed = std::make_shared<std::uint64_t>(0);
        auto out = std::make_shared<std::string>("samples.csv");
        sub->add_option("--denoiser", *denoiser)->check(CLI::IsMember({"oracle", "checkpoint"}));
        sub->add_option("--data", *data, "dataset CSV for the oracle denoiser");
        sub->add_flag("--header", *header, "skip the first line of the dataset");
        sub->add_option("--checkpoint", *checkpoint, "MLP checkpoint JSON");
        sub->add_option("--grid_file", *grid_file, "inference grid CSV");
        sub->add_option("--grid_mode", *grid_mode)->check(CLI::IsMember({"reference", "infogrid"}));
        sub->add_option("--profile", *profile, "rate profile CSV (infogrid source)");
        sub->add_option("--steps", *steps, "number of integration steps N");
        sub->add_option("--sigma_min", range->sigma_min, "grid lower edge");
        sub->add_option("--sigma_max", range->sigma_max, "grid upper edge");
        sub->add_option("--rho", *rho, "reference grid exponent");
        sub->add_option("--n_samples", *n_samples, "number of generated points");
        sub->add_option("--seed", *seed, "run seed");
        sub->add_option("--out", *out, "output CSV path");
        sub->callback([=, &action]() mutable {
            action = [=]() {
                return cmd_sample(*denoiser, *data, *header, *checkpoint, *grid_file, *grid_mode,
                                  *profile, *steps, *range, *rho, *n_samples, *seed, *out);
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    }
    if (!action) {
        return 0;  // help path
    }
    try {
        return action();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const DegenerateError& e) {
        std::cerr << "degenerate input: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace infonoise
