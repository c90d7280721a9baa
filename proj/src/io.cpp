#include "infonoise/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "infonoise/errors.hpp"

namespace infonoise {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string() + " for reading");
    }
    return in;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    return fields;
}

double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
            ++pos;
        }
        if (pos != s.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad float '" + s + "'");
    }
}

// Rebuilds the equal-log-width grid implied by a list of cell centers.
LogGrid grid_from_centers(const std::vector<double>& centers, const std::filesystem::path& path) {
    if (centers.size() < 2) {
        throw DataError(path.string() + ": a profile needs at least two rows");
    }
    const std::size_t K = centers.size();
    const double step = (std::log(centers.back()) - std::log(centers.front())) /
                        static_cast<double>(K - 1);
    if (!(step > 0.0)) {
        throw DataError(path.string() + ": profile centers must be increasing");
    }
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const double local = std::log(centers[k + 1]) - std::log(centers[k]);
        if (std::abs(local - step) > 1e-6 * std::abs(step)) {
            throw DataError(path.string() + ": profile centers are not equally spaced in log sigma");
        }
    }
    SigmaRange range;
    range.sigma_min = std::exp(std::log(centers.front()) - 0.5 * step);
    range.sigma_max = std::exp(std::log(centers.back()) + 0.5 * step);
    LogGrid grid = build_log_grid(range, K);
    for (std::size_t k = 0; k < K; ++k) {
        if (std::abs(grid.centers[k] - centers[k]) > 1e-9 * centers[k]) {
            throw DataError(path.string() + ": centers do not form a log grid");
        }
    }
    return grid;
}

json density_to_json(const TabulatedDensity& d) {
    return json{{"sigma_min", d.grid.range.sigma_min},
                {"sigma_max", d.grid.range.sigma_max},
                {"K", d.grid.K},
                {"edges", d.grid.edges},
                {"centers", d.grid.centers},
                {"density", d.density},
                {"cdf", d.cdf}};
}

TabulatedDensity density_from_json(const json& j, const std::string& where) {
    TabulatedDensity d;
    d.grid.range.sigma_min = j.at("sigma_min").get<double>();
    d.grid.range.sigma_max = j.at("sigma_max").get<double>();
    d.grid.K = j.at("K").get<std::size_t>();
    d.grid.edges = j.at("edges").get<std::vector<double>>();
    d.grid.centers = j.at("centers").get<std::vector<double>>();
    d.density = j.at("density").get<std::vector<double>>();
    d.cdf = j.at("cdf").get<std::vector<double>>();
    const std::size_t K = d.grid.K;
    if (d.grid.edges.size() != K + 1 || d.grid.centers.size() != K || d.density.size() != K ||
        d.cdf.size() != K + 1) {
        throw DataError(where + ": inconsistent array lengths");
    }
    d.grid.widths.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        d.grid.widths[k] = d.grid.edges[k + 1] - d.grid.edges[k];
        if (!(d.grid.widths[k] > 0.0) || d.density[k] < 0.0 || d.cdf[k + 1] < d.cdf[k]) {
            throw DataError(where + ": density violates grid invariants");
        }
    }
    if (d.cdf.front() != 0.0 || d.cdf.back() != 1.0) {
        throw DataError(where + ": cdf endpoints must be exactly 0 and 1");
    }
    return d;
}

json weighting_to_json(const Weighting& w) {
    json j{{"kind", w.kind == Weighting::Kind::unit ? "unit" : "edm"}};
    if (w.kind == Weighting::Kind::edm) {
        j["sigma_data"] = w.sigma_data;
    }
    return j;
}

Weighting weighting_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "unit") {
        return Weighting::unit();
    }
    if (kind == "edm") {
        return Weighting::edm(j.at("sigma_data").get<double>());
    }
    throw DataError("unknown weighting kind '" + kind + "'");
}

json pivot_to_json(const PivotMethod& p) {
    if (p.kind == PivotMethod::Kind::onset) {
        return json{{"kind", "onset"}, {"p", p.p}};
    }
    return json{{"kind", "powerlaw"}, {"window", p.window}, {"slope_tol", p.slope_tol}};
}

PivotMethod pivot_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "onset") {
        return PivotMethod::onset(j.at("p").get<double>());
    }
    if (kind == "powerlaw") {
        return PivotMethod::powerlaw(j.at("window").get<std::size_t>(),
                                     j.at("slope_tol").get<double>());
    }
    throw DataError("unknown pivot kind '" + kind + "'");
}

}  // namespace

void write_profile_csv(const std::filesystem::path& path, const Profile& profile) {
    auto out = open_out(path);
    out << "sigma,value\n";
    for (std::size_t k = 0; k < profile.grid.K; ++k) {
        out << format_double(profile.grid.centers[k]) << "," << format_double(profile.values[k])
            << "\n";
    }
}

Profile read_profile_csv(const std::filesystem::path& path, const std::string& column) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ":1: empty profile file");
    }
    const auto header = split_csv(line);
    if (header.empty() || header.front() != "sigma") {
        throw DataError(path.string() + ":1: first column must be 'sigma'");
    }
    std::size_t value_col = 0;
    if (column == "auto") {
        for (const char* want : {"entropy_rate", "value", "mmse"}) {
            for (std::size_t c = 1; c < header.size(); ++c) {
                if (header[c] == want) {
                    value_col = c;
                    break;
                }
            }
            if (value_col != 0) {
                break;
            }
        }
    } else {
        for (std::size_t c = 1; c < header.size(); ++c) {
            if (header[c] == column) {
                value_col = c;
            }
        }
    }
    if (value_col == 0) {
        throw DataError(path.string() + ":1: no usable value column (wanted '" + column + "')");
    }
    std::vector<double> centers, values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != header.size()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " columns, got " +
                            std::to_string(fields.size()));
        }
        centers.push_back(parse_double(fields[0], path, line_no));
        values.push_back(parse_double(fields[value_col], path, line_no));
    }
    Profile profile;
    profile.grid = grid_from_centers(centers, path);
    profile.values = std::move(values);
    return profile;
}

void write_rate_csv(const std::filesystem::path& path, const Profile& mmse, const Profile& rate) {
    if (mmse.values.size() != rate.values.size()) {
        throw ShapeError("mmse and rate profiles differ in size");
    }
    auto out = open_out(path);
    out << "sigma,mmse,entropy_rate\n";
    for (std::size_t k = 0; k < mmse.grid.K; ++k) {
        out << format_double(mmse.grid.centers[k]) << "," << format_double(mmse.values[k]) << ","
            << format_double(rate.values[k]) << "\n";
    }
}

void write_density_json(const std::filesystem::path& path, const TabulatedDensity& density) {
    auto out = open_out(path);
    out << density_to_json(density).dump(2) << "\n";
}

TabulatedDensity read_density_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return density_from_json(j, path.string());
}

void write_schedule_json(const std::filesystem::path& path, const ScheduleArtifacts& artifacts) {
    json j = density_to_json(artifacts.pi);
    j["weighting"] = weighting_to_json(artifacts.weighting);
    j["gate"] = json{{"c", artifacts.gate.c}, {"n", artifacts.gate.n}};
    j["pivot_method"] = pivot_to_json(artifacts.pivot);
    j["u_cdf"] = artifacts.u_cdf;
    j["rho"] = artifacts.rho;
    j["phi"] = artifacts.phi;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

ScheduleArtifacts read_schedule_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    ScheduleArtifacts artifacts;
    artifacts.pi = density_from_json(j, path.string());
    artifacts.weighting = weighting_from_json(j.at("weighting"));
    artifacts.gate.c = j.at("gate").at("c").get<double>();
    artifacts.gate.n = j.at("gate").at("n").get<double>();
    artifacts.pivot = pivot_from_json(j.at("pivot_method"));
    artifacts.u_cdf = j.at("u_cdf").get<std::vector<double>>();
    artifacts.rho = j.at("rho").get<std::vector<double>>();
    artifacts.phi = j.at("phi").get<std::vector<double>>();
    if (artifacts.u_cdf.size() != artifacts.pi.grid.K + 1 ||
        artifacts.rho.size() != artifacts.pi.grid.K || artifacts.phi.size() != artifacts.pi.grid.K) {
        throw DataError(path.string() + ": schedule arrays have inconsistent lengths");
    }
    return artifacts;
}

Dataset read_dataset_csv(const std::filesystem::path& path, bool skip_header) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && skip_header) {
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            row.push_back(parse_double(f, path, line_no));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": row width differs from the first row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw DataError(path.string() + ": dataset file has no samples");
    }
    return Dataset::from_rows(rows);
}

void write_dataset_csv(const std::filesystem::path& path,
                       const std::vector<std::vector<double>>& rows) {
    auto out = open_out(path);
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0) {
                out << ",";
            }
            out << format_double(row[j]);
        }
        out << "\n";
    }
}

void write_grid_csv(const std::filesystem::path& path, const InferenceGrid& grid) {
    auto out = open_out(path);
    out << "index,sigma\n";
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        out << i << "," << format_double(grid.nodes[i]) << "\n";
    }
}

InferenceGrid read_grid_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"index", "sigma"}) {
        throw DataError(path.string() + ":1: expected header 'index,sigma'");
    }
    std::vector<double> nodes;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 2) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 2 columns");
        }
        nodes.push_back(parse_double(fields[1], path, line_no));
    }
    try {
        return make_inference_grid(std::move(nodes));
    } catch (const ConfigError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_checkpoint_json(const std::filesystem::path& path, const MlpDenoiser& denoiser) {
    json j;
    j["format_version"] = 1;
    j["data_dim"] = denoiser.dim();
    j["activation"] = "tanh";
    j["layer_sizes"] = denoiser.net().sizes;
    j["weights"] = denoiser.net().weights;
    j["biases"] = denoiser.net().biases;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

MlpDenoiser read_checkpoint_json(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (j.at("format_version").get<int>() != 1) {
        throw DataError(path.string() + ": unsupported checkpoint version");
    }
    Mlp net;
    net.sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    if (net.sizes.size() < 2 || net.weights.size() != net.sizes.size() - 1 ||
        net.biases.size() != net.sizes.size() - 1) {
        throw DataError(path.string() + ": inconsistent checkpoint layer arrays");
    }
    for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
        if (net.weights[l].size() != net.sizes[l] * net.sizes[l + 1] ||
            net.biases[l].size() != net.sizes[l + 1]) {
            throw DataError(path.string() + ": checkpoint parameter shapes are wrong");
        }
    }
    const auto data_dim = j.at("data_dim").get<std::size_t>();
    try {
        return MlpDenoiser(data_dim, std::move(net));
    } catch (const ShapeError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_refresh_log(const std::filesystem::path& path, const std::vector<RefreshRecord>& log,
                       const std::vector<double>& tv_to_reference) {
    if (!tv_to_reference.empty() && tv_to_reference.size() != log.size()) {
        throw ShapeError("tv_to_reference length does not match the refresh log");
    }
    auto out = open_out(path);
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& rec = log[i];
        json j{{"step", rec.step},     {"version", rec.version}, {"pivot_c", rec.pivot_c},
               {"r_hat", rec.r_hat},   {"r_tilde", rec.r_tilde}, {"density", rec.density}};
        if (!tv_to_reference.empty() && std::isfinite(tv_to_reference[i])) {
            j["tv_to_reference"] = tv_to_reference[i];
        }
        out << j.dump() << "\n";
    }
}

void write_train_log_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows) {
    auto out = open_out(path);
    out << "step,mean_loss,snapshot_version\n";
    for (const auto& row : rows) {
        out << row.step << "," << format_double(row.mean_loss) << "," << row.snapshot_version
            << "\n";
    }
}

SchedulerConfig read_scheduler_config(const std::filesystem::path& path,
                                      BaselineSampler* baseline_out) {
    auto in = open_in(path);
    SchedulerConfig cfg;
    BaselineSampler base = BaselineSampler::log_uniform();
    bool base_is_lognormal = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) {
                return std::string();
            }
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        if (strip(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        const auto as_double = [&] { return parse_double(value, path, line_no); };
        const auto as_size = [&] { return static_cast<std::size_t>(as_double()); };
        const auto as_u64 = [&] { return static_cast<std::uint64_t>(as_double()); };
        const auto as_bool = [&] {
            if (value == "on" || value == "true" || value == "1") return true;
            if (value == "off" || value == "false" || value == "0") return false;
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad flag '" + value +
                            "'");
        };
        if (key == "sigma_min") cfg.range.sigma_min = as_double();
        else if (key == "sigma_max") cfg.range.sigma_max = as_double();
        else if (key == "K") cfg.K = as_size();
        else if (key == "N_warm") cfg.N_warm = as_u64();
        else if (key == "M") cfg.M = as_u64();
        else if (key == "B") cfg.B = as_size();
        else if (key == "beta") cfg.beta = as_double();
        else if (key == "N_min") cfg.N_min = as_size();
        else if (key == "n_gate") cfg.n_gate = as_double();
        else if (key == "smoothing") cfg.smoothing = as_bool();
        else if (key == "seed_ema_with_first") cfg.seed_ema_with_first = as_bool();
        else if (key == "clear_buffers_on_refresh") cfg.clear_buffers_on_refresh = as_bool();
        else if (key == "weighting") {
            if (value == "unit") cfg.weighting = Weighting::unit();
            else if (value == "edm") cfg.weighting.kind = Weighting::Kind::edm;
            else throw DataError(path.string() + ":" + std::to_string(line_no) +
                                 ": weighting must be unit or edm");
        } else if (key == "sigma_data") cfg.weighting.sigma_data = as_double();
        else if (key == "pivot") {
            if (value == "onset") cfg.pivot.kind = PivotMethod::Kind::onset;
            else if (value == "powerlaw") cfg.pivot.kind = PivotMethod::Kind::powerlaw;
            else throw DataError(path.string() + ":" + std::to_string(line_no) +
                                 ": pivot must be onset or powerlaw");
        } else if (key == "pivot_p") cfg.pivot.p = as_double();
        else if (key == "pivot_window") cfg.pivot.window = as_size();
        else if (key == "pivot_slope_tol") cfg.pivot.slope_tol = as_double();
        else if (key == "pi_base") {
            if (value == "log_uniform") base_is_lognormal = false;
            else if (value == "log_normal") base_is_lognormal = true;
            else throw DataError(path.string() + ":" + std::to_string(line_no) +
                                 ": pi_base must be log_uniform or log_normal");
        } else if (key == "pi_base_mu") base.mu = as_double();
        else if (key == "pi_base_s") base.s = as_double();
        else {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown key '" +
                            key + "'");
        }
    }
    if (base_is_lognormal) {
        base.kind = BaselineSampler::Kind::log_normal;
        cfg.pi_base = baseline_sampler(base, build_log_grid(cfg.range, cfg.K));
    }
    if (baseline_out != nullptr) {
        *baseline_out = base;
    }
    return cfg;
}

}  // namespace infonoise
