#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "infonoise/allocate.hpp"
#include "infonoise/cli.hpp"
#include "infonoise/errors.hpp"
#include "infonoise/io.hpp"

using namespace infonoise;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("infonoise");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path test_dir() {
    const fs::path dir = fs::current_path() / "cli_test_out";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_two_point(const fs::path& dir) {
    const fs::path p = dir / "twopoint.csv";
    std::ofstream out(p);
    out << "-1\n1\n";
    return p;
}

}  // namespace

TEST_CASE("profile and toy runs are byte-deterministic") {
    const fs::path dir = test_dir();
    const fs::path data = write_two_point(dir);
    const auto p1 = (dir / "p1.csv").string();
    const auto p2 = (dir / "p2.csv").string();
    const std::vector<std::string> common{"profile", "--data", data.string(), "--sigma_min",
                                          "0.05",    "--sigma_max", "50", "--K", "64",
                                          "--n_mc",  "3000", "--seed", "9"};
    auto args1 = common;
    args1.insert(args1.end(), {"--out", p1});
    auto args2 = common;
    args2.insert(args2.end(), {"--out", p2});
    REQUIRE(run(args1) == 0);
    REQUIRE(run(args2) == 0);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(fs::exists(p1 + ".manifest.json"));

    const auto t1 = (dir / "t1.csv").string();
    const auto t2 = (dir / "t2.csv").string();
    REQUIRE(run({"toy", "--a", "1", "--K", "32", "--out", t1}) == 0);
    REQUIRE(run({"toy", "--a", "1", "--K", "32", "--out", t2}) == 0);
    CHECK(slurp(t1) == slurp(t2));
}

TEST_CASE("schedule JSON rebuilds u and the sampler bit-exactly") {
    const fs::path dir = test_dir();
    const fs::path data = write_two_point(dir);
    const auto prof_path = (dir / "roundtrip_profile.csv").string();
    REQUIRE(run({"profile", "--data", data.string(), "--sigma_min", "0.05", "--sigma_max", "50",
                 "--K", "64", "--n_mc", "3000", "--seed", "4", "--out", prof_path}) == 0);
    const auto sched_path = (dir / "roundtrip_schedule.json").string();
    REQUIRE(run({"schedule", "--profile", prof_path, "--out", sched_path}) == 0);

    // in-process pipeline from the same profile with the same defaults
    const Profile rate = read_profile_csv(prof_path);
    const double c = calibrate_pivot(rate, PivotMethod::onset(0.002));
    Profile gated = apply_gate(rate, GateParams{c, 3.0});
    gated = smooth_profile(gated);
    const Allocation alloc = build_allocation(gated);
    const TabulatedDensity pi = schedule_from_allocation(alloc, Weighting::unit());

    const ScheduleArtifacts artifacts = read_schedule_json(sched_path);
    REQUIRE(artifacts.u_cdf.size() == alloc.rho.cdf.size());
    for (std::size_t k = 0; k < artifacts.u_cdf.size(); ++k) {
        CHECK(artifacts.u_cdf[k] == alloc.rho.cdf[k]);  // bitwise through JSON
    }
    TabulatedDensity u_from_file = artifacts.pi;
    u_from_file.density = artifacts.rho;
    u_from_file.cdf = artifacts.u_cdf;
    for (int i = 0; i <= 100; ++i) {
        const double z = static_cast<double>(i) / 100.0;
        CHECK(inverse_cdf_sample(u_from_file, z) == alloc.sigma_at_time(z));
        CHECK(inverse_cdf_sample(artifacts.pi, z) == inverse_cdf_sample(pi, z));
    }
    // phi / rho stays constant across cells in the file
    const double r0 = artifacts.phi[0] / artifacts.rho[0];
    for (std::size_t k = 0; k < artifacts.rho.size(); ++k) {
        CHECK(artifacts.phi[k] / artifacts.rho[k] == doctest::Approx(r0).epsilon(1e-9));
    }
    CHECK(artifacts.gate.c >= 0.05);
}

TEST_CASE("simulate is deterministic and logs refreshes") {
    const fs::path dir = test_dir();
    const fs::path data = write_two_point(dir);
    const auto log1 = (dir / "sim1.jsonl").string();
    const auto log2 = (dir / "sim2.jsonl").string();
    const std::vector<std::string> common{
        "simulate", "--data", data.string(), "--steps", "6000",  "--seed",  "3",
        "--K",      "16",     "--N_warm",    "1000",    "--M",   "1000",    "--N_min",
        "4",        "--B",    "64",          "--sigma_min", "0.01", "--sigma_max", "20"};
    auto a1 = common;
    a1.insert(a1.end(), {"--out", log1});
    auto a2 = common;
    a2.insert(a2.end(), {"--out", log2});
    REQUIRE(run(a1) == 0);
    REQUIRE(run(a2) == 0);
    const std::string body = slurp(log1);
    CHECK(body == slurp(log2));
    CHECK(body.find("\"r_hat\"") != std::string::npos);
    CHECK(body.find("\"version\":1") != std::string::npos);
}

TEST_CASE("grid command prints the NFE pairing") {
    std::stringstream captured;
    auto* old = std::cout.rdbuf(captured.rdbuf());
    const int rc = run({"grid", "--nfe_check", "18"});
    std::cout.rdbuf(old);
    CHECK(rc == 0);
    CHECK(captured.str() == "NFE 35\n");
}

TEST_CASE("grid and sample round-trip through CSV artifacts") {
    const fs::path dir = test_dir();
    const fs::path data = write_two_point(dir);
    const auto grid_path = (dir / "grid.csv").string();
    REQUIRE(run({"grid", "--mode", "reference", "--steps", "18", "--sigma_min", "0.002",
                 "--sigma_max", "80", "--out", grid_path}) == 0);
    const InferenceGrid grid = read_grid_csv(grid_path);
    CHECK(grid.steps() == 18);
    CHECK(grid.nodes.front() == 80.0);
    CHECK(grid.nodes.back() == 0.002);

    const auto samples_path = (dir / "gen.csv").string();
    REQUIRE(run({"sample", "--denoiser", "oracle", "--data", data.string(), "--grid_file",
                 grid_path, "--n_samples", "200", "--seed", "12", "--out", samples_path}) == 0);
    const Dataset gen = read_dataset_csv(samples_path);
    REQUIRE(gen.size() == 200);
    int close = 0;
    for (std::size_t i = 0; i < gen.size(); ++i) {
        const double v = gen.sample(i)[0];
        if (std::min(std::abs(v - 1.0), std::abs(v + 1.0)) <= 0.01) {
            ++close;
        }
    }
    CHECK(close >= 198);
}

TEST_CASE("exit codes follow the error taxonomy") {
    const fs::path dir = test_dir();
    CHECK(run({"schedule", "--profile", (dir / "missing.csv").string(), "--out",
               (dir / "x.json").string()}) == 3);
    CHECK(run({"toy", "--a", "1", "--K", "1", "--out", (dir / "x.csv").string()}) == 2);

    // an all-zero profile is degenerate for schedule construction
    const LogGrid g = build_log_grid({0.1, 10.0}, 16);
    const fs::path zeros = dir / "zeros.csv";
    write_profile_csv(zeros, Profile{g, std::vector<double>(g.K, 0.0)});
    CHECK(run({"schedule", "--profile", zeros.string(), "--out",
               (dir / "z.json").string()}) == 4);
}

TEST_CASE("dataset parser reports the offending line") {
    const fs::path dir = test_dir();
    const fs::path bad = dir / "bad.csv";
    {
        std::ofstream out(bad);
        out << "1.0\nnot_a_number\n";
    }
    CHECK_THROWS_WITH_AS(read_dataset_csv(bad), doctest::Contains(":2:"), DataError);
    const fs::path ragged = dir / "ragged.csv";
    {
        std::ofstream out(ragged);
        out << "1.0,2.0\n3.0\n";
    }
    CHECK_THROWS_WITH_AS(read_dataset_csv(ragged), doctest::Contains(":2:"), DataError);
}

TEST_CASE("scheduler config file mirrors field names") {
    const fs::path dir = test_dir();
    const fs::path cfg_path = dir / "sched.cfg";
    {
        std::ofstream out(cfg_path);
        out << "sigma_min = 0.01\nsigma_max = 20\nK = 24\nN_warm = 100\nM = 50\nB = 32\n"
            << "beta = 0.5\nN_min = 2\nn_gate = 4\nweighting = unit\npivot = onset\n"
            << "pivot_p = 0.004\nsmoothing = off\n";
    }
    const SchedulerConfig cfg = read_scheduler_config(cfg_path);
    CHECK(cfg.range.sigma_min == 0.01);
    CHECK(cfg.K == 24);
    CHECK(cfg.N_warm == 100);
    CHECK(cfg.M == 50);
    CHECK(cfg.B == 32);
    CHECK(cfg.beta == 0.5);
    CHECK(cfg.N_min == 2);
    CHECK(cfg.n_gate == 4.0);
    CHECK(cfg.pivot.p == 0.004);
    CHECK_FALSE(cfg.smoothing);

    const fs::path bad_cfg = dir / "bad.cfg";
    {
        std::ofstream out(bad_cfg);
        out << "no_such_key = 1\n";
    }
    CHECK_THROWS_AS(read_scheduler_config(bad_cfg), DataError);
}

TEST_CASE("simulate accepts a scheduler config file with flag overrides") {
    const fs::path dir = test_dir();
    const fs::path data = write_two_point(dir);
    const fs::path cfg_path = dir / "sim.cfg";
    {
        std::ofstream out(cfg_path);
        out << "sigma_min = 0.01\nsigma_max = 20\nK = 8\nN_warm = 200\nM = 100\nN_min = 2\n";
    }
    const auto log_path = (dir / "sim_cfg.jsonl").string();
    // --K overrides the file value
    REQUIRE(run({"simulate", "--data", data.string(), "--config", cfg_path.string(), "--K", "12",
                 "--steps", "800", "--seed", "1", "--out", log_path}) == 0);
    const auto manifest = nlohmann::json::parse(slurp(log_path + ".manifest.json"));
    CHECK(manifest["config"]["K"].get<int>() == 12);
    CHECK(manifest["config"]["N_warm"].get<int>() == 200);
    CHECK(manifest["config"]["M"].get<int>() == 100);
    // refreshes happened on the merged configuration
    const std::string body = slurp(log_path);
    CHECK(body.find("\"version\":1") != std::string::npos);

    // a log-normal baseline from the file survives a grid override and is
    // recorded in the manifest
    const fs::path cfg2 = dir / "sim_lognormal.cfg";
    {
        std::ofstream out(cfg2);
        out << "sigma_min = 0.01\nsigma_max = 20\nK = 8\npi_base = log_normal\n"
            << "pi_base_mu = -0.5\npi_base_s = 0.9\nN_warm = 100\nM = 100\nN_min = 1\n";
    }
    const auto log2 = (dir / "sim_cfg2.jsonl").string();
    REQUIRE(run({"simulate", "--data", data.string(), "--config", cfg2.string(), "--K", "10",
                 "--steps", "400", "--seed", "1", "--out", log2}) == 0);
    const auto manifest2 = nlohmann::json::parse(slurp(log2 + ".manifest.json"));
    CHECK(manifest2["config"]["K"].get<int>() == 10);
    CHECK(manifest2["config"]["pi_base"].get<std::string>() == "log_normal");
    CHECK(manifest2["config"]["pi_base_mu"].get<double>() == -0.5);
    CHECK(manifest2["config"]["pi_base_s"].get<double>() == 0.9);
}

TEST_CASE("density JSON round-trips") {
    const fs::path dir = test_dir();
    const LogGrid g = build_log_grid({0.1, 10.0}, 12);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        vals[k] = 1.0 + std::sin(0.5 * static_cast<double>(k));
    }
    const TabulatedDensity d = normalize_to_density(Profile{g, vals});
    const fs::path path = dir / "density.json";
    write_density_json(path, d);
    const TabulatedDensity back = read_density_json(path);
    CHECK(back.grid.edges == d.grid.edges);
    CHECK(back.density == d.density);
    CHECK(back.cdf == d.cdf);
    for (double z : {0.02, 0.5, 0.93}) {
        CHECK(inverse_cdf_sample(back, z) == inverse_cdf_sample(d, z));
    }
}

TEST_CASE("relative outputs land in INFONOISE_OUT") {
    const fs::path dir = test_dir() / "env_out";
    fs::remove_all(dir);
    setenv("INFONOISE_OUT", dir.string().c_str(), 1);
    const int rc = run({"toy", "--a", "1", "--K", "16", "--out", "env_toy.csv"});
    unsetenv("INFONOISE_OUT");
    REQUIRE(rc == 0);
    CHECK(fs::exists(dir / "env_toy.csv"));
    CHECK(fs::exists(dir / "env_toy.csv.manifest.json"));
}

TEST_CASE("simulate reports the TV distance against a reference profile") {
    const fs::path dir = test_dir();
    const fs::path data = write_two_point(dir);
    const auto toy_csv = (dir / "toy_ref.csv").string();
    REQUIRE(run({"toy", "--a", "1", "--sigma_min", "0.002", "--sigma_max", "80", "--K", "64",
                 "--out", toy_csv}) == 0);

    // before any refresh the log is empty
    const auto empty_log = (dir / "sim_empty.jsonl").string();
    REQUIRE(run({"simulate", "--data", data.string(), "--steps", "100", "--N_warm", "5000",
                 "--sigma_min", "0.002", "--sigma_max", "80", "--K", "64", "--out",
                 empty_log}) == 0);
    CHECK(slurp(empty_log).empty());

    // the stated online-convergence configuration, driven through the CLI
    const auto log_path = (dir / "sim_tv.jsonl").string();
    REQUIRE(run({"simulate", "--data", data.string(), "--steps", "45000", "--seed", "2",
                 "--sigma_min", "0.002", "--sigma_max", "80", "--K", "64", "--B", "256",
                 "--beta", "0.3", "--M", "2000", "--N_warm", "5000", "--N_min", "8",
                 "--reference_profile", toy_csv, "--out", log_path}) == 0);
    std::istringstream lines(slurp(log_path));
    std::string line, last;
    std::size_t count = 0;
    while (std::getline(lines, line)) {
        if (!line.empty()) {
            last = line;
            ++count;
        }
    }
    CHECK(count == 20);
    const auto rec = nlohmann::json::parse(last);
    REQUIRE(rec.contains("tv_to_reference"));
    CHECK(rec["tv_to_reference"].get<double>() <= 0.05);
}

TEST_CASE("infogrid mode produces a uniformly spaced information grid") {
    const fs::path dir = test_dir();
    const LogGrid g = build_log_grid({0.01, 10.0}, 64);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        vals[k] = 1.0 / g.centers[k];
    }
    const fs::path prof = dir / "rate_profile.csv";
    write_profile_csv(prof, Profile{g, vals});
    const auto grid_path = (dir / "infogrid.csv").string();
    REQUIRE(run({"grid", "--mode", "infogrid", "--profile", prof.string(), "--steps", "10",
                 "--out", grid_path}) == 0);
    const InferenceGrid grid = read_grid_csv(grid_path);
    REQUIRE(grid.steps() == 10);
    // rate 1/sigma makes the information coordinate linear in sigma
    for (std::size_t i = 0; i + 1 < grid.nodes.size(); ++i) {
        CHECK(grid.nodes[i] - grid.nodes[i + 1] ==
              doctest::Approx((10.0 - 0.01) / 10.0).epsilon(1e-9));
    }
}

TEST_CASE("checkpoints round-trip through JSON") {
    const fs::path dir = test_dir();
    MlpDenoiser den(2, {6, 4}, 33);
    const fs::path ckpt = dir / "ck.json";
    write_checkpoint_json(ckpt, den);
    const MlpDenoiser loaded = read_checkpoint_json(ckpt);
    CHECK(loaded.net().sizes == den.net().sizes);
    CHECK(loaded.net().weights == den.net().weights);
    CHECK(loaded.net().biases == den.net().biases);
    const std::vector<double> x{0.3, -0.8};
    CHECK(loaded.denoise(x, 0.7) == den.denoise(x, 0.7));
}
