#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "infonoise/allocate.hpp"
#include "infonoise/errors.hpp"
#include "infonoise/oracle.hpp"
#include "infonoise/rng.hpp"

using namespace infonoise;

TEST_CASE("gate values and monotonicity") {
    const GateParams p{2.0, 3.0};
    CHECK(gate(2.0, p) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gate(20.0, p) == doctest::Approx(1000.0 / 1001.0).epsilon(1e-14));
    CHECK_THROWS_AS(gate(0.0, p), DomainError);
    CHECK_THROWS_AS(gate(-1.0, p), DomainError);
    CHECK_THROWS_AS(gate(1.0, GateParams{1.0, 1.5}), ConfigError);

    // strictly increasing over eight decades around the pivot
    auto rng = substream(11, 0);
    std::vector<double> sigmas(200);
    for (auto& s : sigmas) {
        s = p.c * std::pow(10.0, 8.0 * (uniform01(rng) - 0.5));
    }
    std::sort(sigmas.begin(), sigmas.end());
    double prev_gate = 0.0;
    for (double sigma : sigmas) {
        const double g = gate(sigma, p);
        CHECK(g > prev_gate);
        CHECK(g < 1.0);
        prev_gate = g;
    }
}

TEST_CASE("gate with n=2 recovers the bounded edm factor") {
    const double sd = 0.5;
    const Weighting w = Weighting::edm(sd);
    for (double sigma : {0.01, 0.3, 1.0, 7.0, 50.0}) {
        const double lhs = 1.0 / loss_weight(w, sigma);
        const double rhs = sd * sd * gate(sigma, GateParams{sd, 2.0});
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
        // direct form sigma^2/(sigma^2 + sd^2)
        CHECK(gate(sigma, GateParams{sd, 2.0}) ==
              doctest::Approx(sigma * sigma / (sigma * sigma + sd * sd)).epsilon(1e-13));
    }
}

TEST_CASE("loss weights") {
    CHECK(loss_weight(Weighting::unit(), 3.0) == 1.0);
    const Weighting w = Weighting::edm(0.5);
    CHECK(loss_weight(w, 0.5) == doctest::Approx(2.0 / 0.25).epsilon(1e-14));
    CHECK_THROWS_AS(loss_weight(w, 0.0), DomainError);
    CHECK_THROWS_AS(Weighting::edm(0.0), ConfigError);
}

TEST_CASE("onset pivot on a step profile") {
    const LogGrid g = build_log_grid({0.1, 100.0}, 40);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        vals[k] = (g.centers[k] < 5.0) ? 10.0 : 0.0;
    }
    const double c = calibrate_pivot_onset(Profile{g, vals}, 0.002);
    // smallest center at or above 5
    const double expected = *std::lower_bound(g.centers.begin(), g.centers.end(), 5.0);
    CHECK(c == expected);
}

TEST_CASE("onset pivot falls back to sigma_min when nothing is suppressed") {
    const LogGrid g = build_log_grid({0.1, 100.0}, 40);
    std::vector<double> vals(g.K, 1.0);
    vals[g.K / 2] = 2.0;  // top cell still at 0.5 of the max, well above p
    CHECK(calibrate_pivot_onset(Profile{g, vals}, 0.002) == g.range.sigma_min);
    CHECK_THROWS_AS(calibrate_pivot_onset(Profile{g, std::vector<double>(g.K, 0.0)}, 0.002),
                    DegenerateError);
}

TEST_CASE("onset pivot locates a synthetic bump within one cell") {
    const LogGrid g = build_log_grid({0.002, 80.0}, 128);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        const double t = std::log(g.centers[k]) - std::log(0.5);
        vals[k] = std::exp(-t * t);
    }
    const Profile prof{g, vals};
    const double c = calibrate_pivot_onset(prof, 0.002);

    // brute-force oracle: scan downward for the first center whose
    // max-normalized value reaches the threshold
    const double peak = *std::max_element(vals.begin(), vals.end());
    std::size_t first_above = g.K;
    for (std::size_t k = g.K; k-- > 0;) {
        if (vals[k] / peak >= 0.002) {
            first_above = k;
            break;
        }
    }
    REQUIRE(first_above < g.K - 1);
    const std::size_t c_cell = locate_bin(g, c);
    CHECK(std::abs(static_cast<long>(c_cell) - static_cast<long>(first_above + 1)) <= 1);

    // scale invariance of the max-normalization
    std::vector<double> scaled = vals;
    for (auto& v : scaled) {
        v *= 7.3e4;
    }
    CHECK(calibrate_pivot_onset(Profile{g, scaled}, 0.002) == c);
}

TEST_CASE("powerlaw pivot on an exact power law spans the whole grid") {
    const LogGrid g = build_log_grid({0.001, 10.0}, 64);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        vals[k] = 0.3 * std::pow(g.centers[k], 1.7);
    }
    CHECK(calibrate_pivot_powerlaw(Profile{g, vals}, 9, 0.15) == g.range.sigma_max);
}

TEST_CASE("powerlaw pivot detects a planted break near 0.1") {
    const LogGrid g = build_log_grid({0.002, 80.0}, 128);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        const double s = g.centers[k];
        vals[k] = (s < 0.1) ? s * s : 0.01;
    }
    const double c = calibrate_pivot_powerlaw(Profile{g, vals}, 9, 0.15);
    CHECK(std::abs(std::log10(c / 0.1)) <= 0.5);
}

TEST_CASE("powerlaw pivot knee fallback when no slope is stable") {
    const LogGrid g = build_log_grid({0.01, 10.0}, 24);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        // quadratic in log sigma: the log-log slope grows linearly, so no
        // contiguous window-sized segment has an approximately constant slope
        const double t = std::log(g.centers[k] / g.centers[0]);
        vals[k] = std::exp(0.5 * t * t);
    }
    vals[15] *= 1e6;  // strongest curvature here
    const double c = calibrate_pivot_powerlaw(Profile{g, vals}, 9, 0.15);
    // knee oracle: argmax |second difference of log values|
    std::size_t knee = 1;
    double best = -1.0;
    for (std::size_t k = 1; k + 1 < g.K; ++k) {
        const double curv = std::abs(std::log(vals[k + 1]) - 2.0 * std::log(vals[k]) +
                                     std::log(vals[k - 1]));
        if (curv > best) {
            best = curv;
            knee = k;
        }
    }
    CHECK(c == g.centers[knee]);
    vals[3] = 0.0;
    CHECK_THROWS_AS(calibrate_pivot_powerlaw(Profile{g, vals}, 9, 0.15), DegenerateError);
}

TEST_CASE("apply_gate behaviour") {
    const LogGrid g = build_log_grid({0.01, 10.0}, 48);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        vals[k] = 2.0 + std::sin(static_cast<double>(k));
    }
    const Profile prof{g, vals};

    // a pivot far below the range leaves the profile untouched
    const Profile gated_inert = apply_gate(prof, GateParams{1e-4, 3.0});
    for (std::size_t k = 0; k < g.K; ++k) {
        CHECK(gated_inert.values[k] == doctest::Approx(vals[k]).epsilon(1e-4));
    }

    const Profile zero{g, std::vector<double>(g.K, 0.0)};
    const Profile gated_zero = apply_gate(zero, GateParams{1.0, 3.0});
    for (double v : gated_zero.values) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("gated 1/sigma tail has log-log slope n-1") {
    const LogGrid g = build_log_grid({0.002, 80.0}, 128);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        vals[k] = 1.0 / g.centers[k];
    }
    const double c = 1.0;
    const Profile gated = apply_gate(Profile{g, vals}, GateParams{c, 3.0});
    std::size_t last = 0;
    while (last + 1 < g.K && g.centers[last + 1] <= c / 10.0) {
        ++last;
    }
    REQUIRE(last >= 8);
    CHECK(testing::loglog_slope(gated, 0, last) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("build_allocation entropic time") {
    const LogGrid g = build_log_grid({1.0, 9.0}, 32);
    const Allocation alloc = build_allocation(Profile{g, std::vector<double>(g.K, 4.0)});
    CHECK(alloc.entropic_time(1.0) == 0.0);
    CHECK(alloc.entropic_time(9.0) == 1.0);
    CHECK(alloc.entropic_time(5.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(alloc.sigma_at_time(0.25) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_THROWS_AS(build_allocation(Profile{g, std::vector<double>(g.K, 0.0)}), DegenerateError);
}

TEST_CASE("entropic time equals the normalized conditional-entropy increase") {
    // exact rate of the Gaussian prior: d s^2 / (sigma (s^2 + sigma^2))
    const GaussianPrior prior{1.3, 4};
    const LogGrid g = build_log_grid({0.05, 50.0}, 512);
    std::vector<double> rate(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        const double s = g.centers[k];
        rate[k] = gaussian_mmse(prior, s) / (s * s * s);
    }
    const Allocation alloc = build_allocation(Profile{g, rate});
    const double h_lo = gaussian_cond_entropy(prior, 0.05);
    const double h_hi = gaussian_cond_entropy(prior, 50.0);
    for (double sigma : {0.1, 0.9, 4.2, 30.0}) {
        const double expected = (gaussian_cond_entropy(prior, sigma) - h_lo) / (h_hi - h_lo);
        CHECK(alloc.entropic_time(sigma) == doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("schedule matches the allocation under unit weighting") {
    const LogGrid g = build_log_grid({0.01, 10.0}, 64);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        const double t = std::log(g.centers[k] / 0.5);
        vals[k] = std::exp(-t * t);
    }
    const Allocation alloc = build_allocation(Profile{g, vals});
    const TabulatedDensity pi = schedule_from_allocation(alloc, Weighting::unit());
    for (std::size_t k = 0; k < g.K; ++k) {
        CHECK(pi.density[k] == doctest::Approx(alloc.rho.density[k]).epsilon(1e-12));
    }
}

TEST_CASE("edm schedule keeps the effective emphasis proportional to rho") {
    const LogGrid g = build_log_grid({0.01, 10.0}, 64);
    std::vector<double> vals(g.K);
    for (std::size_t k = 0; k < g.K; ++k) {
        const double t = std::log(g.centers[k] / 0.5);
        vals[k] = std::exp(-t * t) + 0.01;
    }
    const Allocation alloc = build_allocation(Profile{g, vals});
    const Weighting w = Weighting::edm(0.5);
    const TabulatedDensity pi = schedule_from_allocation(alloc, w);
    const Profile phi = effective_emphasis(pi, w);
    const double ratio0 = phi.values[0] / alloc.rho.density[0];
    for (std::size_t k = 0; k < g.K; ++k) {
        CHECK(phi.values[k] / alloc.rho.density[k] == doctest::Approx(ratio0).epsilon(1e-9));
    }
    // schedule consistency: normalize(phi) recovers rho
    const TabulatedDensity back = normalize_to_density(phi);
    for (std::size_t k = 0; k < g.K; ++k) {
        CHECK(back.density[k] == doctest::Approx(alloc.rho.density[k]).epsilon(1e-9));
    }
}

TEST_CASE("uniform rho with w = sigma yields a log-uniform schedule") {
    const LogGrid g = build_log_grid({0.5, 32.0}, 256);
    const Allocation alloc = build_allocation(Profile{g, std::vector<double>(g.K, 1.0)});
    const TabulatedDensity pi = schedule_from_weight_fn(alloc, [](double s) { return s; });
    const double z = std::log(32.0 / 0.5);
    for (std::size_t k = 0; k < g.K; k += 16) {
        const double expected = 1.0 / (g.centers[k] * z);
        CHECK(pi.density[k] == doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("effective emphasis basics") {
    const LogGrid g = build_log_grid({0.1, 10.0}, 8);
    std::vector<double> vals{0.0, 1.0, 2.0, 3.0, 1.0, 0.5, 0.2, 0.1};
    const TabulatedDensity pi = normalize_to_density(Profile{g, vals});
    const Profile phi = effective_emphasis(pi, Weighting::unit());
    for (std::size_t k = 0; k < g.K; ++k) {
        CHECK(phi.values[k] == pi.density[k]);
    }
    CHECK(phi.values[0] == 0.0);  // zero pi cell stays zero
}

TEST_CASE("log-uniform baseline sampler") {
    const LogGrid g = build_log_grid({1.0, M_E}, 512);
    const TabulatedDensity d = baseline_sampler(BaselineSampler::log_uniform(), g);
    // ln(e/1) = 1, so the density is 1/sigma already normalized
    for (std::size_t k = 0; k < g.K; k += 31) {
        CHECK(d.density[k] * g.centers[k] == doctest::Approx(1.0).epsilon(1e-5));
    }

    // mass of an edge-aligned window is log(b/a)/log(smax/smin) exactly
    const LogGrid wide = build_log_grid({0.002, 80.0}, 128);
    const TabulatedDensity dw = baseline_sampler(BaselineSampler::log_uniform(), wide);
    const double a = wide.edges[16], b = wide.edges[48];
    const double mass = dw.cdf[48] - dw.cdf[16];
    CHECK(mass == doctest::Approx(std::log(b / a) / std::log(80.0 / 0.002)).epsilon(1e-12));
}

TEST_CASE("log-normal baseline peaks at its mode") {
    const LogGrid g = build_log_grid({0.002, 80.0}, 256);
    const double mu = std::log(0.5), s = 0.6;
    const TabulatedDensity d = baseline_sampler(BaselineSampler::log_normal(mu, s), g);
    const std::size_t argmax = static_cast<std::size_t>(
        std::max_element(d.density.begin(), d.density.end()) - d.density.begin());
    const std::size_t mode_cell = locate_bin(g, std::exp(mu - s * s));
    CHECK(std::abs(static_cast<long>(argmax) - static_cast<long>(mode_cell)) <= 1);
    CHECK_THROWS_AS(BaselineSampler::log_normal(0.0, 0.0), ConfigError);
}

TEST_CASE("smooth_profile is a 3-point moving average") {
    const LogGrid g = build_log_grid({1.0, 16.0}, 5);
    const Profile smoothed = smooth_profile(Profile{g, {3.0, 0.0, 6.0, 0.0, 9.0}});
    CHECK(smoothed.values[0] == doctest::Approx(1.5));
    CHECK(smoothed.values[1] == doctest::Approx(3.0));
    CHECK(smoothed.values[2] == doctest::Approx(2.0));
    CHECK(smoothed.values[3] == doctest::Approx(5.0));
    CHECK(smoothed.values[4] == doctest::Approx(4.5));
}
