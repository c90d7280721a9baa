#include "infonoise/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "infonoise/errors.hpp"

namespace infonoise {

double gate(double sigma, const GateParams& params) {
    if (!(sigma > 0.0)) {
        throw DomainError("gate requires sigma > 0, got " + std::to_string(sigma));
    }
    if (!(params.c > 0.0) || !(params.n >= 2.0)) {
        throw ConfigError("gate requires c > 0 and n >= 2");
    }
    // sigma^n/(sigma^n + c^n) = logistic(n*log(sigma/c))
    const double t = params.n * (std::log(sigma) - std::log(params.c));
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

Weighting Weighting::edm(double sigma_data) {
    if (!(sigma_data > 0.0)) {
        throw ConfigError("edm weighting requires sigma_data > 0");
    }
    return Weighting{Kind::edm, sigma_data};
}

double loss_weight(const Weighting& w, double sigma) {
    if (!(sigma > 0.0)) {
        throw DomainError("loss_weight requires sigma > 0, got " + std::to_string(sigma));
    }
    switch (w.kind) {
        case Weighting::Kind::unit:
            return 1.0;
        case Weighting::Kind::edm: {
            const double sd = w.sigma_data;
            if (!(sd > 0.0)) {
                throw ConfigError("edm weighting requires sigma_data > 0");
            }
            return (sigma * sigma + sd * sd) / ((sigma * sd) * (sigma * sd));
        }
    }
    throw ConfigError("unknown weighting kind");
}

PivotMethod PivotMethod::onset(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ConfigError("onset threshold must lie in (0, 1)");
    }
    PivotMethod m;
    m.kind = Kind::onset;
    m.p = p;
    return m;
}

PivotMethod PivotMethod::powerlaw(std::size_t window, double slope_tol) {
    if (window < 3 || !(slope_tol > 0.0)) {
        throw ConfigError("powerlaw pivot needs window >= 3 and slope_tol > 0");
    }
    PivotMethod m;
    m.kind = Kind::powerlaw;
    m.window = window;
    m.slope_tol = slope_tol;
    return m;
}

double calibrate_pivot_onset(const Profile& profile, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ConfigError("onset threshold must lie in (0, 1)");
    }
    const auto& v = profile.values;
    const std::size_t K = profile.grid.K;
    if (v.size() != K || K == 0) {
        throw ShapeError("profile/grid size mismatch in calibrate_pivot_onset");
    }
    const double peak = *std::max_element(v.begin(), v.end());
    if (!(peak > 0.0)) {
        throw DegenerateError("onset calibration on a profile without positive values");
    }
    // largest center below which everything above stays under p (scanning
    // from high to low noise); r >= p at the top cell means no suppression
    std::ptrdiff_t last_above = -1;
    for (std::size_t k = 0; k < K; ++k) {
        if (v[k] / peak >= p) {
            last_above = static_cast<std::ptrdiff_t>(k);
        }
    }
    if (last_above == static_cast<std::ptrdiff_t>(K) - 1) {
        return profile.grid.range.sigma_min;
    }
    return profile.grid.centers[static_cast<std::size_t>(last_above) + 1];
}

namespace {

// least-squares slope of y over x on [a, a+w)
double window_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t a,
                    std::size_t w) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = a; i < a + w; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(w);
    const double my = sy / static_cast<double>(w);
    double num = 0.0, den = 0.0;
    for (std::size_t i = a; i < a + w; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

}  // namespace

double calibrate_pivot_powerlaw(const Profile& profile, std::size_t window, double slope_tol) {
    if (window < 3 || !(slope_tol > 0.0)) {
        throw ConfigError("powerlaw pivot needs window >= 3 and slope_tol > 0");
    }
    const std::size_t K = profile.grid.K;
    if (profile.values.size() != K) {
        throw ShapeError("profile/grid size mismatch in calibrate_pivot_powerlaw");
    }
    if (K < window) {
        throw ConfigError("powerlaw window exceeds grid size");
    }
    std::vector<double> t(K), y(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double v = profile.values[k];
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DegenerateError("powerlaw calibration needs strictly positive profile values");
        }
        t[k] = std::log(profile.grid.centers[k]);
        y[k] = std::log(v);
    }
    // per-cell slope from the window of `window` cells around cell k
    const std::size_t half = window / 2;
    std::vector<double> slope(K);
    for (std::size_t k = 0; k < K; ++k) {
        std::size_t a = (k > half) ? k - half : 0;
        a = std::min(a, K - window);
        slope[k] = window_slope(t, y, a, window);
    }
    // grow the segment adjacent to sigma_min while all member slopes stay
    // within slope_tol of the segment mean
    std::size_t len = 1;
    double sum = slope[0];
    while (len < K) {
        const double cand_sum = sum + slope[len];
        const double cand_mean = cand_sum / static_cast<double>(len + 1);
        bool ok = true;
        for (std::size_t i = 0; i <= len; ++i) {
            if (std::abs(slope[i] - cand_mean) > slope_tol) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            break;
        }
        sum = cand_sum;
        ++len;
    }
    if (len >= window) {
        return profile.grid.edges[len];  // upper boundary of the last conforming cell
    }
    // knee fallback: strongest log-log curvature
    std::size_t knee = 1;
    double best = -1.0;
    for (std::size_t k = 1; k + 1 < K; ++k) {
        const double curv = std::abs(y[k + 1] - 2.0 * y[k] + y[k - 1]);
        if (curv > best) {
            best = curv;
            knee = k;
        }
    }
    return profile.grid.centers[knee];
}

double calibrate_pivot(const Profile& profile, const PivotMethod& method) {
    switch (method.kind) {
        case PivotMethod::Kind::onset:
            return calibrate_pivot_onset(profile, method.p);
        case PivotMethod::Kind::powerlaw:
            return calibrate_pivot_powerlaw(profile, method.window, method.slope_tol);
    }
    throw ConfigError("unknown pivot method");
}

Profile apply_gate(const Profile& profile, const GateParams& params) {
    Profile out = profile;
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        out.values[k] = profile.values[k] * gate(profile.grid.centers[k], params);
    }
    return out;
}

Profile smooth_profile(const Profile& profile) {
    Profile out = profile;
    const std::size_t K = profile.values.size();
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t lo = (k > 0) ? k - 1 : 0;
        const std::size_t hi = (k + 1 < K) ? k + 1 : K - 1;
        double acc = 0.0;
        for (std::size_t i = lo; i <= hi; ++i) {
            acc += profile.values[i];
        }
        out.values[k] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

Allocation build_allocation(const Profile& gated) {
    return Allocation{normalize_to_density(gated)};
}

namespace {

template <typename WeightFn>
TabulatedDensity schedule_impl(const Allocation& alloc, WeightFn&& weight) {
    const auto& grid = alloc.rho.grid;
    Profile q;
    q.grid = grid;
    q.values.resize(grid.K);
    for (std::size_t k = 0; k < grid.K; ++k) {
        const double wk = weight(grid.centers[k]);
        if (!(wk > 0.0) || !std::isfinite(wk)) {
            throw ConfigError("loss weight must be positive and finite at every grid center");
        }
        q.values[k] = alloc.rho.density[k] / wk;
    }
    return normalize_to_density(q);
}

}  // namespace

TabulatedDensity schedule_from_allocation(const Allocation& alloc, const Weighting& w) {
    return schedule_impl(alloc, [&](double sigma) { return loss_weight(w, sigma); });
}

TabulatedDensity schedule_from_weight_fn(const Allocation& alloc, double (*w)(double)) {
    return schedule_impl(alloc, w);
}

Profile effective_emphasis(const TabulatedDensity& pi, const Weighting& w) {
    Profile out;
    out.grid = pi.grid;
    out.values.resize(pi.grid.K);
    for (std::size_t k = 0; k < pi.grid.K; ++k) {
        out.values[k] = pi.density[k] * loss_weight(w, pi.grid.centers[k]);
    }
    return out;
}

BaselineSampler BaselineSampler::log_uniform() {
    return BaselineSampler{Kind::log_uniform, 0.0, 1.0};
}

BaselineSampler BaselineSampler::log_normal(double mu, double s) {
    if (!(s > 0.0)) {
        throw ConfigError("log_normal baseline requires s > 0");
    }
    return BaselineSampler{Kind::log_normal, mu, s};
}

TabulatedDensity baseline_sampler(const BaselineSampler& kind, const LogGrid& grid) {
    Profile shape;
    shape.grid = grid;
    shape.values.resize(grid.K);
    switch (kind.kind) {
        case BaselineSampler::Kind::log_uniform:
            for (std::size_t k = 0; k < grid.K; ++k) {
                shape.values[k] = 1.0 / grid.centers[k];
            }
            break;
        case BaselineSampler::Kind::log_normal: {
            if (!(kind.s > 0.0)) {
                throw ConfigError("log_normal baseline requires s > 0");
            }
            for (std::size_t k = 0; k < grid.K; ++k) {
                const double z = (std::log(grid.centers[k]) - kind.mu) / kind.s;
                shape.values[k] = std::exp(-0.5 * z * z) / grid.centers[k];
            }
            break;
        }
    }
    return normalize_to_density(shape);
}

}  // namespace infonoise
