#include "infonoise/toy.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include "infonoise/errors.hpp"

namespace infonoise {

namespace {

void check_model(const TwoPointModel& m, double sigma) {
    if (!(m.a > 0.0)) {
        throw ConfigError("two-point model requires a > 0");
    }
    if (!(sigma > 0.0)) {
        throw DomainError("two-point model requires sigma > 0, got " + std::to_string(sigma));
    }
}

double sech2(double z) {
    // cosh overflows past ~710; the result underflows to 0 well before that
    if (std::abs(z) > 350.0) {
        return 0.0;
    }
    const double c = std::cosh(z);
    return 1.0 / (c * c);
}

}  // namespace

GaussHermite gauss_hermite(std::size_t order) {
    if (order < 1) {
        throw ConfigError("gauss_hermite order must be >= 1");
    }
    static std::mutex mu;
    static std::map<std::size_t, GaussHermite> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(order);
        if (it != cache.end()) {
            return it->second;
        }
    }
    const auto n = static_cast<Eigen::Index>(order);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        const double b = std::sqrt(0.5 * static_cast<double>(k));
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success) {
        throw DegenerateError("gauss_hermite eigensolve failed");
    }
    GaussHermite gh;
    gh.nodes.resize(order);
    gh.weights.resize(order);
    const double sqrt_pi = std::sqrt(M_PI);
    for (Eigen::Index i = 0; i < n; ++i) {
        gh.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        gh.weights[static_cast<std::size_t>(i)] = sqrt_pi * v0 * v0;
    }
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(order, gh);
    return gh;
}

double toy_denoiser(const TwoPointModel& m, double x, double sigma) {
    check_model(m, sigma);
    return m.a * std::tanh(m.a * x / (sigma * sigma));
}

double toy_posterior_var(const TwoPointModel& m, double x, double sigma) {
    check_model(m, sigma);
    return m.a * m.a * sech2(m.a * x / (sigma * sigma));
}

double toy_score(const TwoPointModel& m, double x, double sigma) {
    check_model(m, sigma);
    return (m.a * std::tanh(m.a * x / (sigma * sigma)) - x) / (sigma * sigma);
}

double toy_mmse(const TwoPointModel& m, double sigma, std::size_t quad_order) {
    check_model(m, sigma);
    if (quad_order < 16) {
        throw ConfigError("toy_mmse needs quad_order >= 16");
    }
    const auto gh = gauss_hermite(quad_order);
    // x = a + sqrt(2)*sigma*t maps the +a component onto the GH measure
    const double scale = std::sqrt(2.0) * sigma;
    double acc = 0.0;
    for (std::size_t i = 0; i < quad_order; ++i) {
        const double x = m.a + scale * gh.nodes[i];
        acc += gh.weights[i] * m.a * m.a * sech2(m.a * x / (sigma * sigma));
    }
    return acc / std::sqrt(M_PI);
}

double critical_sigma(const TwoPointModel& m) {
    if (!(m.a > 0.0)) {
        throw ConfigError("two-point model requires a > 0");
    }
    return m.a;
}

double hessian_at_zero(const TwoPointModel& m, double sigma) {
    check_model(m, sigma);
    const double s2 = sigma * sigma;
    return (m.a * m.a - s2) / (s2 * s2);
}

std::vector<double> fixed_points(const TwoPointModel& m, double sigma, double tol) {
    check_model(m, sigma);
    if (!(tol > 0.0)) {
        throw ConfigError("fixed_points needs tol > 0");
    }
    if (sigma >= m.a) {
        return {0.0};
    }
    // the positive root lives in (0, a): f(x) = a*tanh(a*x/sigma^2) - x has
    // slope a^2/sigma^2 > 1 at the origin and f(a) < 0
    const auto f = [&](double x) { return m.a * std::tanh(m.a * x / (sigma * sigma)) - x; };
    double lo = std::min(tol, 0.5 * m.a);
    while (f(lo) <= 0.0 && lo > 1e-300) {
        lo *= 1e-3;  // root closer to zero than tol; tighten the bracket
    }
    double hi = m.a;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    return {-root, 0.0, root};
}

}  // namespace infonoise
