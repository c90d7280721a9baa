#pragma once

#include <cstddef>
#include <vector>

namespace infonoise {

// Symmetric two-point data distribution with atoms at -a and +a. Everything
// about its Bayes denoising problem is available in closed form, which
// makes it the ground truth for the oracle and scheduler tests.
struct TwoPointModel {
    double a = 1.0;
};

// Physicists' Gauss-Hermite rule: integral of f(t) exp(-t^2) dt
// approximated by sum w_i f(t_i).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch on the Hermite Jacobi matrix; results are cached per order.
GaussHermite gauss_hermite(std::size_t order);

// Bayes denoiser a*tanh(a*x/sigma^2).
double toy_denoiser(const TwoPointModel& m, double x, double sigma);

// Posterior variance a^2*sech^2(a*x/sigma^2) = a^2 - denoiser^2.
double toy_posterior_var(const TwoPointModel& m, double x, double sigma);

// Score (a*tanh(a*x/sigma^2) - x)/sigma^2.
double toy_score(const TwoPointModel& m, double x, double sigma);

// mmse(sigma) = E_{x ~ p(.;sigma)}[a^2 sech^2(a x/sigma^2)] by Gauss-Hermite
// quadrature on one mixture component (the integrand is even under the
// joint sign flip, so one component carries the full expectation).
// quad_order must be >= 16.
double toy_mmse(const TwoPointModel& m, double sigma, std::size_t quad_order);

// sigma_c = a: boundary between the unimodal and bimodal regimes.
double critical_sigma(const TwoPointModel& m);

// d^2/dx^2 log p(0; sigma) = (a^2 - sigma^2)/sigma^4.
double hessian_at_zero(const TwoPointModel& m, double sigma);

// All solutions of x = a*tanh(a*x/sigma^2), sorted ascending: {0} for
// sigma >= a, {-x*, 0, +x*} for sigma < a with x* found by bisection.
std::vector<double> fixed_points(const TwoPointModel& m, double sigma, double tol);

}  // namespace infonoise
