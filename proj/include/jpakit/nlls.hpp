#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace jpakit {

// Residual callback: fill r (length fixed at call time) from parameters p.
using ResidualFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct FitResult {
    std::vector<double> params;
    std::vector<double> sigmas;                    // per-parameter standard errors
    std::vector<std::vector<double>> covariance;   // scaled by RSS/(n-p)
    double residual_norm = 0.0;                    // sqrt(sum of squared residuals)
    double variance = 0.0;                         // RSS/(n-p), 0 when n <= p
    std::size_t iterations = 0;
};

// Levenberg-Marquardt with numerically differenced Jacobian.
// Throws ConvergenceError (with best-so-far parameters) when the iteration
// limit is hit before the gradient/step tests pass.
FitResult fit_least_squares(const ResidualFn& fn,
                            std::vector<double> p0,
                            std::size_t n_residuals,
                            std::size_t max_iter = 200,
                            double xtol = 1e-14,
                            double gtol = 1e-14,
                            double ftol = 0.0);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double sigma_slope = 0.0;
    double sigma_intercept = 0.0;
    double rss = 0.0;
};

// Ordinary least squares y = slope*x + intercept; sigmas from residual variance.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace jpakit
