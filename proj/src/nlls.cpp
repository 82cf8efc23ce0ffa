#include "jpakit/nlls.hpp"
#include "jpakit/errors.hpp"

#include <cmath>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_vector.h>

namespace jpakit {

namespace {

struct CallbackCtx {
    const ResidualFn* fn;
    std::vector<double> p_buf;
    std::vector<double> r_buf;
};

int gsl_residual_adapter(const gsl_vector* x, void* params, gsl_vector* f) {
    auto* ctx = static_cast<CallbackCtx*>(params);
    for (std::size_t i = 0; i < ctx->p_buf.size(); ++i)
        ctx->p_buf[i] = gsl_vector_get(x, i);
    (*ctx->fn)(ctx->p_buf, ctx->r_buf);
    for (std::size_t i = 0; i < ctx->r_buf.size(); ++i) {
        double v = ctx->r_buf[i];
        if (!std::isfinite(v)) return GSL_EDOM;
        gsl_vector_set(f, i, v);
    }
    return GSL_SUCCESS;
}

} // namespace

FitResult fit_least_squares(const ResidualFn& fn,
                            std::vector<double> p0,
                            std::size_t n_residuals,
                            std::size_t max_iter,
                            double xtol,
                            double gtol,
                            double ftol) {
    const std::size_t p = p0.size();
    const std::size_t n = n_residuals;
    if (p == 0 || n == 0)
        throw ValidationError("least-squares fit requires at least one parameter and one residual");
    if (n < p)
        throw ValidationError("least-squares fit is underdetermined: " +
                              std::to_string(n) + " residuals for " +
                              std::to_string(p) + " parameters");

    gsl_set_error_handler_off();
    CallbackCtx ctx{&fn, std::vector<double>(p), std::vector<double>(n)};

    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = &gsl_residual_adapter;
    fdf.df = nullptr;   // forward-difference Jacobian
    fdf.fvv = nullptr;
    fdf.n = n;
    fdf.p = p;
    fdf.params = &ctx;

    gsl_multifit_nlinear_parameters fdf_params = gsl_multifit_nlinear_default_parameters();
    const gsl_multifit_nlinear_type* T = gsl_multifit_nlinear_trust;
    gsl_multifit_nlinear_workspace* w = gsl_multifit_nlinear_alloc(T, &fdf_params, n, p);
    if (!w) throw Error(Error::Category::numerical, "failed to allocate fit workspace");

    gsl_vector_view x0 = gsl_vector_view_array(p0.data(), p);
    gsl_multifit_nlinear_init(&x0.vector, &fdf, w);

    int info = 0;
    int status = gsl_multifit_nlinear_driver(max_iter, xtol, gtol, ftol,
                                             nullptr, nullptr, &info, w);

    FitResult out;
    out.params.resize(p);
    out.sigmas.assign(p, 0.0);
    out.iterations = gsl_multifit_nlinear_niter(w);
    for (std::size_t i = 0; i < p; ++i)
        out.params[i] = gsl_vector_get(w->x, i);

    double chisq = 0.0;
    gsl_vector* r = gsl_multifit_nlinear_residual(w);
    for (std::size_t i = 0; i < n; ++i) {
        double ri = gsl_vector_get(r, i);
        chisq += ri * ri;
    }
    out.residual_norm = std::sqrt(chisq);
    out.variance = (n > p) ? chisq / static_cast<double>(n - p) : 0.0;

    // A residual that is already at floating-point floor cannot trigger the
    // step-size tests when a parameter has no effect on the model, so treat a
    // numerically perfect fit as converged regardless of iteration count.
    const bool perfect_fit =
        out.residual_norm <= 1e-8 * std::sqrt(static_cast<double>(n));
    if (!perfect_fit &&
        (status == GSL_EMAXITER || (status != GSL_SUCCESS && status != GSL_ENOPROG))) {
        std::vector<double> best = out.params;
        gsl_multifit_nlinear_free(w);
        throw ConvergenceError("fit did not converge within " + std::to_string(max_iter) +
                               " iterations (residual norm " + std::to_string(out.residual_norm) + ")",
                               std::move(best));
    }

    gsl_matrix* covar = gsl_matrix_alloc(p, p);
    gsl_matrix* J = gsl_multifit_nlinear_jac(w);
    gsl_multifit_nlinear_covar(J, 0.0, covar);
    out.covariance.assign(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j)
            out.covariance[i][j] = gsl_matrix_get(covar, i, j) * out.variance;
        double v = out.covariance[i][i];
        out.sigmas[i] = v > 0.0 ? std::sqrt(v) : 0.0;
    }
    gsl_matrix_free(covar);
    gsl_multifit_nlinear_free(w);
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size())
        throw ValidationError("line fit: x and y lengths differ");
    if (n < 2)
        throw ValidationError("line fit requires at least 2 points");

    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if (sxx <= 0.0)
        throw UnidentifiableError("line fit: all abscissae identical");

    LineFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (out.slope * x[i] + out.intercept);
        rss += r * r;
    }
    out.rss = rss;
    if (n > 2) {
        const double s2 = rss / static_cast<double>(n - 2);
        out.sigma_slope = std::sqrt(s2 / sxx);
        out.sigma_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return out;
}

} // namespace jpakit
