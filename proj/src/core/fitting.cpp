#include "fitting.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_matrix.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace phonring {

namespace {

struct LorentzianData {
    std::span<const double> omega;
    std::span<const double> values;
};

int lorentzian_f(const gsl_vector* p, void* raw, gsl_vector* f) {
    const auto& d = *static_cast<LorentzianData*>(raw);
    const double amp = gsl_vector_get(p, 0);
    const double center = gsl_vector_get(p, 1);
    const double width = gsl_vector_get(p, 2);
    for (std::size_t i = 0; i < d.omega.size(); ++i) {
        const double dw = d.omega[i] - center;
        const double den = dw * dw + 0.25 * width * width;
        gsl_vector_set(f, i, amp / den - d.values[i]);
    }
    return GSL_SUCCESS;
}

int lorentzian_df(const gsl_vector* p, void* raw, gsl_matrix* jac) {
    const auto& d = *static_cast<LorentzianData*>(raw);
    const double amp = gsl_vector_get(p, 0);
    const double center = gsl_vector_get(p, 1);
    const double width = gsl_vector_get(p, 2);
    for (std::size_t i = 0; i < d.omega.size(); ++i) {
        const double dw = d.omega[i] - center;
        const double den = dw * dw + 0.25 * width * width;
        gsl_matrix_set(jac, i, 0, 1.0 / den);
        gsl_matrix_set(jac, i, 1, amp * 2.0 * dw / (den * den));
        gsl_matrix_set(jac, i, 2, -amp * 0.5 * width / (den * den));
    }
    return GSL_SUCCESS;
}

struct SaturatingData {
    std::span<const double> x;
    std::span<const double> y;
    std::span<const double> sigma;
};

int saturating_f(const gsl_vector* p, void* raw, gsl_vector* f) {
    const auto& d = *static_cast<SaturatingData*>(raw);
    const double a = gsl_vector_get(p, 0);
    const double b = gsl_vector_get(p, 1);
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        const double model = 1.0 - a * d.x[i] / (1.0 + b * d.x[i]);
        gsl_vector_set(f, i, (model - d.y[i]) / d.sigma[i]);
    }
    return GSL_SUCCESS;
}

int saturating_df(const gsl_vector* p, void* raw, gsl_matrix* jac) {
    const auto& d = *static_cast<SaturatingData*>(raw);
    const double a = gsl_vector_get(p, 0);
    const double b = gsl_vector_get(p, 1);
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        const double u = 1.0 + b * d.x[i];
        gsl_matrix_set(jac, i, 0, -d.x[i] / u / d.sigma[i]);
        gsl_matrix_set(jac, i, 1, a * d.x[i] * d.x[i] / (u * u) / d.sigma[i]);
    }
    return GSL_SUCCESS;
}

struct WorkspaceDeleter {
    void operator()(gsl_multifit_nlinear_workspace* w) const {
        gsl_multifit_nlinear_free(w);
    }
};
using Workspace =
    std::unique_ptr<gsl_multifit_nlinear_workspace, WorkspaceDeleter>;

struct DriveResult {
    int status = 0;
    int info = 0;
};

// Runs trust-region Levenberg-Marquardt until the step or gradient stalls.
DriveResult drive(gsl_multifit_nlinear_workspace* w) {
    DriveResult r;
    r.status = gsl_multifit_nlinear_driver(200, 1e-12, 1e-12, 0.0, nullptr,
                                           nullptr, &r.info, w);
    return r;
}

// A seed already sitting on the minimum leaves the driver no acceptable first
// step; it then reports max-iterations with the no-progress code in info. That
// is a numerical stationary point, so it counts as converged. Running out of
// iterations mid-descent stays a failure.
bool drive_converged(const DriveResult& r) {
    return r.status == GSL_SUCCESS ||
           (r.status == GSL_EMAXITER && r.info == GSL_ENOPROG);
}

}  // namespace

LorentzianFit fit_lorentzian(std::span<const double> omega,
                             std::span<const double> values) {
    gsl_set_error_handler_off();
    const std::size_t n = omega.size();
    if (n != values.size()) throw ParameterError("omega/value length mismatch");
    if (n < 4) throw FitError("need at least 4 points for a lorentzian fit");

    const auto peak = std::max_element(values.begin(), values.end());
    const std::size_t p = static_cast<std::size_t>(peak - values.begin());
    const double y_max = *peak;
    if (!(y_max > 0.0)) throw FitError("response magnitude has no peak");

    // Width seed from the half-maximum crossings, linearly interpolated; fall
    // back to the grid edge when a side never drops below half maximum.
    const double half = 0.5 * y_max;
    double left = omega.front();
    for (std::size_t i = p; i-- > 0;) {
        if (values[i] < half) {
            const double t = (half - values[i]) / (values[i + 1] - values[i]);
            left = omega[i] + t * (omega[i + 1] - omega[i]);
            break;
        }
    }
    double right = omega.back();
    for (std::size_t i = p + 1; i < n; ++i) {
        if (values[i] < half) {
            const double t = (half - values[i - 1]) / (values[i] - values[i - 1]);
            right = omega[i - 1] + t * (omega[i] - omega[i - 1]);
            break;
        }
    }
    double width0 = right - left;
    if (!(width0 > 0.0)) width0 = 0.25 * (omega.back() - omega.front());
    if (!(width0 > 0.0)) throw FitError("degenerate frequency grid");

    LorentzianData data{omega, values};
    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = lorentzian_f;
    fdf.df = lorentzian_df;
    fdf.n = n;
    fdf.p = 3;
    fdf.params = &data;

    gsl_multifit_nlinear_parameters params =
        gsl_multifit_nlinear_default_parameters();
    Workspace w(gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params,
                                           n, 3));
    if (!w) throw FitError("fit workspace allocation failed");

    double init[3] = {y_max * 0.25 * width0 * width0, omega[p], width0};
    gsl_vector_view init_view = gsl_vector_view_array(init, 3);
    if (gsl_multifit_nlinear_init(&init_view.vector, &fdf, w.get()) != GSL_SUCCESS)
        throw FitError("fit initialization failed");

    const DriveResult status = drive(w.get());

    LorentzianFit out;
    out.amplitude = gsl_vector_get(w->x, 0);
    out.center = gsl_vector_get(w->x, 1);
    out.fwhm = std::abs(gsl_vector_get(w->x, 2));
    out.converged = drive_converged(status);

    double chi2 = 0.0;
    gsl_blas_ddot(w->f, w->f, &chi2);
    out.residual = std::sqrt(chi2 / static_cast<double>(n)) / y_max;
    return out;
}

SaturatingFit fit_saturating(std::span<const double> x, std::span<const double> y,
                             std::span<const double> sigma, double rho_gamma_hint) {
    gsl_set_error_handler_off();
    const std::size_t n = x.size();
    if (y.size() != n || sigma.size() != n)
        throw ParameterError("x/y/sigma length mismatch");
    if (n < 4) throw FitError("need at least 4 points for a saturating fit");
    for (double s : sigma)
        if (!(s > 0.0)) throw ParameterError("sigma entries must be > 0");

    SaturatingFit out;
    const auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
    if (*y_max - *y_min < 1e-12) {
        out.degenerate = true;
        return out;
    }

    double a0 = 0.5, b0 = 1.0;
    if (rho_gamma_hint > 0.0) {
        b0 = std::numbers::pi * rho_gamma_hint;
    } else {
        // Seed the slope from the first nonzero x and the plateau from the last.
        std::size_t first = n;
        for (std::size_t i = 0; i < n; ++i)
            if (x[i] > 0.0) {
                first = i;
                break;
            }
        if (first < n) {
            const double slope = (1.0 - y[first]) / x[first];
            if (slope > 0.0) a0 = slope;
            const double drop = 1.0 - y[n - 1];
            if (drop > 1e-9 && a0 > drop / x[n - 1])
                b0 = std::max(1e-9, a0 / drop - 1.0 / x[n - 1]);
        }
    }

    SaturatingData data{x, y, sigma};
    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = saturating_f;
    fdf.df = saturating_df;
    fdf.n = n;
    fdf.p = 2;
    fdf.params = &data;

    gsl_multifit_nlinear_parameters params =
        gsl_multifit_nlinear_default_parameters();
    Workspace w(gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params,
                                           n, 2));
    if (!w) throw FitError("fit workspace allocation failed");

    double init[2] = {a0, b0};
    gsl_vector_view init_view = gsl_vector_view_array(init, 2);
    if (gsl_multifit_nlinear_init(&init_view.vector, &fdf, w.get()) != GSL_SUCCESS)
        throw FitError("fit initialization failed");

    const DriveResult status = drive(w.get());
    out.a = gsl_vector_get(w->x, 0);
    out.b = gsl_vector_get(w->x, 1);
    out.converged = drive_converged(status);
    gsl_blas_ddot(w->f, w->f, &out.chi2);

    gsl_matrix* jac = gsl_multifit_nlinear_jac(w.get());
    gsl_matrix* covar = gsl_matrix_alloc(2, 2);
    if (covar) {
        if (gsl_multifit_nlinear_covar(jac, 0.0, covar) == GSL_SUCCESS) {
            out.a_err = std::sqrt(std::max(0.0, gsl_matrix_get(covar, 0, 0)));
            out.b_err = std::sqrt(std::max(0.0, gsl_matrix_get(covar, 1, 1)));
        }
        gsl_matrix_free(covar);
    }
    return out;
}

}  // namespace phonring
