#pragma once

#include <span>

#include "types.hpp"

namespace phonring {

// Least-squares fit of a response magnitude to A / ((omega - center)^2 + fwhm^2/4).
struct LorentzianFit {
    double amplitude = 0.0;
    double center = 0.0;
    double fwhm = 0.0;      // full width at half maximum
    double residual = 0.0;  // rms residual relative to the peak value
    bool converged = false;
};

LorentzianFit fit_lorentzian(std::span<const double> omega,
                             std::span<const double> values);

// Weighted fit of y(x) = 1 - a*x / (1 + b*x).
struct SaturatingFit {
    double a = 0.0;
    double b = 0.0;
    double a_err = 0.0;
    double b_err = 0.0;
    double chi2 = 0.0;
    bool degenerate = false;  // data carries no usable variation
    bool converged = false;
};

// rho_gamma_hint > 0 seeds (a, b) = (1/2, pi * hint); otherwise the seed comes
// from a two-point slope/plateau estimate.
SaturatingFit fit_saturating(std::span<const double> x, std::span<const double> y,
                             std::span<const double> sigma,
                             double rho_gamma_hint = 0.0);

}  // namespace phonring
