#pragma once

#include <Eigen/Dense>

#include "model.hpp"
#include "types.hpp"

namespace phonring {

// Closed-form inverse of diag(bare_diag) - amp * amp^dagger / denominator,
// using the rank-1 structure instead of a matrix factorization.
Eigen::MatrixXcd resummed_optical_response(const Eigen::VectorXcd& bare_diag,
                                           const Eigen::VectorXcd& amplitudes,
                                           Complex denominator);

// Squared norm of the pump-weighted mode vector, and its continuum value for
// the Lorentzian profile: c^2 qc^2 rho pi gamma / 2.
double pump_norm2(const Eigen::VectorXcd& amplitudes);
double pump_norm2_continuum(double rho, double coupling_speed, double q_center,
                            double gamma);

// Contractions of the bare propagator against the normalized pump vector:
// sum_k |amp_k|^2 / D_k^p / N^2 for p = 1, 2. The first is purely imaginary at
// resonance and encodes pump-induced broadening; the second drives the
// back-scattering correction.
Complex weighted_susceptibility(const Eigen::VectorXcd& bare_diag,
                                const Eigen::VectorXcd& amplitudes);
Complex weighted_susceptibility_sq(const Eigen::VectorXcd& bare_diag,
                                   const Eigen::VectorXcd& amplitudes);

// Continuum closed forms of the same contractions when |q f(q)|^2 is a
// Lorentzian of half-width gamma/2 in frequency about omega_center.
Complex weighted_susceptibility_lorentzian(double omega, double omega_center,
                                           double gamma);
Complex weighted_susceptibility_sq_lorentzian(double omega, double omega_center,
                                              double gamma);

// Pump-broadened optical linewidth kappa - 2i N^2 g; real and > kappa near
// resonance.
Complex kappa_effective(double kappa, double norm2, Complex weighted_susc);

// Continuum value at the phase-matched center, kappa + pi rho c^2 qc^2.
double kappa_effective_center(double kappa, double rho, double coupling_speed,
                              double q_center);

// Prefactor of the rank-1 term in the resummed response,
// 1 / (denominator / N^2 - g); upper-half-plane near resonance.
Complex optical_prefactor(double norm2, Complex optical_den, Complex weighted_susc);

// Disorder self-energy: exact grid sum strength^2 * sum_k 1/D_kk, and its
// continuum limit 2 pi i rho strength^2 (both branches contribute).
Complex sigma_disorder(const Eigen::VectorXcd& bare_diag, double strength);
Complex sigma_disorder_continuum(double rho, double strength);

// Pump correction to the disorder self-energy at the band center,
// prefactor * strength^2 * <phi|D^-2|phi>; its positive imaginary part cancels
// part of sigma_disorder.
Complex sigma_pump(Complex prefactor, double strength, Complex weighted_susc_sq);

// Predicted normalized diffusion of the backward center mode versus rescaled
// pump power x = c^2 qc^2 / (gamma kappa): 1 - (x/2) / (1 + x pi rho gamma),
// saturating at 1 - 1/(2 pi rho gamma).
double diffusion_ratio(double x, double rho_gamma);
double diffusion_ratio_limit(double rho_gamma);

}  // namespace phonring
