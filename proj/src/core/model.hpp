#pragma once

#include <Eigen/Dense>

#include "types.hpp"

namespace phonring {

// Finite-width phase-matching function f(q) = w / (w + i*(q - q_center)) with
// total width w = phonon_half_width + optical_spatial_width. |f| <= 1 and
// f = 1 exactly on center.
Complex phase_match(double q, const OptoParams& opto);

// Simplified |q f(q)|^2 profile: a Lorentzian of the given half-width about
// q_center with maximum q_center^2.
double lorentzian_weight(double q, double q_center, double half_width);

// Coupling (angular) speed from material constants, hbar = 1:
// c_cl = (omega_k / 8 pi) * x_zpf * photoelastic_ratio * alpha.
double coupling_from_material(const MaterialConstants& m);

// Per-mode coupling amplitude feeding the optical mixing matrix. Under the
// exact model this is c_cl * q * f(q); under the Lorentzian idealization the
// mode weight q f(q) is replaced by q_center * f_L(q) with f_L of half-width
// gamma/(2v), so |amplitude|^2 matches lorentzian_weight.
Eigen::VectorXcd coupling_amplitudes(const ModeGrid& grid, const OptoParams& opto,
                                     PhaseMatchModel pm);

// Denominator of the eliminated optical mode, (-detuning - omega) - i*kappa/2.
Complex optical_denominator(const OptoParams& opto, double omega);

// Diagonal of the bare phonon inverse susceptibility:
// D_qq = Omega_q - omega - i*gamma/2.
Eigen::VectorXcd bare_inverse_susceptibility(const ModeGrid& grid,
                                             const PhononDamping& damping,
                                             double omega);

// Optical mixing matrix M_{qq'} = amp(q) * conj(amp(q')) / optical_denominator.
// Rank <= 1 by construction.
Eigen::MatrixXcd optical_mix_matrix(const ModeGrid& grid, const OptoParams& opto,
                                    double omega,
                                    PhaseMatchModel pm = PhaseMatchModel::Exact);

}  // namespace phonring
