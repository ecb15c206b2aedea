#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "errors.hpp"

namespace phonring {

using Complex = std::complex<double>;

// Uniform set of ring phonon modes, symmetric about q = 0 and excluding q = 0.
// The positive branch holds n_pairs modes at q_offset + j*dq (j = 0..n_pairs-1);
// the negative branch is its mirror image. Frequencies follow the linear
// acoustic dispersion Omega_q = |q| * v, so counter-propagating partners are
// degenerate.
struct ModeGrid {
    std::vector<double> wavevectors;  // ascending, negative branch then positive
    std::vector<double> frequencies;  // |q| * sound_speed
    double sound_speed = 0.0;
    double mode_spacing = 0.0;
    double q_offset = 0.0;
    int n_pairs = 0;

    int size() const { return static_cast<int>(wavevectors.size()); }

    // Modes per unit frequency on one branch.
    double density_of_states() const { return 1.0 / (sound_speed * mode_spacing); }

    // Index of the grid mode closest to q (ties resolve to the lower index).
    int closest_index(double q) const;

    // Index of the counter-propagating partner (-q) of mode i.
    int mirror_index(int i) const { return size() - 1 - i; }
};

ModeGrid build_mode_grid(int n_pairs, double mode_spacing, double sound_speed,
                         double q_offset);

// Which coupling profile feeds the optical mixing matrix: the exact
// finite-width phase-matching function, or its Lorentzian idealization of
// half-width gamma/(2v) centered at q_center with peak weight q_center^2.
enum class PhaseMatchModel { Exact, Lorentzian };

// Pump/probe optical parameters in the pump-enhanced frame.
struct OptoParams {
    double detuning = 0.0;               // Delta, negative for red detuning
    double kappa = 0.0;                  // optical linewidth, > 0
    double coupling_speed = 0.0;         // c_cl, >= 0
    double q_center = 0.0;               // phase-match center Delta k
    double optical_spatial_width = 0.0;  // kappa / c contribution to the width
    double phonon_half_width = 0.0;      // gamma / (2 v) contribution

    bool sideband_resolved() const { return kappa < std::abs(detuning); }
    void validate() const;
};

// Material-level constants that determine the coupling speed.
struct MaterialConstants {
    double photon_frequency = 0.0;    // omega_k
    double zero_point_scale = 0.0;    // x_zpf (opaque input constant)
    double photoelastic_ratio = 0.0;  // (d eps / d s) / eps_0
    double pump_amplitude = 0.0;      // alpha >= 0, real by gauge choice
};

// Per-mode intrinsic damping, taken q-independent.
struct PhononDamping {
    double gamma = 0.0;

    void validate() const {
        if (!(gamma > 0.0)) throw ParameterError("phonon damping gamma must be > 0");
    }
};

}  // namespace phonring
