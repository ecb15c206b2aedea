#include "model.hpp"

#include <algorithm>
#include <numbers>

namespace phonring {

int ModeGrid::closest_index(double q) const {
    int best = 0;
    double best_dist = std::abs(wavevectors[0] - q);
    for (int i = 1; i < size(); ++i) {
        const double d = std::abs(wavevectors[i] - q);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

ModeGrid build_mode_grid(int n_pairs, double mode_spacing, double sound_speed,
                         double q_offset) {
    if (n_pairs < 1) throw ParameterError("mode grid needs at least one pair");
    if (!(mode_spacing > 0.0)) throw ParameterError("mode spacing must be > 0");
    if (!(sound_speed > 0.0)) throw ParameterError("sound speed must be > 0");
    if (!(q_offset > 0.0)) throw ParameterError("q offset must be > 0 (grid excludes q = 0)");

    ModeGrid grid;
    grid.sound_speed = sound_speed;
    grid.mode_spacing = mode_spacing;
    grid.q_offset = q_offset;
    grid.n_pairs = n_pairs;
    grid.wavevectors.resize(2 * n_pairs);
    grid.frequencies.resize(2 * n_pairs);
    for (int j = 0; j < n_pairs; ++j) {
        const double q = q_offset + j * mode_spacing;
        grid.wavevectors[n_pairs + j] = q;
        grid.wavevectors[n_pairs - 1 - j] = -q;
    }
    for (int i = 0; i < grid.size(); ++i)
        grid.frequencies[i] = std::abs(grid.wavevectors[i]) * sound_speed;
    return grid;
}

void OptoParams::validate() const {
    if (!(kappa > 0.0)) throw ParameterError("optical linewidth kappa must be > 0");
    if (coupling_speed < 0.0) throw ParameterError("coupling speed must be >= 0");
    if (optical_spatial_width < 0.0 || phonon_half_width < 0.0)
        throw ParameterError("phase-match widths must be >= 0");
}

Complex phase_match(double q, const OptoParams& opto) {
    const double w = opto.phonon_half_width + opto.optical_spatial_width;
    if (!(w > 0.0)) throw ParameterError("phase-match width is degenerate (w = 0)");
    return w / Complex(w, q - opto.q_center);
}

double lorentzian_weight(double q, double q_center, double half_width) {
    if (!(half_width > 0.0)) throw ParameterError("lorentzian half-width must be > 0");
    const double dq = q - q_center;
    return q_center * q_center * half_width * half_width /
           (half_width * half_width + dq * dq);
}

double coupling_from_material(const MaterialConstants& m) {
    if (m.pump_amplitude < 0.0) throw ParameterError("pump amplitude must be >= 0");
    return m.photon_frequency / (8.0 * std::numbers::pi) * m.zero_point_scale *
           m.photoelastic_ratio * m.pump_amplitude;
}

Eigen::VectorXcd coupling_amplitudes(const ModeGrid& grid, const OptoParams& opto,
                                     PhaseMatchModel pm) {
    Eigen::VectorXcd amp(grid.size());
    if (pm == PhaseMatchModel::Exact) {
        for (int i = 0; i < grid.size(); ++i) {
            const double q = grid.wavevectors[i];
            amp(i) = opto.coupling_speed * q * phase_match(q, opto);
        }
    } else {
        // Half-width gamma/(2v) only; the optical contribution is dropped so
        // |amp|^2 is exactly the idealized Lorentzian profile.
        const double w = opto.phonon_half_width;
        if (!(w > 0.0)) throw ParameterError("phase-match width is degenerate (w = 0)");
        for (int i = 0; i < grid.size(); ++i) {
            const double dq = grid.wavevectors[i] - opto.q_center;
            amp(i) = opto.coupling_speed * opto.q_center * (w / Complex(w, dq));
        }
    }
    return amp;
}

Complex optical_denominator(const OptoParams& opto, double omega) {
    return Complex(-opto.detuning - omega, -opto.kappa / 2.0);
}

Eigen::VectorXcd bare_inverse_susceptibility(const ModeGrid& grid,
                                             const PhononDamping& damping,
                                             double omega) {
    damping.validate();
    Eigen::VectorXcd d(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        d(i) = Complex(grid.frequencies[i] - omega, -damping.gamma / 2.0);
    return d;
}

Eigen::MatrixXcd optical_mix_matrix(const ModeGrid& grid, const OptoParams& opto,
                                    double omega, PhaseMatchModel pm) {
    opto.validate();
    const Eigen::VectorXcd amp = coupling_amplitudes(grid, opto, pm);
    const Complex denom = optical_denominator(opto, omega);
    return (amp * amp.adjoint()) / denom;
}

}  // namespace phonring
