#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "types.hpp"

namespace phonring {

struct DisorderConfig {
    // RMS of the momentum-space Fourier components; the ensemble covariance of
    // off-diagonal scattering entries is strength^2.
    double strength = 0.0;
    std::uint64_t seed = 0;

    // Rms: entries are the Fourier components directly (default, used
    // throughout). Physical: entries carry the sqrt(Omega_q Omega_q')/(2 rho_0)
    // prefactor of the density-fluctuation coupling.
    enum class Normalization { Rms, Physical };
    Normalization normalization = Normalization::Rms;
    double reference_density = 1.0;  // rho_0, Physical mode only

    void validate() const {
        if (strength < 0.0) throw ParameterError("disorder strength must be >= 0");
        if (normalization == Normalization::Physical && !(reference_density > 0.0))
            throw ParameterError("reference density must be > 0");
    }
};

// One sampled scattering matrix. Hermitian with zero diagonal; deterministic
// given (grid, config.seed, index).
struct DisorderRealization {
    Eigen::MatrixXcd matrix;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
};

// Draws complex Gaussian Fourier components for every momentum transfer
// occurring on the grid, with the reality constraint pairing m and -m, and
// assembles E_{qq'} from them. Entries with the same transfer share one
// component, so the ensemble covariance <E_{q1 q2} E_{q3 q4}> equals
// strength^2 * delta_{q1+q3, q2+q4} off the diagonal.
DisorderRealization sample_scattering(const ModeGrid& grid, const DisorderConfig& cfg,
                                      std::uint64_t realization_index);

struct CovarianceReport {
    int n_quadruples = 0;
    int n_samples = 0;
    double strength = 0.0;
    // Worst absolute deviation of an empirical covariance from its target, and
    // the same deviation expressed in standard errors.
    double max_abs_deviation = 0.0;
    double max_deviation_se = 0.0;
    double mean_standard_error = 0.0;
};

// Empirical check of the pair covariance over a seeded random subset of index
// quadruples (both the conserving class, target strength^2, and the
// non-conserving class, target 0). Needs >= 100 samples.
CovarianceReport covariance_check(const ModeGrid& grid,
                                  std::span<const DisorderRealization> samples,
                                  double strength, int n_quadruples = 64,
                                  std::uint64_t selection_seed = 0x5eedu);

}  // namespace phonring
