#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "disorder.hpp"
#include "model.hpp"
#include "types.hpp"

namespace phonring {

std::vector<double> linspace(double start, double stop, int n_points);

// Where the scattering matrix E comes from for each realization.
struct DisorderSource {
    enum class Kind { None, Sampled, Fixed };
    Kind kind = Kind::None;
    DisorderConfig config{};     // Sampled
    Eigen::MatrixXcd fixed{};    // Fixed: Hermitian, zero diagonal

    static DisorderSource none() { return {}; }
    static DisorderSource sampled(DisorderConfig cfg) {
        DisorderSource s;
        s.kind = Kind::Sampled;
        s.config = cfg;
        return s;
    }
    static DisorderSource fixed_matrix(Eigen::MatrixXcd m);
};

// Direct factorizes D - M - E at every frequency. Spectral eigendecomposes the
// Hermitian, frequency-independent part once per realization and applies the
// rank-1 optical update in the eigenbasis; it returns diagonal entries only.
// Auto picks Direct for small grids and Spectral otherwise.
enum class SolveMethod { Direct, Spectral, Auto };

struct SolveOptions {
    int n_realizations = 1;
    SolveMethod method = SolveMethod::Auto;
    bool store_full = false;  // Direct only
    // A realization is dropped entirely when any factorization at any frequency
    // falls below this conditioning level, so ensembles stay paired across
    // related runs.
    double singular_threshold = 1e-12;
    double max_excluded_fraction = 0.01;
    std::vector<int> tracked_modes;  // empty = every mode
};

// Ensemble-averaged response, sampled on a frequency grid. diagonal(w, j) is
// the mean susceptibility of tracked mode j at omega[w].
struct ResponseTable {
    std::vector<double> omega;
    std::vector<int> modes;
    Eigen::MatrixXcd diagonal;
    std::vector<Eigen::MatrixXcd> full;  // per frequency, only if requested
    int n_realizations = 0;
    int n_included = 0;
    int n_excluded = 0;
    std::uint64_t seed = 0;
};

ResponseTable solve_response(const ModeGrid& grid, const PhononDamping& damping,
                             const OptoParams* opto, PhaseMatchModel pm,
                             const DisorderSource& disorder,
                             std::span<const double> omega,
                             const SolveOptions& opts);

// Shared-disorder sweep over pump strengths: realization r sees the same
// scattering matrix at every coupling speed, so ratios between powers cancel
// most sampling noise. Realizations are split into equal contiguous blocks for
// error estimates.
struct PowerSweepResult {
    std::vector<double> omega;
    std::vector<int> modes;
    std::vector<double> coupling_speeds;
    std::vector<Eigen::MatrixXcd> mean;  // [power] -> n_omega x n_modes
    // [power][block] -> n_omega x n_modes, mean over that block
    std::vector<std::vector<Eigen::MatrixXcd>> block_mean;
    std::vector<int> block_count;  // included realizations per block
    int n_realizations = 0;
    int n_included = 0;
    int n_excluded = 0;
};

PowerSweepResult solve_power_sweep(const ModeGrid& grid, const PhononDamping& damping,
                                   const OptoParams& base, PhaseMatchModel pm,
                                   std::span<const double> coupling_speeds,
                                   const DisorderConfig& disorder,
                                   std::span<const double> omega,
                                   std::span<const int> tracked, int n_realizations,
                                   int n_blocks, const SolveOptions& opts = {});

// Lorentzian linewidth read off |chi_qq(omega)|^2; gamma_hat is the full width
// at half maximum, which for a bare mode equals the damping rate.
struct LinewidthEstimate {
    double mode_q = 0.0;
    double omega_hat = 0.0;
    double gamma_hat = 0.0;
    double residual = 0.0;
    int n_excluded = 0;
};

LinewidthEstimate extract_linewidth(std::span<const double> omega,
                                    std::span<const Complex> chi_diag, double mode_q,
                                    int n_excluded = 0);

// How pump-on/pump-off linewidths combine into a normalized diffusion value.
// Subtracted compares disorder-induced broadening only; Raw compares the full
// linewidths.
enum class DiffusionConvention { Subtracted, Raw };

double normalized_diffusion(double gamma_on, double gamma_off, double gamma_intrinsic,
                            DiffusionConvention convention);

}  // namespace phonring
