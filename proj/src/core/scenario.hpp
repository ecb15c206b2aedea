#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fitting.hpp"
#include "report.hpp"
#include "solver.hpp"
#include "types.hpp"

namespace phonring {

// Parsed and validated run configuration. Fields that only one scenario uses
// are zero/empty for the others.
struct ScenarioConfig {
    enum class Kind { Fig2, Fig4, Custom };
    Kind kind = Kind::Fig4;

    std::uint64_t seed = 1;
    std::string output_dir;
    DiffusionConvention convention = DiffusionConvention::Subtracted;
    PhaseMatchModel phase_match = PhaseMatchModel::Exact;

    // grid
    double mode_spacing = 0.0;
    double q_center = 0.0;
    double sound_speed = 1.0;
    int n_pairs = 0;              // few-mode scenario
    double band_linewidths = 0.0; // sweep scenarios: band width in units of gamma/v

    // phonon damping: single rate for fig2, one sweep curve per rate for fig4
    double gamma_in = 0.0;
    std::vector<double> gamma_values;

    // optics
    double kappa = 0.0;
    double detuning = 0.0;

    // fig2: deterministic pair coupling and pump strengths (gamma_opt units)
    double pair_coupling = 0.0;
    std::vector<double> gamma_opt_values;

    // sweep scenarios
    double broadening_linewidths = 0.0;  // disorder broadening in units of gamma
    std::vector<double> x_values;        // rescaled pump powers, first must be 0
    int n_realizations = 0;
    int n_blocks = 0;

    // response sampling
    double window_linewidths = 0.0;
    int n_omega = 0;

    bool dump_scattering = false;
};

// External tokens for the two interface enums ("raw"/"subtracted" and
// "eq13"/"lorentzian"); unknown tokens raise ConfigError.
DiffusionConvention convention_from_token(const std::string& token);
PhaseMatchModel phase_match_from_token(const std::string& token);

// Parse JSON text into a config. scenario_override, when nonempty, supplies or
// must match the file's scenario field. Unknown keys anywhere are errors.
ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& scenario_override = "");
ScenarioConfig load_config(const std::string& path,
                           const std::string& scenario_override = "");

// Cross-field checks that need no heavy computation, including the mode-spacing
// regime guards. Called by both the validate command and the runners.
void validate_config(const ScenarioConfig& cfg);

struct CliOverrides {
    const std::uint64_t* seed = nullptr;
    const std::string* output_dir = nullptr;
    const int* n_realizations = nullptr;
    const DiffusionConvention* convention = nullptr;
    const PhaseMatchModel* phase_match = nullptr;
};
void apply_overrides(ScenarioConfig& cfg, const CliOverrides& overrides);

// Few-mode chirality scenario: deterministic pair coupling, one response per
// pump strength, fitted linewidths for both propagation directions.
struct Fig2Result {
    std::vector<double> gamma_opt;        // 0 first, then the configured pumps
    std::vector<LinewidthEstimate> cw;    // aligned with gamma_opt
    std::vector<LinewidthEstimate> ccw;
    std::vector<std::string> files;
};
Fig2Result run_fig2(const ScenarioConfig& cfg);

// Disorder-ensemble power sweep: normalized diffusion of the backward center
// mode versus rescaled power, with block error bars, saturating fit, and the
// analytic overlay.
struct SweepPoint {
    double x = 0.0;
    double diffusion = 0.0;
    double diffusion_err = 0.0;
    double gamma_cw = 0.0;
    double gamma_ccw = 0.0;
};

struct SweepCurve {
    double gamma = 0.0;
    double rho_gamma = 0.0;
    double strength = 0.0;
    int n_pairs = 0;
    int n_excluded = 0;
    std::vector<SweepPoint> points;
    SaturatingFit fit;
    std::vector<PredictionRow> predictions;
};

struct Fig4Result {
    std::vector<SweepCurve> curves;
    std::vector<std::string> files;
};
Fig4Result run_fig4(const ScenarioConfig& cfg);

// Dispatch on cfg.kind (Custom runs the sweep pipeline without the regime
// guard). Returns the list of files written, manifest last.
std::vector<std::string> run_scenario(const ScenarioConfig& cfg);

}  // namespace phonring
