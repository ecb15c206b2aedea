#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "solver.hpp"
#include "types.hpp"

namespace phonring {

// Doubles are printed with %.17g so values round-trip and reruns are
// byte-identical.
std::string format_double(double value);

// columns: omega, mode_q, re_chi, im_chi, abs2_chi
void write_response_csv(const std::string& path, const ResponseTable& table,
                        const ModeGrid& grid);

// columns: mode_q, omega_hat, gamma_hat, residual, n_excluded
void write_linewidths_csv(const std::string& path,
                          std::span<const LinewidthEstimate> estimates);

// columns: x, rho_gamma, diffusion_ratio, sigmaD_im, sigmaP_im, kappa_tilde
struct PredictionRow {
    double x = 0.0;
    double rho_gamma = 0.0;
    double diffusion_ratio = 0.0;
    double sigma_d_im = 0.0;
    double sigma_p_im = 0.0;
    double kappa_tilde = 0.0;
};
void write_predictions_csv(const std::string& path,
                           std::span<const PredictionRow> rows);

// columns: row, col, re, im  (debug dump of one scattering matrix)
void write_matrix_csv(const std::string& path, const Eigen::MatrixXcd& matrix);

// Minimal self-contained SVG line plots, no external dependencies.
struct PlotSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_err;  // empty = no error bars
    bool markers = true;
    bool line = true;
    bool dashed = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

void write_svg_plot(const std::string& path, const PlotSpec& spec);

std::uint64_t fnv1a_file(const std::string& path);
std::string hex64(std::uint64_t value);

}  // namespace phonring
