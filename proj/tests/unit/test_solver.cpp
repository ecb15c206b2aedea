#include <doctest.h>

#include <cmath>
#include <span>
#include <vector>

#include "solver.hpp"

using namespace phonring;

namespace {

OptoParams pump_opto(double coupling_speed, double gamma, double v) {
    OptoParams opto;
    opto.detuning = -1.0;
    opto.kappa = 0.1;
    opto.coupling_speed = coupling_speed;
    opto.q_center = 1.0;
    opto.optical_spatial_width = 0.0;
    opto.phonon_half_width = gamma / (2.0 * v);
    return opto;
}

std::span<const Complex> column(const ResponseTable& table, int j) {
    return {table.diagonal.col(j).data(),
            static_cast<std::size_t>(table.diagonal.rows())};
}

}  // namespace

TEST_CASE("linspace spans the interval inclusively") {
    const std::vector<double> g = linspace(1.0, 2.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 2.0);
    CHECK(g[2] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK_THROWS_AS(linspace(0.0, 1.0, 0), ParameterError);
}

TEST_CASE("clean ring response reduces to the bare susceptibility") {
    const double gamma = 2e-4;
    const ModeGrid grid = build_mode_grid(4, 0.01, 1.0, 1.0);
    const PhononDamping damping{gamma};
    const std::vector<double> omega = linspace(1.0 - 6 * gamma, 1.0 + 6 * gamma, 41);

    SolveOptions opts;
    const ResponseTable table = solve_response(grid, damping, nullptr,
                                               PhaseMatchModel::Exact,
                                               DisorderSource::none(), omega, opts);

    REQUIRE(table.diagonal.rows() == 41);
    REQUIRE(table.diagonal.cols() == grid.size());
    double worst = 0.0;
    for (int w = 0; w < 41; ++w)
        for (int j = 0; j < grid.size(); ++j) {
            const Complex expect =
                1.0 / Complex(grid.frequencies[j] - omega[w], -gamma / 2.0);
            worst = std::max(worst,
                             std::abs(table.diagonal(w, j) - expect) / std::abs(expect));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("pump-on clean response matches a dense inversion") {
    const double gamma = 2e-4;
    const ModeGrid grid = build_mode_grid(4, 0.01, 1.0, 1.0);
    const PhononDamping damping{gamma};
    const OptoParams opto = pump_opto(0.003, gamma, 1.0);
    const std::vector<double> omega = linspace(1.0 - 6 * gamma, 1.0 + 6 * gamma, 21);

    SolveOptions opts;
    opts.method = SolveMethod::Direct;
    const ResponseTable table = solve_response(grid, damping, &opto,
                                               PhaseMatchModel::Exact,
                                               DisorderSource::none(), omega, opts);

    double worst = 0.0;
    for (std::size_t w = 0; w < omega.size(); ++w) {
        Eigen::MatrixXcd a = optical_mix_matrix(grid, opto, omega[w]);
        a = (-a).eval();
        a.diagonal() += bare_inverse_susceptibility(grid, damping, omega[w]);
        const Eigen::MatrixXcd inv = a.inverse();
        for (int j = 0; j < grid.size(); ++j)
            worst = std::max(worst, std::abs(table.diagonal(static_cast<int>(w), j) -
                                             inv(j, j)) /
                                        std::abs(inv(j, j)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("direct and spectral routes agree on a disordered ensemble") {
    const double gamma = 1e-3;
    const ModeGrid grid = build_mode_grid(6, 0.002, 1.0, 0.994);
    const PhononDamping damping{gamma};
    const OptoParams opto = pump_opto(0.002, gamma, 1.0);
    const std::vector<double> omega = linspace(1.0 - 5 * gamma, 1.0 + 5 * gamma, 31);

    DisorderConfig dis;
    dis.strength = 2e-4;
    dis.seed = 17;

    SolveOptions direct;
    direct.n_realizations = 24;
    direct.method = SolveMethod::Direct;
    SolveOptions spectral = direct;
    spectral.method = SolveMethod::Spectral;

    const ResponseTable a =
        solve_response(grid, damping, &opto, PhaseMatchModel::Exact,
                       DisorderSource::sampled(dis), omega, direct);
    const ResponseTable b =
        solve_response(grid, damping, &opto, PhaseMatchModel::Exact,
                       DisorderSource::sampled(dis), omega, spectral);

    REQUIRE(a.n_included == b.n_included);
    const double scale = a.diagonal.cwiseAbs().maxCoeff();
    CHECK((a.diagonal - b.diagonal).cwiseAbs().maxCoeff() / scale <= 1e-10);
}

TEST_CASE("tracked subset keeps the requested order") {
    const ModeGrid grid = build_mode_grid(5, 0.01, 1.0, 1.0);
    const PhononDamping damping{1e-3};
    const std::vector<double> omega = {1.0};

    SolveOptions opts;
    opts.tracked_modes = {7, 2};
    const ResponseTable table = solve_response(grid, damping, nullptr,
                                               PhaseMatchModel::Exact,
                                               DisorderSource::none(), omega, opts);
    REQUIRE(table.modes == std::vector<int>{7, 2});
    REQUIRE(table.diagonal.cols() == 2);
    CHECK(std::abs(table.diagonal(0, 0) -
                   1.0 / Complex(grid.frequencies[7] - 1.0, -5e-4)) <= 1e-12);

    opts.tracked_modes = {11};
    CHECK_THROWS_AS(solve_response(grid, damping, nullptr, PhaseMatchModel::Exact,
                                   DisorderSource::none(), omega, opts),
                    ParameterError);
}

TEST_CASE("full matrices are only available from the direct route") {
    const ModeGrid grid = build_mode_grid(3, 0.01, 1.0, 1.0);
    const PhononDamping damping{1e-3};
    const std::vector<double> omega = {0.999, 1.0};

    SolveOptions opts;
    opts.store_full = true;
    opts.method = SolveMethod::Spectral;
    CHECK_THROWS_AS(solve_response(grid, damping, nullptr, PhaseMatchModel::Exact,
                                   DisorderSource::none(), omega, opts),
                    ParameterError);

    opts.method = SolveMethod::Direct;
    const ResponseTable table = solve_response(grid, damping, nullptr,
                                               PhaseMatchModel::Exact,
                                               DisorderSource::none(), omega, opts);
    REQUIRE(table.full.size() == omega.size());
    for (int j = 0; j < grid.size(); ++j)
        CHECK(std::abs(table.full[1](j, j) - table.diagonal(1, j)) <= 1e-15);
}

TEST_CASE("fixed scattering sources are validated") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 4);
    CHECK_THROWS_AS(DisorderSource::fixed_matrix(m), ParameterError);

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4, 4);
    h(0, 1) = Complex(0.1, 0.2);
    CHECK_THROWS_AS(DisorderSource::fixed_matrix(h), ParameterError);

    h(1, 0) = std::conj(h(0, 1));
    const DisorderSource src = DisorderSource::fixed_matrix(h);
    CHECK(src.kind == DisorderSource::Kind::Fixed);
}

TEST_CASE("linewidth extraction recovers the bare damping rate") {
    const double gamma = 4e-4;
    const ModeGrid grid = build_mode_grid(2, 0.05, 1.0, 1.0);
    const PhononDamping damping{gamma};
    const int ccw = grid.closest_index(-1.0);
    const std::vector<double> omega = linspace(1.0 - 6 * gamma, 1.0 + 6 * gamma, 193);

    SolveOptions opts;
    opts.tracked_modes = {ccw};
    const ResponseTable table = solve_response(grid, damping, nullptr,
                                               PhaseMatchModel::Exact,
                                               DisorderSource::none(), omega, opts);

    const LinewidthEstimate est =
        extract_linewidth(table.omega, column(table, 0), grid.wavevectors[ccw]);
    CHECK(est.gamma_hat == doctest::Approx(gamma).epsilon(1e-6));
    CHECK(est.omega_hat == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(est.mode_q == doctest::Approx(-1.0));
    CHECK(est.residual <= 1e-6);
}

TEST_CASE("normalized diffusion conventions") {
    CHECK(normalized_diffusion(3e-4, 4e-4, 2e-4, DiffusionConvention::Subtracted) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(normalized_diffusion(3e-4, 4e-4, 2e-4, DiffusionConvention::Raw) ==
          doctest::Approx(0.75).epsilon(1e-12));

    CHECK_THROWS_AS(
        normalized_diffusion(3e-4, 2e-4, 2e-4, DiffusionConvention::Subtracted),
        StatisticsError);
    CHECK_THROWS_AS(normalized_diffusion(3e-4, 0.0, 0.0, DiffusionConvention::Raw),
                    RangeError);
}

TEST_CASE("power sweep shares disorder across powers and blocks consistently") {
    const double gamma = 1e-3;
    const ModeGrid grid = build_mode_grid(40, 5e-4, 1.0, 0.99);
    const PhononDamping damping{gamma};
    const OptoParams base = pump_opto(1.0, gamma, 1.0);
    const std::vector<double> omega = linspace(1.0 - 4 * gamma, 1.0 + 4 * gamma, 25);

    DisorderConfig dis;
    dis.strength = 1e-4;
    dis.seed = 23;

    const int ccw = grid.closest_index(-1.0);
    const int cw = grid.mirror_index(ccw);
    const std::vector<int> tracked = {ccw, cw};
    const std::vector<double> speeds = {0.0, 0.004};

    const PowerSweepResult sweep = solve_power_sweep(
        grid, damping, base, PhaseMatchModel::Lorentzian, speeds, dis, omega,
        tracked, 8, 2);

    REQUIRE(sweep.mean.size() == speeds.size());
    REQUIRE(sweep.block_mean.size() == speeds.size());
    REQUIRE(sweep.block_count.size() == 2);
    CHECK(sweep.n_included + sweep.n_excluded == 8);

    // The overall mean is the count-weighted combination of the block means.
    for (std::size_t p = 0; p < speeds.size(); ++p) {
        Eigen::MatrixXcd recombined =
            Eigen::MatrixXcd::Zero(sweep.mean[p].rows(), sweep.mean[p].cols());
        int total = 0;
        for (std::size_t b = 0; b < sweep.block_mean[p].size(); ++b) {
            recombined += static_cast<double>(sweep.block_count[b]) *
                          sweep.block_mean[p][b];
            total += sweep.block_count[b];
        }
        recombined /= static_cast<double>(total);
        const double scale = sweep.mean[p].cwiseAbs().maxCoeff();
        CHECK((recombined - sweep.mean[p]).cwiseAbs().maxCoeff() / scale <= 1e-12);
    }

    // Pump off, the sweep reproduces a plain ensemble solve.
    SolveOptions opts;
    opts.n_realizations = 8;
    opts.tracked_modes = tracked;
    OptoParams off = base;
    off.coupling_speed = 0.0;
    const ResponseTable plain =
        solve_response(grid, damping, &off, PhaseMatchModel::Lorentzian,
                       DisorderSource::sampled(dis), omega, opts);
    const double scale = plain.diagonal.cwiseAbs().maxCoeff();
    CHECK((sweep.mean[0] - plain.diagonal).cwiseAbs().maxCoeff() / scale <= 1e-10);
}

TEST_CASE("power sweep validates block structure") {
    const ModeGrid grid = build_mode_grid(4, 0.01, 1.0, 1.0);
    const PhononDamping damping{1e-3};
    const OptoParams base = pump_opto(1.0, 1e-3, 1.0);
    const std::vector<double> omega = {1.0};
    DisorderConfig dis;
    dis.strength = 1e-4;
    const std::vector<int> tracked = {0};
    const std::vector<double> speeds = {0.0};

    CHECK_THROWS_AS(solve_power_sweep(grid, damping, base, PhaseMatchModel::Exact,
                                      speeds, dis, omega, tracked, 7, 3),
                    ParameterError);
}
