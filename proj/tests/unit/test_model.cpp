#include <doctest.h>

#include <cmath>

#include "model.hpp"

using namespace phonring;

namespace {

OptoParams basic_opto() {
    OptoParams opto;
    opto.detuning = -1.0;
    opto.kappa = 0.3;
    opto.coupling_speed = 0.2;
    opto.q_center = 1.0;
    opto.optical_spatial_width = 0.02;
    opto.phonon_half_width = 0.05;
    return opto;
}

}  // namespace

TEST_CASE("mode grid layout is mirror symmetric and sorted") {
    const ModeGrid grid = build_mode_grid(3, 0.1, 2.0, 1.0);
    REQUIRE(grid.size() == 6);
    const double expect_q[6] = {-1.2, -1.1, -1.0, 1.0, 1.1, 1.2};
    for (int i = 0; i < 6; ++i) {
        CHECK(grid.wavevectors[i] == doctest::Approx(expect_q[i]).epsilon(1e-15));
        CHECK(grid.frequencies[i] ==
              doctest::Approx(std::abs(expect_q[i]) * 2.0).epsilon(1e-15));
        CHECK(grid.mirror_index(i) == 5 - i);
        CHECK(grid.wavevectors[grid.mirror_index(i)] ==
              doctest::Approx(-grid.wavevectors[i]).epsilon(1e-15));
    }
    CHECK(grid.density_of_states() == doctest::Approx(5.0));
}

TEST_CASE("closest_index picks the nearest mode on either branch") {
    const ModeGrid grid = build_mode_grid(3, 0.1, 2.0, 1.0);
    CHECK(grid.closest_index(1.04) == 3);
    CHECK(grid.closest_index(1.06) == 4);
    CHECK(grid.closest_index(-1.16) == 0);
    CHECK(grid.closest_index(0.0) == 2);  // -1.0 wins the tie with 1.0
    CHECK(grid.closest_index(50.0) == 5);
}

TEST_CASE("grid construction rejects bad parameters") {
    CHECK_THROWS_AS(build_mode_grid(0, 0.1, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(build_mode_grid(2, -0.1, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(build_mode_grid(2, 0.1, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(build_mode_grid(2, 0.1, 1.0, -1.0), ParameterError);
}

TEST_CASE("phase match function peaks at unity on center") {
    const OptoParams opto = basic_opto();
    const Complex on_center = phase_match(1.0, opto);
    CHECK(on_center.real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(on_center.imag() == doctest::Approx(0.0).epsilon(1e-15));

    // One total width off center the response falls to 1/(1+i).
    const double w = opto.phonon_half_width + opto.optical_spatial_width;
    const Complex off = phase_match(1.0 + w, opto);
    CHECK(off.real() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(off.imag() == doctest::Approx(-0.5).epsilon(1e-12));

    for (double q = -2.0; q <= 2.0; q += 0.05)
        CHECK(std::abs(phase_match(q, opto)) <= 1.0 + 1e-15);
}

TEST_CASE("lorentzian weight halves one half-width off center") {
    CHECK(lorentzian_weight(1.0, 1.0, 0.05) == doctest::Approx(1.0));
    CHECK(lorentzian_weight(1.05, 1.0, 0.05) == doctest::Approx(0.5));
    CHECK(lorentzian_weight(3.0, 3.0, 0.1) == doctest::Approx(9.0));
}

TEST_CASE("coupling speed from material constants") {
    MaterialConstants m;
    m.photon_frequency = 1.0;
    m.zero_point_scale = 1.0;
    m.photoelastic_ratio = 1.0;
    m.pump_amplitude = 1.0;
    CHECK(coupling_from_material(m) ==
          doctest::Approx(0.039788735772973836).epsilon(1e-15));

    m.pump_amplitude = 2.5;
    m.photon_frequency = 0.4;
    CHECK(coupling_from_material(m) ==
          doctest::Approx(0.039788735772973836).epsilon(1e-12));
}

TEST_CASE("optical denominator tracks detuning and loss") {
    const OptoParams opto = basic_opto();
    const Complex at_res = optical_denominator(opto, 1.0);
    CHECK(at_res.real() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(at_res.imag() == doctest::Approx(-0.15).epsilon(1e-15));

    const Complex detuned = optical_denominator(opto, 0.8);
    CHECK(detuned.real() == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(detuned.imag() == doctest::Approx(-0.15).epsilon(1e-15));
}

TEST_CASE("bare inverse susceptibility is diagonal dispersion minus damping") {
    const ModeGrid grid = build_mode_grid(2, 0.1, 2.0, 1.1);
    PhononDamping damping{2e-4};
    const Eigen::VectorXcd d = bare_inverse_susceptibility(grid, damping, 2.4);
    REQUIRE(d.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(d[i].real() == doctest::Approx(grid.frequencies[i] - 2.4).epsilon(1e-14));
        CHECK(d[i].imag() == doctest::Approx(-1e-4).epsilon(1e-15));
    }
}

TEST_CASE("coupling amplitudes follow the selected profile") {
    const ModeGrid grid = build_mode_grid(40, 0.005, 1.0, 0.9);
    OptoParams opto = basic_opto();
    opto.q_center = 1.0;
    opto.optical_spatial_width = 0.0;
    opto.phonon_half_width = 0.02;

    const Eigen::VectorXcd exact =
        coupling_amplitudes(grid, opto, PhaseMatchModel::Exact);
    const Eigen::VectorXcd ideal =
        coupling_amplitudes(grid, opto, PhaseMatchModel::Lorentzian);
    REQUIRE(exact.size() == grid.size());

    for (int i = 0; i < grid.size(); ++i) {
        const double q = grid.wavevectors[i];
        const Complex expect = opto.coupling_speed * q * phase_match(q, opto);
        CHECK(std::abs(exact[i] - expect) <= 1e-14);

        const double expect_sq =
            opto.coupling_speed * opto.coupling_speed *
            lorentzian_weight(q, opto.q_center, opto.phonon_half_width);
        CHECK(std::norm(ideal[i]) == doctest::Approx(expect_sq).epsilon(1e-12));
    }
}

TEST_CASE("optical mix matrix is the expected rank-1 outer product") {
    const ModeGrid grid = build_mode_grid(4, 0.01, 1.0, 0.98);
    const OptoParams opto = basic_opto();
    const double omega = 1.0;

    const Eigen::MatrixXcd m = optical_mix_matrix(grid, opto, omega);
    const Eigen::VectorXcd amp =
        coupling_amplitudes(grid, opto, PhaseMatchModel::Exact);
    const Complex den = optical_denominator(opto, omega);

    REQUIRE(m.rows() == grid.size());
    for (int i = 0; i < grid.size(); ++i)
        for (int j = 0; j < grid.size(); ++j)
            CHECK(std::abs(m(i, j) - amp[i] * std::conj(amp[j]) / den) <= 1e-13);

    // Every 2x2 minor vanishes for a rank-1 matrix.
    for (int i = 1; i < grid.size(); ++i)
        for (int j = 1; j < grid.size(); ++j)
            CHECK(std::abs(m(0, 0) * m(i, j) - m(0, j) * m(i, 0)) <= 1e-15);
}

TEST_CASE("opto validation rejects inconsistent parameters") {
    OptoParams opto = basic_opto();
    opto.kappa = 0.0;
    CHECK_THROWS_AS(opto.validate(), ParameterError);

    opto = basic_opto();
    opto.coupling_speed = -1.0;
    CHECK_THROWS_AS(opto.validate(), ParameterError);
}
