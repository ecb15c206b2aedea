#include <doctest.h>

#include <cmath>
#include <vector>

#include "disorder.hpp"
#include "model.hpp"

using namespace phonring;

namespace {

DisorderConfig rms_config(double strength, std::uint64_t seed) {
    DisorderConfig cfg;
    cfg.strength = strength;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("sampled scattering is Hermitian with zero diagonal") {
    const ModeGrid grid = build_mode_grid(5, 0.01, 1.0, 0.98);
    const DisorderRealization r = sample_scattering(grid, rms_config(0.3, 42), 0);

    REQUIRE(r.matrix.rows() == grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        CHECK(r.matrix(i, i) == Complex(0.0, 0.0));
        for (int j = 0; j < grid.size(); ++j)
            CHECK(std::abs(r.matrix(i, j) - std::conj(r.matrix(j, i))) <= 1e-15);
    }
}

TEST_CASE("sampling is deterministic in seed and realization index") {
    const ModeGrid grid = build_mode_grid(4, 0.01, 1.0, 1.0);
    const DisorderConfig cfg = rms_config(0.2, 7);

    const DisorderRealization a = sample_scattering(grid, cfg, 3);
    const DisorderRealization b = sample_scattering(grid, cfg, 3);
    CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() == 0.0);

    const DisorderRealization c = sample_scattering(grid, cfg, 4);
    CHECK((a.matrix - c.matrix).cwiseAbs().maxCoeff() > 0.0);

    const DisorderRealization d = sample_scattering(grid, rms_config(0.2, 8), 3);
    CHECK((a.matrix - d.matrix).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("zero strength produces the zero matrix") {
    const ModeGrid grid = build_mode_grid(3, 0.01, 1.0, 1.0);
    const DisorderRealization r = sample_scattering(grid, rms_config(0.0, 1), 0);
    CHECK(r.matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("entries with equal momentum transfer share one component") {
    // Incommensurate offset: cross-branch transfers stay distinct, but within
    // a branch the transfer depends only on the index difference.
    const ModeGrid grid = build_mode_grid(6, 0.01, 1.0, 1.0005);
    const DisorderRealization r = sample_scattering(grid, rms_config(0.5, 11), 2);

    const int p = grid.n_pairs;
    for (int step = 1; step < p; ++step)
        for (int j = 0; j + step < p; ++j) {
            CHECK(std::abs(r.matrix(p + j, p + j + step) - r.matrix(p, p + step)) <=
                  1e-15);
        }
}

TEST_CASE("physical normalization rescales by mode frequencies") {
    const ModeGrid grid = build_mode_grid(4, 0.05, 2.0, 0.9);
    const DisorderConfig rms = rms_config(0.3, 21);

    DisorderConfig phys = rms;
    phys.normalization = DisorderConfig::Normalization::Physical;
    phys.reference_density = 2.5;

    const DisorderRealization a = sample_scattering(grid, rms, 0);
    const DisorderRealization b = sample_scattering(grid, phys, 0);
    for (int i = 0; i < grid.size(); ++i)
        for (int j = 0; j < grid.size(); ++j) {
            if (i == j) continue;
            const double scale =
                std::sqrt(grid.frequencies[i] * grid.frequencies[j]) / (2.0 * 2.5);
            CHECK(std::abs(b.matrix(i, j) - scale * a.matrix(i, j)) <= 1e-15);
        }
}

TEST_CASE("ensemble mean vanishes entrywise") {
    const ModeGrid grid = build_mode_grid(4, 0.01, 1.0, 1.0);
    const DisorderConfig cfg = rms_config(0.25, 99);
    const int n_samples = 1200;

    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(grid.size(), grid.size());
    for (int r = 0; r < n_samples; ++r)
        mean += sample_scattering(grid, cfg, r).matrix;
    mean /= static_cast<double>(n_samples);

    // Entry standard error is strength/sqrt(N); allow five of them.
    const double bound = 5.0 * 0.25 / std::sqrt(static_cast<double>(n_samples));
    CHECK(mean.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("pair covariance matches the conservation rule") {
    const ModeGrid grid = build_mode_grid(10, 0.01, 1.0, 1.0);
    const DisorderConfig cfg = rms_config(0.3, 5);
    const int n_samples = 1500;

    std::vector<DisorderRealization> samples;
    samples.reserve(n_samples);
    for (int r = 0; r < n_samples; ++r)
        samples.push_back(sample_scattering(grid, cfg, r));

    const CovarianceReport report = covariance_check(grid, samples, 0.3);
    CHECK(report.n_quadruples == 64);
    CHECK(report.n_samples == n_samples);
    CHECK(report.max_deviation_se <= 5.0);
}

TEST_CASE("covariance check rejects tiny ensembles") {
    const ModeGrid grid = build_mode_grid(3, 0.01, 1.0, 1.0);
    std::vector<DisorderRealization> samples;
    for (int r = 0; r < 10; ++r)
        samples.push_back(sample_scattering(grid, rms_config(0.1, 2), r));
    CHECK_THROWS_AS(covariance_check(grid, samples, 0.1), StatisticsError);
}

TEST_CASE("disorder config validation") {
    DisorderConfig cfg = rms_config(-0.1, 0);
    CHECK_THROWS_AS(cfg.validate(), ParameterError);

    cfg = rms_config(0.1, 0);
    cfg.normalization = DisorderConfig::Normalization::Physical;
    cfg.reference_density = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}
