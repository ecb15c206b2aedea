#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <phonring.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

phonring_model_params small_ring(double gamma) {
    phonring_model_params p{};
    p.n_pairs = 3;
    p.mode_spacing = 0.01;
    p.sound_speed = 1.0;
    p.q_offset = 0.99;
    p.gamma = gamma;
    p.detuning = -1.0;
    p.kappa = 0.1;
    p.coupling_speed = 0.0;
    p.q_center = 1.0;
    p.optical_spatial_width = 0.0;
    p.phase_match = PHONRING_PHASE_MATCH_EQ13;
    p.disorder_strength = 0.0;
    p.seed = 1;
    return p;
}

struct ModelGuard {
    phonring_model* model = nullptr;
    ~ModelGuard() { phonring_model_free(model); }
};

struct ResponseGuard {
    phonring_response* response = nullptr;
    ~ResponseGuard() { phonring_response_free(response); }
};

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "phonring_capi_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("library identifies itself and reports errors per call") {
    REQUIRE(phonring_version() != nullptr);
    CHECK(std::strlen(phonring_version()) > 0);

    CHECK(phonring_model_create(nullptr, nullptr) == PHONRING_ERR_PARAMETER);
    CHECK(std::strlen(phonring_last_error()) > 0);

    double out = 0.0;
    CHECK(phonring_optical_damping(0.01, 0.3, &out) == PHONRING_OK);
    CHECK(std::strlen(phonring_last_error()) == 0);  // cleared on success
}

TEST_CASE("model handle exposes the mode grid") {
    const phonring_model_params params = small_ring(2e-4);
    ModelGuard m;
    REQUIRE(phonring_model_create(&params, &m.model) == PHONRING_OK);
    REQUIRE(phonring_model_mode_count(m.model) == 6);

    std::vector<double> q(6), f(6);
    REQUIRE(phonring_model_wavevectors(m.model, q.data(), 6) == PHONRING_OK);
    REQUIRE(phonring_model_frequencies(m.model, f.data(), 6) == PHONRING_OK);
    for (int i = 0; i < 6; ++i) {
        if (i > 0) CHECK(q[i] > q[i - 1]);
        CHECK(f[i] == doctest::Approx(std::abs(q[i])).epsilon(1e-15));
    }
    CHECK(q[0] == doctest::Approx(-1.01));
    CHECK(q[5] == doctest::Approx(1.01));

    CHECK(phonring_model_wavevectors(m.model, q.data(), 5) == PHONRING_ERR_PARAMETER);
    CHECK(phonring_model_mode_count(nullptr) == -1);
}

TEST_CASE("phase match profile peaks on center") {
    phonring_model_params params = small_ring(2e-4);
    params.coupling_speed = 0.01;  // the profile belongs to the pump path
    ModelGuard m;
    REQUIRE(phonring_model_create(&params, &m.model) == PHONRING_OK);

    double re = 0.0, im = 0.0;
    REQUIRE(phonring_model_phase_match(m.model, 1.0, &re, &im) == PHONRING_OK);
    CHECK(re == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(im == doctest::Approx(0.0).epsilon(1e-12));

    REQUIRE(phonring_model_phase_match(m.model, 1.3, &re, &im) == PHONRING_OK);
    CHECK(re * re + im * im < 1.0);
}

TEST_CASE("scattering matrices are Hermitian, zero-diagonal, reproducible") {
    phonring_model_params params = small_ring(2e-4);
    params.disorder_strength = 0.05;
    params.seed = 11;
    ModelGuard m;
    REQUIRE(phonring_model_create(&params, &m.model) == PHONRING_OK);

    const int n = phonring_model_mode_count(m.model);
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::vector<double> re(nn), im(nn), re2(nn), im2(nn);
    REQUIRE(phonring_model_scattering(m.model, 0, re.data(), im.data(), nn) ==
            PHONRING_OK);
    REQUIRE(phonring_model_scattering(m.model, 0, re2.data(), im2.data(), nn) ==
            PHONRING_OK);
    CHECK(re == re2);
    CHECK(im == im2);

    double off_diag = 0.0;
    for (int i = 0; i < n; ++i) {
        CHECK(re[i * n + i] == 0.0);
        CHECK(im[i * n + i] == 0.0);
        for (int j = 0; j < n; ++j) {
            CHECK(re[i * n + j] == doctest::Approx(re[j * n + i]).epsilon(1e-14));
            CHECK(im[i * n + j] == doctest::Approx(-im[j * n + i]).epsilon(1e-14));
            if (i != j) off_diag += std::abs(re[i * n + j]);
        }
    }
    CHECK(off_diag > 0.0);

    REQUIRE(phonring_model_scattering(m.model, 1, re2.data(), im2.data(), nn) ==
            PHONRING_OK);
    CHECK(re != re2);
}

TEST_CASE("solve produces the bare susceptibility for a clean ring") {
    const double gamma = 4e-4;
    const phonring_model_params params = small_ring(gamma);
    ModelGuard m;
    REQUIRE(phonring_model_create(&params, &m.model) == PHONRING_OK);

    std::vector<double> omega(101);
    for (std::size_t i = 0; i < omega.size(); ++i)
        omega[i] = 1.0 - 6 * gamma + 12 * gamma * i / (omega.size() - 1);

    const int tracked[1] = {0};  // mode at q = -1.01
    phonring_solve_params sp{};
    sp.omega = omega.data();
    sp.n_omega = omega.size();
    sp.n_realizations = 1;
    sp.tracked_modes = tracked;
    sp.n_tracked = 1;
    sp.method = PHONRING_METHOD_DIRECT;

    ResponseGuard r;
    REQUIRE(phonring_solve(m.model, &sp, &r.response) == PHONRING_OK);
    REQUIRE(phonring_response_n_omega(r.response) == omega.size());
    REQUIRE(phonring_response_n_modes(r.response) == 1);
    CHECK(phonring_response_excluded(r.response) == 0);

    int mode = -1;
    REQUIRE(phonring_response_mode_index(r.response, 0, &mode) == PHONRING_OK);
    CHECK(mode == 0);

    std::vector<double> re(omega.size()), im(omega.size());
    REQUIRE(phonring_response_diagonal(r.response, 0, re.data(), im.data(),
                                       omega.size()) == PHONRING_OK);
    double worst = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const std::complex<double> expect =
            1.0 / std::complex<double>(1.01 - omega[i], -gamma / 2.0);
        const std::complex<double> got(re[i], im[i]);
        worst = std::max(worst, std::abs(got - expect) / std::abs(expect));
    }
    CHECK(worst <= 1e-12);

    double omega_hat = 0.0, gamma_hat = 0.0, residual = 0.0;
    REQUIRE(phonring_response_fit_linewidth(r.response, 0, &omega_hat, &gamma_hat,
                                            &residual) == PHONRING_OK);
    CHECK(omega_hat == doctest::Approx(1.01).epsilon(1e-9));
    CHECK(gamma_hat == doctest::Approx(gamma).epsilon(1e-6));

    const fs::path csv = scratch_dir() / "response.csv";
    REQUIRE(phonring_response_write_csv(r.response, csv.string().c_str()) ==
            PHONRING_OK);
    const std::string text = slurp(csv);
    CHECK(text.rfind("omega,mode_q,re_chi,im_chi,abs2_chi\n", 0) == 0);
}

TEST_CASE("closed-form helpers match their formulas") {
    double out = 0.0;
    REQUIRE(phonring_optical_damping(0.01, 0.3, &out) == PHONRING_OK);
    CHECK(out == doctest::Approx(4.0 * 1e-4 / 0.3).epsilon(1e-15));
    CHECK(phonring_optical_damping(0.01, 0.0, &out) == PHONRING_ERR_PARAMETER);

    double cw = 0.0, ccw = 0.0;
    REQUIRE(phonring_pair_linewidths(2e-4, 1e-3, 1e-5, &cw, &ccw) == PHONRING_OK);
    CHECK(cw == doctest::Approx(2e-4 + 1e-3 + 4e-10 / 2e-4).epsilon(1e-12));
    CHECK(ccw == doctest::Approx(2e-4 + 4e-10 / 1.2e-3).epsilon(1e-12));
    CHECK(cw > ccw);

    REQUIRE(phonring_diffusion_ratio(0.0, 2.0, &out) == PHONRING_OK);
    CHECK(out == doctest::Approx(1.0));
    REQUIRE(phonring_diffusion_ratio_limit(2.0, &out) == PHONRING_OK);
    CHECK(out == doctest::Approx(0.9204225284540523).epsilon(1e-15));

    REQUIRE(phonring_normalized_diffusion(3e-4, 4e-4, 2e-4, 1, &out) == PHONRING_OK);
    CHECK(out == doctest::Approx(0.5));
    REQUIRE(phonring_normalized_diffusion(3e-4, 4e-4, 2e-4, 0, &out) == PHONRING_OK);
    CHECK(out == doctest::Approx(0.75));
    CHECK(phonring_normalized_diffusion(3e-4, 2e-4, 2e-4, 1, &out) ==
          PHONRING_ERR_STATISTICS);

    double sre = 0.0, sim = 0.0;
    REQUIRE(phonring_sigma_disorder(1e4, 2e-6, &sre, &sim) == PHONRING_OK);
    CHECK(sre == doctest::Approx(0.0));
    CHECK(sim == doctest::Approx(2.0 * kPi * 1e4 * 4e-12).epsilon(1e-12));

    REQUIRE(phonring_sigma_pump_center(0.0, 1e-3, 0.1, 1e4, 2e-6, &sre, &sim) ==
            PHONRING_OK);
    CHECK(sim == doctest::Approx(0.0));
    REQUIRE(phonring_sigma_pump_center(3.5, 1e-3, 0.1, 1e4, 2e-6, &sre, &sim) ==
            PHONRING_OK);
    CHECK(sim < 0.0);
    // Suppressed and bare broadenings recombine into the closed-form curve.
    double sim_d = 0.0;
    REQUIRE(phonring_sigma_disorder(1e4, 2e-6, &sre, &sim_d) == PHONRING_OK);
    double ratio_expect = 0.0;
    REQUIRE(phonring_diffusion_ratio(3.5, 10.0, &ratio_expect) == PHONRING_OK);
    CHECK((sim_d + sim) / sim_d == doctest::Approx(ratio_expect).epsilon(1e-12));

    REQUIRE(phonring_kappa_effective_center(0.1, 1e4, 0.01, 1.0, &out) ==
            PHONRING_OK);
    CHECK(out == doctest::Approx(0.1 + kPi * 1e4 * 1e-4).epsilon(1e-12));
}

TEST_CASE("saturating fit through the C boundary") {
    std::vector<double> x = {0.0, 0.05, 0.1, 0.25, 0.6, 1.5, 3.5, 8.0, 20.0};
    std::vector<double> y(x.size()), sigma(x.size(), 1e-4);
    const double b_true = kPi * 5.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = 1.0 - 0.5 * x[i] / (1.0 + b_true * x[i]);

    double a = 0.0, b = 0.0, a_err = 0.0, b_err = 0.0;
    REQUIRE(phonring_fit_saturating(x.data(), y.data(), sigma.data(), x.size(), 5.0,
                                    &a, &b, &a_err, &b_err) == PHONRING_OK);
    CHECK(a == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(b == doctest::Approx(b_true).epsilon(1e-6));
    CHECK(a_err >= 0.0);

    // Output pointers are individually optional.
    REQUIRE(phonring_fit_saturating(x.data(), y.data(), sigma.data(), x.size(), 5.0,
                                    nullptr, &b, nullptr, nullptr) == PHONRING_OK);
    CHECK(b == doctest::Approx(b_true).epsilon(1e-6));

    CHECK(phonring_fit_saturating(nullptr, y.data(), sigma.data(), x.size(), 5.0,
                                  &a, &b, nullptr, nullptr) ==
          PHONRING_ERR_PARAMETER);
}

TEST_CASE("config validation and full runs through the C boundary") {
    const fs::path dir = scratch_dir();
    const fs::path cfg_path = dir / "fig2_small.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
            "scenario": "fig2",
            "seed": 4,
            "output_dir": ")" << (dir / "run_a").string() << R"(",
            "response": {"n_omega": 121}
        })";
    }

    REQUIRE(phonring_validate_config(cfg_path.string().c_str(), nullptr) ==
            PHONRING_OK);
    REQUIRE(phonring_validate_config(cfg_path.string().c_str(), "fig2") ==
            PHONRING_OK);
    CHECK(phonring_validate_config(cfg_path.string().c_str(), "fig4") ==
          PHONRING_ERR_CONFIG);
    CHECK(phonring_validate_config((dir / "missing.json").string().c_str(),
                                   nullptr) == PHONRING_ERR_IO);

    char** files = nullptr;
    REQUIRE(phonring_run_config(cfg_path.string().c_str(), nullptr, &files) ==
            PHONRING_OK);
    REQUIRE(files != nullptr);
    std::size_t n_files = 0;
    while (files[n_files]) ++n_files;
    REQUIRE(n_files > 0);
    const std::string manifest = files[n_files - 1];
    CHECK(manifest.find("manifest.json") != std::string::npos);
    for (std::size_t i = 0; i < n_files; ++i) CHECK(fs::exists(files[i]));
    phonring_files_free(files);

    // Same seed into a second directory: every file byte-identical.
    phonring_run_overrides o{};
    const std::string run_b = (dir / "run_b").string();
    o.output_dir = run_b.c_str();
    char** files_b = nullptr;
    REQUIRE(phonring_run_config(cfg_path.string().c_str(), &o, &files_b) ==
            PHONRING_OK);
    std::size_t n_b = 0;
    while (files_b[n_b]) ++n_b;
    REQUIRE(n_b == n_files);
    for (std::size_t i = 0; i < n_b; ++i) {
        const fs::path pa = fs::path(dir / "run_a") / fs::path(files_b[i]).filename();
        CHECK(slurp(pa) == slurp(files_b[i]));
    }
    phonring_files_free(files_b);

    // A changed seed must change the data.
    phonring_run_overrides o2{};
    const std::string run_c = (dir / "run_c").string();
    o2.output_dir = run_c.c_str();
    o2.has_seed = 1;
    o2.seed = 99;
    char** files_c = nullptr;
    REQUIRE(phonring_run_config(cfg_path.string().c_str(), &o2, &files_c) ==
            PHONRING_OK);
    phonring_files_free(files_c);
    // fig2 is deterministic given parameters, so only the manifest seed moves.
    const std::string ma = slurp(fs::path(dir / "run_a") / "manifest.json");
    const std::string mc = slurp(fs::path(run_c) / "manifest.json");
    CHECK(ma != mc);
}

TEST_CASE("invalid model parameters are rejected with codes") {
    phonring_model_params p = small_ring(2e-4);
    p.n_pairs = 0;
    phonring_model* model = nullptr;
    CHECK(phonring_model_create(&p, &model) == PHONRING_ERR_PARAMETER);
    CHECK(model == nullptr);

    p = small_ring(-1.0);  // negative damping
    CHECK(phonring_model_create(&p, &model) == PHONRING_ERR_PARAMETER);

    p = small_ring(2e-4);
    p.disorder_strength = -0.5;
    CHECK(phonring_model_create(&p, &model) == PHONRING_ERR_PARAMETER);
}
