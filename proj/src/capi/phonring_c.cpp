#include "phonring.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "diagrammatics.hpp"
#include "disorder.hpp"
#include "fitting.hpp"
#include "model.hpp"
#include "report.hpp"
#include "scenario.hpp"
#include "single_mode.hpp"
#include "solver.hpp"

namespace {

thread_local std::string t_error;

template <typename F>
phonring_status guarded(F&& body) {
    using namespace phonring;
    try {
        body();
        t_error.clear();
        return PHONRING_OK;
    } catch (const ParameterError& e) {
        t_error = e.what();
        return PHONRING_ERR_PARAMETER;
    } catch (const SingularError& e) {
        t_error = e.what();
        return PHONRING_ERR_SINGULAR;
    } catch (const FitError& e) {
        t_error = e.what();
        return PHONRING_ERR_FIT;
    } catch (const RangeError& e) {
        t_error = e.what();
        return PHONRING_ERR_RANGE;
    } catch (const ConfigError& e) {
        t_error = e.what();
        return PHONRING_ERR_CONFIG;
    } catch (const StatisticsError& e) {
        t_error = e.what();
        return PHONRING_ERR_STATISTICS;
    } catch (const IoError& e) {
        t_error = e.what();
        return PHONRING_ERR_IO;
    } catch (const std::exception& e) {
        t_error = e.what();
        return PHONRING_ERR_INTERNAL;
    } catch (...) {
        t_error = "unknown failure";
        return PHONRING_ERR_INTERNAL;
    }
}

void require(bool ok, const char* message) {
    if (!ok) throw phonring::ParameterError(message);
}

}  // namespace

struct phonring_model {
    phonring::ModeGrid grid;
    phonring::PhononDamping damping;
    phonring::OptoParams opto;
    bool has_pump = false;
    phonring::PhaseMatchModel pm = phonring::PhaseMatchModel::Exact;
    phonring::DisorderConfig disorder;
};

struct phonring_response {
    phonring::ResponseTable table;
    phonring::ModeGrid grid;
};

extern "C" {

const char* phonring_version(void) { return "0.1.0"; }

const char* phonring_last_error(void) { return t_error.c_str(); }

phonring_status phonring_model_create(const phonring_model_params* params,
                                      phonring_model** out) {
    return guarded([&] {
        require(params != nullptr && out != nullptr, "null argument");
        *out = nullptr;
        auto model = std::make_unique<phonring_model>();
        model->grid = phonring::build_mode_grid(params->n_pairs, params->mode_spacing,
                                                params->sound_speed, params->q_offset);
        model->damping.gamma = params->gamma;
        model->damping.validate();
        switch (params->phase_match) {
            case PHONRING_PHASE_MATCH_EQ13:
                model->pm = phonring::PhaseMatchModel::Exact;
                break;
            case PHONRING_PHASE_MATCH_LORENTZIAN:
                model->pm = phonring::PhaseMatchModel::Lorentzian;
                break;
            default:
                throw phonring::ParameterError("phase_match must be 0 or 1");
        }
        model->has_pump = params->coupling_speed != 0.0;
        if (model->has_pump) {
            model->opto.detuning = params->detuning;
            model->opto.kappa = params->kappa;
            model->opto.coupling_speed = params->coupling_speed;
            model->opto.q_center = params->q_center;
            model->opto.optical_spatial_width = params->optical_spatial_width;
            model->opto.phonon_half_width =
                params->gamma / (2.0 * params->sound_speed);
            model->opto.validate();
        }
        model->disorder.strength = params->disorder_strength;
        model->disorder.seed = params->seed;
        model->disorder.validate();
        *out = model.release();
    });
}

void phonring_model_free(phonring_model* model) { delete model; }

int phonring_model_mode_count(const phonring_model* model) {
    return model ? model->grid.size() : -1;
}

static phonring_status copy_grid_array(const phonring_model* model,
                                       const std::vector<double>& values,
                                       double* out, size_t n) {
    return guarded([&] {
        require(model != nullptr && out != nullptr, "null argument");
        require(n == values.size(), "buffer size must equal the mode count");
        std::memcpy(out, values.data(), n * sizeof(double));
    });
}

phonring_status phonring_model_wavevectors(const phonring_model* model, double* out,
                                           size_t n) {
    if (!model) return guarded([] { require(false, "null argument"); });
    return copy_grid_array(model, model->grid.wavevectors, out, n);
}

phonring_status phonring_model_frequencies(const phonring_model* model, double* out,
                                           size_t n) {
    if (!model) return guarded([] { require(false, "null argument"); });
    return copy_grid_array(model, model->grid.frequencies, out, n);
}

phonring_status phonring_model_phase_match(const phonring_model* model, double q,
                                           double* re, double* im) {
    return guarded([&] {
        require(model != nullptr && re != nullptr && im != nullptr, "null argument");
        require(model->has_pump, "model has no pump parameters");
        const phonring::Complex f = phonring::phase_match(q, model->opto);
        *re = f.real();
        *im = f.imag();
    });
}

phonring_status phonring_model_scattering(const phonring_model* model,
                                          uint64_t realization, double* re,
                                          double* im, size_t n) {
    return guarded([&] {
        require(model != nullptr && re != nullptr && im != nullptr, "null argument");
        const size_t count = static_cast<size_t>(model->grid.size());
        require(n == count * count, "buffer size must equal mode count squared");
        const auto sample =
            phonring::sample_scattering(model->grid, model->disorder, realization);
        for (size_t r = 0; r < count; ++r)
            for (size_t c = 0; c < count; ++c) {
                const phonring::Complex v = sample.matrix(static_cast<Eigen::Index>(r),
                                                          static_cast<Eigen::Index>(c));
                re[r * count + c] = v.real();
                im[r * count + c] = v.imag();
            }
    });
}

phonring_status phonring_solve(const phonring_model* model,
                               const phonring_solve_params* params,
                               phonring_response** out) {
    return guarded([&] {
        require(model != nullptr && params != nullptr && out != nullptr,
                "null argument");
        require(params->omega != nullptr && params->n_omega > 0,
                "omega grid must not be empty");
        *out = nullptr;

        phonring::SolveOptions opts;
        opts.n_realizations = params->n_realizations;
        switch (params->method) {
            case PHONRING_METHOD_AUTO:
                opts.method = phonring::SolveMethod::Auto;
                break;
            case PHONRING_METHOD_DIRECT:
                opts.method = phonring::SolveMethod::Direct;
                break;
            case PHONRING_METHOD_SPECTRAL:
                opts.method = phonring::SolveMethod::Spectral;
                break;
            default:
                throw phonring::ParameterError("method must be 0, 1 or 2");
        }
        if (params->tracked_modes != nullptr)
            opts.tracked_modes.assign(params->tracked_modes,
                                      params->tracked_modes + params->n_tracked);

        const phonring::DisorderSource source =
            model->disorder.strength > 0.0
                ? phonring::DisorderSource::sampled(model->disorder)
                : phonring::DisorderSource::none();
        const std::span<const double> omega(params->omega, params->n_omega);

        auto response = std::make_unique<phonring_response>();
        response->table = phonring::solve_response(
            model->grid, model->damping, model->has_pump ? &model->opto : nullptr,
            model->pm, source, omega, opts);
        response->grid = model->grid;
        *out = response.release();
    });
}

void phonring_response_free(phonring_response* response) { delete response; }

size_t phonring_response_n_omega(const phonring_response* response) {
    return response ? response->table.omega.size() : 0;
}

size_t phonring_response_n_modes(const phonring_response* response) {
    return response ? response->table.modes.size() : 0;
}

int phonring_response_excluded(const phonring_response* response) {
    return response ? response->table.n_excluded : -1;
}

phonring_status phonring_response_mode_index(const phonring_response* response,
                                             size_t slot, int* out) {
    return guarded([&] {
        require(response != nullptr && out != nullptr, "null argument");
        require(slot < response->table.modes.size(), "tracked slot out of range");
        *out = response->table.modes[slot];
    });
}

phonring_status phonring_response_diagonal(const phonring_response* response,
                                           size_t slot, double* re, double* im,
                                           size_t n) {
    return guarded([&] {
        require(response != nullptr && re != nullptr && im != nullptr,
                "null argument");
        require(slot < response->table.modes.size(), "tracked slot out of range");
        require(n == response->table.omega.size(),
                "buffer size must equal the frequency count");
        for (size_t w = 0; w < n; ++w) {
            const phonring::Complex v = response->table.diagonal(
                static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(slot));
            re[w] = v.real();
            im[w] = v.imag();
        }
    });
}

phonring_status phonring_response_write_csv(const phonring_response* response,
                                            const char* path) {
    return guarded([&] {
        require(response != nullptr && path != nullptr, "null argument");
        phonring::write_response_csv(path, response->table, response->grid);
    });
}

phonring_status phonring_response_fit_linewidth(const phonring_response* response,
                                                size_t slot, double* omega_hat,
                                                double* gamma_hat,
                                                double* residual) {
    return guarded([&] {
        require(response != nullptr, "null argument");
        require(slot < response->table.modes.size(), "tracked slot out of range");
        std::vector<phonring::Complex> chi(response->table.omega.size());
        for (size_t w = 0; w < chi.size(); ++w)
            chi[w] = response->table.diagonal(static_cast<Eigen::Index>(w),
                                              static_cast<Eigen::Index>(slot));
        const double mode_q =
            response->grid
                .wavevectors[static_cast<size_t>(response->table.modes[slot])];
        const phonring::LinewidthEstimate est = phonring::extract_linewidth(
            response->table.omega, chi, mode_q, response->table.n_excluded);
        if (omega_hat) *omega_hat = est.omega_hat;
        if (gamma_hat) *gamma_hat = est.gamma_hat;
        if (residual) *residual = est.residual;
    });
}

phonring_status phonring_optical_damping(double alpha, double kappa, double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = phonring::optical_damping(alpha, kappa);
    });
}

phonring_status phonring_pair_linewidths(double gamma_in, double gamma_opt,
                                         double coupling, double* cw, double* ccw) {
    return guarded([&] {
        require(cw != nullptr && ccw != nullptr, "null argument");
        const phonring::PairLinewidths w =
            phonring::pair_linewidths(gamma_in, gamma_opt, coupling);
        *cw = w.cw;
        *ccw = w.ccw;
    });
}

phonring_status phonring_diffusion_ratio(double x, double rho_gamma, double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = phonring::diffusion_ratio(x, rho_gamma);
    });
}

phonring_status phonring_diffusion_ratio_limit(double rho_gamma, double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = phonring::diffusion_ratio_limit(rho_gamma);
    });
}

phonring_status phonring_normalized_diffusion(double gamma_on, double gamma_off,
                                              double gamma_intrinsic, int subtracted,
                                              double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = phonring::normalized_diffusion(
            gamma_on, gamma_off, gamma_intrinsic,
            subtracted ? phonring::DiffusionConvention::Subtracted
                       : phonring::DiffusionConvention::Raw);
    });
}

phonring_status phonring_sigma_disorder(double rho, double strength, double* re,
                                        double* im) {
    return guarded([&] {
        require(re != nullptr && im != nullptr, "null argument");
        require(rho > 0.0, "rho must be > 0");
        require(strength >= 0.0, "strength must be >= 0");
        const phonring::Complex s = phonring::sigma_disorder_continuum(rho, strength);
        *re = s.real();
        *im = s.imag();
    });
}

phonring_status phonring_sigma_pump_center(double x, double gamma, double kappa,
                                           double rho, double strength, double* re,
                                           double* im) {
    return guarded([&] {
        require(re != nullptr && im != nullptr, "null argument");
        require(x >= 0.0, "x must be >= 0");
        require(gamma > 0.0, "gamma must be > 0");
        require(kappa > 0.0, "kappa must be > 0");
        require(rho > 0.0, "rho must be > 0");
        require(strength >= 0.0, "strength must be >= 0");
        if (x == 0.0) {
            *re = 0.0;
            *im = 0.0;
            return;
        }
        // x fixes c^2 qc^2 = x gamma kappa, so qc never enters on its own.
        const double norm2 = x * gamma * kappa * rho * std::numbers::pi * gamma / 2.0;
        const double kappa_tilde =
            kappa * (1.0 + x * std::numbers::pi * rho * gamma);
        const phonring::Complex eta(0.0, 2.0 * norm2 / kappa_tilde);
        const phonring::Complex s = phonring::sigma_pump(
            eta, strength, phonring::Complex(-1.0 / (gamma * gamma), 0.0));
        *re = s.real();
        *im = s.imag();
    });
}

phonring_status phonring_kappa_effective_center(double kappa, double rho,
                                                double coupling_speed,
                                                double q_center, double* out) {
    return guarded([&] {
        require(out != nullptr, "null argument");
        *out = phonring::kappa_effective_center(kappa, rho, coupling_speed, q_center);
    });
}

phonring_status phonring_fit_saturating(const double* x, const double* y,
                                        const double* sigma, size_t n,
                                        double rho_gamma_hint, double* a, double* b,
                                        double* a_err, double* b_err) {
    return guarded([&] {
        require(x != nullptr && y != nullptr && sigma != nullptr, "null argument");
        const phonring::SaturatingFit fit = phonring::fit_saturating(
            std::span<const double>(x, n), std::span<const double>(y, n),
            std::span<const double>(sigma, n), rho_gamma_hint);
        if (a) *a = fit.a;
        if (b) *b = fit.b;
        if (a_err) *a_err = fit.a_err;
        if (b_err) *b_err = fit.b_err;
    });
}

phonring_status phonring_validate_config(const char* path, const char* scenario) {
    return guarded([&] {
        require(path != nullptr, "null argument");
        phonring::load_config(path, scenario ? scenario : "");
    });
}

phonring_status phonring_run_config(const char* path,
                                    const phonring_run_overrides* overrides,
                                    char*** files_out) {
    return guarded([&] {
        require(path != nullptr, "null argument");
        if (files_out) *files_out = nullptr;

        phonring::ScenarioConfig cfg = phonring::load_config(
            path, overrides && overrides->scenario ? overrides->scenario : "");

        if (overrides) {
            phonring::CliOverrides o;
            std::uint64_t seed = overrides->seed;
            int realizations = overrides->realizations;
            std::string output_dir, convention_token, phase_match_token;
            phonring::DiffusionConvention convention{};
            phonring::PhaseMatchModel pm{};
            if (overrides->has_seed) o.seed = &seed;
            if (overrides->has_realizations) o.n_realizations = &realizations;
            if (overrides->output_dir) {
                output_dir = overrides->output_dir;
                o.output_dir = &output_dir;
            }
            if (overrides->convention) {
                convention = phonring::convention_from_token(overrides->convention);
                o.convention = &convention;
            }
            if (overrides->phase_match) {
                pm = phonring::phase_match_from_token(overrides->phase_match);
                o.phase_match = &pm;
            }
            phonring::apply_overrides(cfg, o);
        }

        const std::vector<std::string> files = phonring::run_scenario(cfg);
        if (!files_out) return;
        char** list =
            static_cast<char**>(std::calloc(files.size() + 1, sizeof(char*)));
        if (!list) throw std::bad_alloc();
        for (size_t i = 0; i < files.size(); ++i) {
            list[i] = static_cast<char*>(std::malloc(files[i].size() + 1));
            if (!list[i]) {
                phonring_files_free(list);
                throw std::bad_alloc();
            }
            std::memcpy(list[i], files[i].c_str(), files[i].size() + 1);
        }
        *files_out = list;
    });
}

void phonring_files_free(char** files) {
    if (!files) return;
    for (char** f = files; *f; ++f) std::free(*f);
    std::free(files);
}

}  // extern "C"
