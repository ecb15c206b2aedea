#ifndef PHONRING_H
#define PHONRING_H

/* C interface to the ring phonon transport library. All functions return a
 * status code; on failure phonring_last_error() describes what went wrong for
 * the calling thread. Handles are opaque and must be released with the
 * matching _free call. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum phonring_status {
    PHONRING_OK = 0,
    PHONRING_ERR_PARAMETER = 1,  /* invalid argument value */
    PHONRING_ERR_SINGULAR = 2,   /* linear algebra could not proceed */
    PHONRING_ERR_FIT = 3,        /* least-squares fit rejected its input */
    PHONRING_ERR_RANGE = 4,      /* requested value outside tabulated range */
    PHONRING_ERR_CONFIG = 5,     /* config file invalid or inconsistent */
    PHONRING_ERR_STATISTICS = 6, /* ensemble too small or too degenerate */
    PHONRING_ERR_IO = 7,         /* file could not be read or written */
    PHONRING_ERR_INTERNAL = 8    /* unexpected failure */
} phonring_status;

const char* phonring_version(void);

/* Message for the most recent failure on this thread; empty after success. */
const char* phonring_last_error(void);

/* ------------------------------------------------------------------ model */

typedef struct phonring_model phonring_model;
typedef struct phonring_response phonring_response;

enum {
    PHONRING_PHASE_MATCH_EQ13 = 0,       /* finite-width profile */
    PHONRING_PHASE_MATCH_LORENTZIAN = 1  /* idealized profile */
};

typedef struct phonring_model_params {
    /* mode grid: n_pairs modes per branch at q_offset + j*spacing, mirrored */
    int n_pairs;
    double mode_spacing;
    double sound_speed;
    double q_offset;

    /* intrinsic phonon linewidth (FWHM) */
    double gamma;

    /* pump; coupling_speed = 0 disables the optical path entirely */
    double detuning;
    double kappa;
    double coupling_speed;
    double q_center;
    double optical_spatial_width;
    int phase_match; /* PHONRING_PHASE_MATCH_* */

    /* disorder; strength = 0 disables sampling */
    double disorder_strength;
    uint64_t seed;
} phonring_model_params;

phonring_status phonring_model_create(const phonring_model_params* params,
                                      phonring_model** out);
void phonring_model_free(phonring_model* model);

/* Total number of modes (2 * n_pairs), or -1 on a null handle. */
int phonring_model_mode_count(const phonring_model* model);

/* Fill out[0..n) with the ascending wavevectors / their frequencies.
 * n must equal the mode count. */
phonring_status phonring_model_wavevectors(const phonring_model* model,
                                           double* out, size_t n);
phonring_status phonring_model_frequencies(const phonring_model* model,
                                           double* out, size_t n);

/* Phase-match profile value at wavevector q. */
phonring_status phonring_model_phase_match(const phonring_model* model, double q,
                                           double* re, double* im);

/* One sampled scattering matrix, row-major; re/im each hold n = count^2
 * doubles. Deterministic in (model seed, realization). */
phonring_status phonring_model_scattering(const phonring_model* model,
                                          uint64_t realization, double* re,
                                          double* im, size_t n);

/* ------------------------------------------------------------------ solve */

enum {
    PHONRING_METHOD_AUTO = 0,
    PHONRING_METHOD_DIRECT = 1,
    PHONRING_METHOD_SPECTRAL = 2
};

typedef struct phonring_solve_params {
    const double* omega; /* strictly increasing frequency grid */
    size_t n_omega;
    int n_realizations;       /* >= 1; ignored without disorder */
    const int* tracked_modes; /* mode indices to keep, NULL = all */
    size_t n_tracked;
    int method; /* PHONRING_METHOD_* */
} phonring_solve_params;

/* Ensemble-averaged diagonal susceptibilities on the frequency grid. */
phonring_status phonring_solve(const phonring_model* model,
                               const phonring_solve_params* params,
                               phonring_response** out);
void phonring_response_free(phonring_response* response);

size_t phonring_response_n_omega(const phonring_response* response);
size_t phonring_response_n_modes(const phonring_response* response);
int phonring_response_excluded(const phonring_response* response);

/* Mode index stored in the given tracked slot. */
phonring_status phonring_response_mode_index(const phonring_response* response,
                                             size_t slot, int* out);

/* Mean susceptibility of one tracked slot across the grid; re/im each hold
 * n = n_omega doubles. */
phonring_status phonring_response_diagonal(const phonring_response* response,
                                           size_t slot, double* re, double* im,
                                           size_t n);

/* CSV with columns omega, mode_q, re_chi, im_chi, abs2_chi. */
phonring_status phonring_response_write_csv(const phonring_response* response,
                                            const char* path);

/* Lorentzian fit of |chi|^2 for one tracked slot; gamma_hat is the FWHM. */
phonring_status phonring_response_fit_linewidth(const phonring_response* response,
                                                size_t slot, double* omega_hat,
                                                double* gamma_hat,
                                                double* residual);

/* ----------------------------------------------------------- closed forms */

/* Pump-induced damping 4*alpha^2/kappa of the phase-matched mode. */
phonring_status phonring_optical_damping(double alpha, double kappa, double* out);

/* Linewidths of a degenerate counter-propagating pair coupled at rate g when
 * only the forward mode is pump-damped by gamma_opt. */
phonring_status phonring_pair_linewidths(double gamma_in, double gamma_opt,
                                         double coupling, double* cw, double* ccw);

/* Predicted normalized diffusion 1 - (x/2)/(1 + x*pi*rho_gamma). */
phonring_status phonring_diffusion_ratio(double x, double rho_gamma, double* out);
phonring_status phonring_diffusion_ratio_limit(double rho_gamma, double* out);

/* Ratio of pump-on to pump-off linewidth; subtracted != 0 removes the
 * intrinsic linewidth from both first. */
phonring_status phonring_normalized_diffusion(double gamma_on, double gamma_off,
                                              double gamma_intrinsic,
                                              int subtracted, double* out);

/* Band-center disorder self-energy 2*pi*i*rho*strength^2. */
phonring_status phonring_sigma_disorder(double rho, double strength, double* re,
                                        double* im);

/* Pump correction to the disorder self-energy at the band center, given the
 * rescaled power x = c^2 qc^2 / (gamma kappa). */
phonring_status phonring_sigma_pump_center(double x, double gamma, double kappa,
                                           double rho, double strength,
                                           double* re, double* im);

/* Pump-broadened optical linewidth at the phase-matched center. */
phonring_status phonring_kappa_effective_center(double kappa, double rho,
                                                double coupling_speed,
                                                double q_center, double* out);

/* Weighted fit of y = 1 - a*x/(1 + b*x). rho_gamma_hint > 0 selects the
 * standard starting point (1/2, pi*hint). Any output pointer may be NULL. */
phonring_status phonring_fit_saturating(const double* x, const double* y,
                                        const double* sigma, size_t n,
                                        double rho_gamma_hint, double* a,
                                        double* b, double* a_err, double* b_err);

/* --------------------------------------------------------------- scenarios */

/* Parse + validate a config file; scenario may be NULL or one of
 * "fig2", "fig4", "custom". */
phonring_status phonring_validate_config(const char* path, const char* scenario);

typedef struct phonring_run_overrides {
    const char* scenario;    /* NULL = take from config */
    const char* output_dir;  /* NULL = config value */
    const char* convention;  /* "raw" / "subtracted", NULL = config value */
    const char* phase_match; /* "eq13" / "lorentzian", NULL = config value */
    int has_seed;
    uint64_t seed;
    int has_realizations;
    int realizations;
} phonring_run_overrides;

/* Run a config end to end. On success *files_out receives a NULL-terminated
 * array of the paths written (manifest last); free it with
 * phonring_files_free. files_out may be NULL. overrides may be NULL. */
phonring_status phonring_run_config(const char* path,
                                    const phonring_run_overrides* overrides,
                                    char*** files_out);
void phonring_files_free(char** files);

#ifdef __cplusplus
}
#endif

#endif /* PHONRING_H */
