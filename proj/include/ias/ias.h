/*
 * C interface of the interference-assisted superadiabaticity simulator.
 *
 * All objects are opaque handles created by an ias_*_create / ias_* call and
 * released by the matching ias_*_destroy. Functions return an ias_status; on
 * failure ias_last_error() describes the problem (per thread).
 *
 * Units: hbar = 1, energies in units of the LZ gap g unless stated otherwise.
 */
#ifndef IAS_IAS_H
#define IAS_IAS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(IAS_BUILDING_LIBRARY)
#    define IAS_API __declspec(dllexport)
#  else
#    define IAS_API __declspec(dllimport)
#  endif
#else
#  define IAS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ias_status {
  IAS_OK = 0,
  IAS_ERROR_INVALID_ARGUMENT = 1,
  IAS_ERROR_DIMENSION = 2,
  IAS_ERROR_NOT_HERMITIAN = 3,
  IAS_ERROR_NUMERICAL = 4,
  IAS_ERROR_PROPAGATION = 5,
  IAS_ERROR_IO = 6,
  IAS_ERROR_INTERNAL = 7
} ias_status;

typedef enum ias_spectator_kind { IAS_SPECTATOR_QUBIT = 0, IAS_SPECTATOR_OSCILLATOR = 1 } ias_spectator_kind;

typedef enum ias_spectator_init {
  IAS_INIT_GROUND = 0,      /* |down> for the qubit, vacuum for the oscillator */
  IAS_INIT_EXCITED = 1,
  IAS_INIT_TAU_X_PLUS = 2,  /* qubit only */
  IAS_INIT_TAU_X_MINUS = 3, /* qubit only */
  IAS_INIT_FOCK = 4         /* uses fock_level */
} ias_spectator_init;

typedef enum ias_coupling_axis { IAS_COUPLING_X = 0, IAS_COUPLING_Y = 1 } ias_coupling_axis;

typedef enum ias_regime { IAS_REGIME_I = 1, IAS_REGIME_II = 2, IAS_REGIME_III = 3 } ias_regime;

typedef enum ias_channel { IAS_CHANNEL_DECAY = 0, IAS_CHANNEL_DEPHASING = 1 } ias_channel;

typedef enum ias_point_status { IAS_POINT_OK = 0, IAS_POINT_MONOTONE = 1, IAS_POINT_FAILED = 2 } ias_point_status;

typedef struct ias_model_params {
  double g;
  double epsilon;
  double x0;
  double omega_c;
  int spectator_kind;  /* ias_spectator_kind */
  size_t truncation;   /* 2 for the qubit */
  int spectator_init;  /* ias_spectator_init */
  size_t fock_level;
  int coupling_axis;   /* ias_coupling_axis */
} ias_model_params;

typedef struct ias_model ias_model;
typedef struct ias_spectrum ias_spectrum;
typedef struct ias_trajectory ias_trajectory;
typedef struct ias_sweep_result ias_sweep_result;

IAS_API const char* ias_version(void);
IAS_API const char* ias_last_error(void);
/* Time at which the last propagation failure occurred (NaN if none). */
IAS_API double ias_last_failure_time(void);

/* ---- model ---------------------------------------------------------------- */

/* g = 1, epsilon = 2, x0 = omega_c = 0, qubit spectator in |down>. */
IAS_API void ias_model_params_default(ias_model_params* params);
IAS_API ias_status ias_model_create(const ias_model_params* params, ias_model** out);
IAS_API void ias_model_destroy(ias_model* model);
IAS_API ias_status ias_model_get_params(const ias_model* model, ias_model_params* out);
IAS_API size_t ias_model_dimension(const ias_model* model);
/* Row-major dim x dim complex matrix as interleaved (re, im) pairs. */
IAS_API ias_status ias_model_hamiltonian(const ias_model* model, double t, double* out, size_t capacity);
IAS_API ias_status ias_model_eigenvalues(const ias_model* model, double t, double* out, size_t capacity);

/* ---- spectrum ------------------------------------------------------------- */

typedef struct ias_regime_info {
  double delta;
  double delta_c1;
  double delta_c2;      /* +inf when no off-centre closing was found */
  int delta_c2_found;
  int regime;           /* ias_regime */
} ias_regime_info;

IAS_API ias_status ias_model_delta(const ias_model* model, double* out);
IAS_API ias_status ias_classify(const ias_model* model, ias_regime_info* out);
IAS_API ias_status ias_minimal_gap(const ias_model* model, double t_lo, double t_hi, size_t samples,
                                   double* gap, double* t_at);
IAS_API ias_status ias_adiabaticity_ratio(const ias_model* model, double t, double* out);

IAS_API ias_status ias_spectrum_scan(const ias_model* model, double t0, double t1, size_t samples,
                                     ias_spectrum** out);
IAS_API void ias_spectrum_destroy(ias_spectrum* spectrum);
IAS_API size_t ias_spectrum_samples(const ias_spectrum* spectrum);
IAS_API size_t ias_spectrum_branches(const ias_spectrum* spectrum);
IAS_API ias_status ias_spectrum_time(const ias_spectrum* spectrum, size_t sample, double* out);
IAS_API ias_status ias_spectrum_energy(const ias_spectrum* spectrum, size_t sample, size_t branch, double* out);
/* `reference` (nullable) adds E0_k columns, e.g. the x0 = 0 branches. */
IAS_API ias_status ias_spectrum_write_csv(const ias_spectrum* spectrum, const ias_spectrum* reference,
                                          const char* path);

/* ---- dynamics ------------------------------------------------------------- */

typedef struct ias_evolve_options {
  double t_start;
  double t_end;
  size_t samples;
  double tol;
  int lindblad;   /* 0: Schroedinger equation; 1: master equation */
  double kappa;   /* must be 0 unless lindblad = 1 */
  int channel;    /* ias_channel */
} ias_evolve_options;

typedef struct ias_sample {
  double t;
  double p;
  double purity;
  double renyi;
  double norm_defect;
} ias_sample;

typedef struct ias_tf_result {
  double t_f;
  double p_min;
  double purity;
  int monotone_window;
} ias_tf_result;

/* Protocol window [-10 g/eps, 10 g/eps], 2001 samples, tol 1e-9, unitary. */
IAS_API ias_status ias_evolve_options_default(const ias_model* model, ias_evolve_options* out);
IAS_API ias_status ias_evolve(const ias_model* model, const ias_evolve_options* options, ias_trajectory** out);
IAS_API void ias_trajectory_destroy(ias_trajectory* trajectory);
IAS_API size_t ias_trajectory_size(const ias_trajectory* trajectory);
IAS_API ias_status ias_trajectory_sample(const ias_trajectory* trajectory, size_t index, ias_sample* out);
IAS_API ias_status ias_trajectory_optimize_tf(const ias_trajectory* trajectory, double target, double half_window,
                                              ias_tf_result* out);
IAS_API ias_status ias_trajectory_write_csv(const ias_trajectory* trajectory, const char* path);
IAS_API double ias_lz_infidelity(double g, double epsilon);

/* ---- sweep ---------------------------------------------------------------- */

typedef struct ias_sweep_config {
  ias_model_params base;     /* g, epsilon, spectator and coupling; x0/omega_c ignored */
  const double* x0_over_g;
  size_t n_x0;
  const double* omega_axis;
  size_t n_omega;
  int omega_over_g;          /* 0: omega axis is omega_c / x0; 1: omega_c / g */
  double tol;
  size_t workers;
} ias_sweep_config;

typedef struct ias_sweep_point {
  size_t i;
  size_t j;
  double x0;
  double omega_c;
  double delta;
  double delta_c2;
  int regime;     /* ias_regime */
  double tf_opt;
  double infidelity;
  double purity;
  int status;     /* ias_point_status */
} ias_sweep_point;

/* Invoked once per newly computed point, always from the calling thread. */
typedef void (*ias_sweep_callback)(void* user, const ias_sweep_point* point);

/* Points in `completed` are taken as already computed and not re-evaluated. */
IAS_API ias_status ias_sweep_run(const ias_sweep_config* config, const ias_sweep_point* completed, size_t n_completed,
                                 ias_sweep_callback callback, void* user, ias_sweep_result** out);
IAS_API void ias_sweep_result_destroy(ias_sweep_result* result);
IAS_API size_t ias_sweep_result_count(const ias_sweep_result* result);
IAS_API size_t ias_sweep_result_failed(const ias_sweep_result* result);
IAS_API ias_status ias_sweep_result_point(const ias_sweep_result* result, size_t index, ias_sweep_point* out);
IAS_API ias_status ias_sweep_result_write_csv(const ias_sweep_result* result, const char* path);

/* ---- robustness ----------------------------------------------------------- */

typedef struct ias_robustness_options {
  double rel_sigma;
  size_t samples;
  uint64_t seed;
  int gaussian;   /* 0: uniform in [1 - s, 1 + s]; 1: normal with sigma s */
  double tol;
  size_t workers;
} ias_robustness_options;

typedef struct ias_robustness_stats {
  size_t samples;
  size_t failed;
  double nominal;
  double mean;
  double stddev;
  double min;
  double max;
  double q50;
  double q90;
  double q99;
} ias_robustness_stats;

/* `per_sample` (nullable) receives `samples` infidelities in draw order. */
IAS_API ias_status ias_robustness(const ias_model* model, const ias_robustness_options* options,
                                  ias_robustness_stats* out, double* per_sample);

#ifdef __cplusplus
}
#endif

#endif /* IAS_IAS_H */
