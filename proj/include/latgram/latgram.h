/*
 * latgram: controllability Gramians and minimum-energy control on
 * d-dimensional lattice networks.
 *
 * C interface. Node indices are passed as flat int arrays, d coordinates per
 * node, so a list of k nodes is an int[k * d]. Matrices are row-major
 * double arrays. Every function returning lg_status reports failures through
 * the status code; lg_last_error() returns a message describing the most
 * recent failure on the calling thread.
 *
 * All functions are safe to call concurrently. Handles are immutable after
 * creation and may be shared between threads.
 */
#ifndef LATGRAM_H
#define LATGRAM_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(LATGRAM_BUILDING_LIBRARY)
#    define LG_API __declspec(dllexport)
#  else
#    define LG_API __declspec(dllimport)
#  endif
#else
#  define LG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lg_status {
  LG_OK = 0,
  LG_ERR_INVALID_ARGUMENT = 1,
  LG_ERR_RANGE = 2,            /* out-of-bounds index or unrepresentable value */
  LG_ERR_NUMERICAL_DOMAIN = 3, /* non-finite intermediate */
  LG_ERR_ACCURACY = 4,         /* quadrature did not reach its tolerance */
  LG_ERR_STIFFNESS = 5,        /* ODE step size underflow */
  LG_ERR_SINGULAR_GRAMIAN = 6, /* output Gramian not invertible */
  LG_ERR_NO_MEMORY = 7,
  LG_ERR_INTERNAL = 8
} lg_status;

typedef struct lg_params {
  int d;    /* lattice dimension, >= 1 */
  double p; /* self-loop magnitude, > 0 */
  double s; /* edge weight, > 0 */
} lg_params;

/* Quadrature tolerances. Passing NULL wherever a tolerance pointer is
 * accepted selects the defaults (abs 1e-12, rel 1e-10). */
typedef struct lg_tolerances {
  double abs_tol;
  double rel_tol;
} lg_tolerances;

LG_API const char* lg_version(void);
LG_API const char* lg_status_string(lg_status status);
LG_API const char* lg_last_error(void);

/* For lg_status == LG_ERR_RANGE raised by lg_single_target_energy and
 * LG_ERR_ACCURACY: the log energy / best estimate attached to the last error
 * on this thread. Returns 0 if none was attached. */
LG_API int lg_last_error_value(double* out);

/* ---- Modified Bessel functions of the first kind ---------------------- */

LG_API lg_status lg_bessel_i(int n, double z, double* out);
LG_API lg_status lg_bessel_i_scaled(int n, double z, double* out);
/* out receives n_max + 1 values e^{-z} I_k(z), k = 0..n_max. */
LG_API lg_status lg_bessel_i_scaled_sequence(int n_max, double z, double* out);

/* ---- Infinite lattice -------------------------------------------------- */

LG_API lg_status lg_integrand(const lg_params* params, const int* i, const int* j,
                              const int* drivers, size_t num_drivers, double tau,
                              double* out);

LG_API lg_status lg_infinite_entry(const lg_params* params, const int* i, const int* j,
                                   const int* drivers, size_t num_drivers, double t,
                                   const lg_tolerances* tol, double* out);

/* t -> infinity; requires p > 2ds. */
LG_API lg_status lg_infinite_entry_limit(const lg_params* params, const int* i,
                                         const int* j, const int* drivers,
                                         size_t num_drivers, const lg_tolerances* tol,
                                         double* out);

/* Batch of entries (pairs_i[k], pairs_j[k]) evaluated on `threads` workers
 * (0 = hardware concurrency). out has num_pairs values. */
LG_API lg_status lg_infinite_entries(const lg_params* params, const int* pairs_i,
                                     const int* pairs_j, size_t num_pairs,
                                     const int* drivers, size_t num_drivers, double t,
                                     const lg_tolerances* tol, unsigned threads,
                                     double* out);

/* q x q output Gramian (row-major). *quadratures (may be NULL) receives the
 * number of unique entries integrated, q(q+1)/2. */
LG_API lg_status lg_output_gramian_infinite(const lg_params* params, const int* targets,
                                            size_t num_targets, const int* drivers,
                                            size_t num_drivers, double t,
                                            const lg_tolerances* tol, unsigned threads,
                                            double* out, size_t* quadratures);

/* 1 / W_ii(t) for one driver at the origin. On LG_ERR_RANGE the log energy
 * is available through lg_last_error_value. */
LG_API lg_status lg_single_target_energy(const lg_params* params, const int* i, double t,
                                         const lg_tolerances* tol, double* energy);

/* ---- Finite lattice ----------------------------------------------------- */

typedef struct lg_lattice lg_lattice;

/* extents: d positive odd integers. num_drivers may be 0 (the lattice can
 * still be inspected, but Gramians need drivers). */
LG_API lg_status lg_lattice_create(const lg_params* params, const int* extents,
                                   const int* drivers, size_t num_drivers,
                                   const int* targets, size_t num_targets,
                                   lg_lattice** out);
LG_API void lg_lattice_destroy(lg_lattice* lattice);

LG_API int lg_lattice_dim(const lg_lattice* lattice);
LG_API size_t lg_lattice_num_nodes(const lg_lattice* lattice);
LG_API size_t lg_lattice_num_drivers(const lg_lattice* lattice);
LG_API size_t lg_lattice_num_targets(const lg_lattice* lattice);
LG_API lg_status lg_lattice_params(const lg_lattice* lattice, lg_params* out);
LG_API lg_status lg_lattice_flat_index(const lg_lattice* lattice, const int* i,
                                       size_t* out);
/* Writes 1 to *out when the targets are output controllable, else 0. */
LG_API lg_status lg_lattice_output_controllable(const lg_lattice* lattice, int* out);
/* n x n dynamics matrix, row-major. */
LG_API lg_status lg_lattice_system_matrix(const lg_lattice* lattice, double* out);

typedef enum lg_gramian_method {
  LG_GRAMIAN_SPECTRAL = 0, /* eigendecomposition closed form */
  LG_GRAMIAN_ODE = 1       /* Dormand-Prince integration of the Lyapunov ODE */
} lg_gramian_method;

typedef struct lg_finite_gramian lg_finite_gramian;

/* ode_tol is used by LG_GRAMIAN_ODE only; <= 0 selects 1e-11. */
LG_API lg_status lg_finite_gramian_compute(const lg_lattice* lattice, double t,
                                           lg_gramian_method method, double ode_tol,
                                           lg_finite_gramian** out);
LG_API void lg_finite_gramian_destroy(lg_finite_gramian* gramian);

LG_API size_t lg_finite_gramian_size(const lg_finite_gramian* gramian);
LG_API double lg_finite_gramian_horizon(const lg_finite_gramian* gramian);
/* Distinct entries produced (n(n+1)/2); for the ODE method this is the number
 * of scalar equations integrated. */
LG_API size_t lg_finite_gramian_unique_entries(const lg_finite_gramian* gramian);
LG_API size_t lg_finite_gramian_rhs_evaluations(const lg_finite_gramian* gramian);
LG_API lg_status lg_finite_gramian_entry(const lg_finite_gramian* gramian, const int* i,
                                         const int* j, double* out);
/* C W C^T for the lattice's targets, q x q row-major. */
LG_API lg_status lg_finite_gramian_output(const lg_finite_gramian* gramian, double* out);
/* Full n x n matrix, row-major. */
LG_API lg_status lg_finite_gramian_matrix(const lg_finite_gramian* gramian, double* out);

/* Output Gramian C W(t) C^T of a lattice by the spectral form, without
 * materializing the n x n Gramian. */
LG_API lg_status lg_finite_output_gramian(const lg_lattice* lattice, double t,
                                          double* out);

/* Per-pair comparison of a finite Gramian against a reference: the infinite
 * lattice with the same parameters, drivers and horizon when `reference` is
 * NULL, otherwise another finite Gramian of the same lattice. Any output
 * pointer may be NULL. max_abs / max_rel receive the maxima. */
LG_API lg_status lg_compare(const lg_finite_gramian* gramian,
                            const lg_finite_gramian* reference, const int* pairs_i,
                            const int* pairs_j, size_t num_pairs,
                            const lg_tolerances* tol, unsigned threads,
                            double* finite_values, double* reference_values,
                            double* abs_error, double* rel_error, double* max_abs,
                            double* max_rel);

/* ---- Energy ------------------------------------------------------------- */

LG_API lg_status lg_min_energy(const double* b, const double* output_gramian, size_t q,
                               double* out);

/* eigenvalues ascending; contributions (b^T z_i)^2 / mu_i. Array outputs may
 * be NULL. */
LG_API lg_status lg_energy_report(const double* b, const double* output_gramian,
                                  size_t q, double* energy, double* eigenvalues,
                                  double* contributions);

/* Eigenvalues (ascending) of a symmetric q x q matrix. Never fails on
 * singular input, so mu_min stays available where the energy does not. */
LG_API lg_status lg_symmetric_eigenvalues(const double* matrix, size_t q, double* out);
/* ---- Control synthesis -------------------------------------------------- */

typedef struct lg_controller lg_controller;

/* Minimum-energy controller for a lattice's drivers and targets. x0 has n
 * entries (NULL = zero state), y_f has q entries and output_gramian is the
 * q x q output Gramian at t_f, from either the finite or the infinite lattice. */
LG_API lg_status lg_controller_create(const lg_lattice* lattice, const double* x0,
                                      const double* y_f, double t_f,
                                      const double* output_gramian, lg_controller** out);
LG_API void lg_controller_destroy(lg_controller* controller);

/* b = y_f - C e^{A t_f} x0, q entries. */
LG_API lg_status lg_controller_control_action(const lg_controller* controller, double* out);
/* b^T (C W C^T)^{-1} b */
LG_API lg_status lg_controller_predicted_energy(const lg_controller* controller,
                                                double* out);
/* u(t), m entries, 0 <= t <= t_f. */
LG_API lg_status lg_controller_eval(const lg_controller* controller, double t, double* out);

/* RK4 simulation with `steps` steps under the synthesized input. Optional
 * outputs: states (steps + 1) x n and inputs (steps + 1) x m, row-major.
 * realized_energy = int u^T u dt; y_final has q entries. */
LG_API lg_status lg_controller_simulate(const lg_controller* controller, size_t steps,
                                        double* states, double* inputs,
                                        double* realized_energy, double* y_final);

#ifdef __cplusplus
}
#endif

#endif /* LATGRAM_H */
