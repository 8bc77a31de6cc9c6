/* npgraph — Bayesian nonparanormal graphical models.
 *
 * C interface to the estimation pipeline: monotone B-spline transformations
 * with a truncated-normal prior, exact-HMC coefficient sampling, a
 * spike-and-slab Gibbs sampler for the sparse precision matrix, and
 * BIC-based hyperparameter selection.
 *
 * All functions return NPGRAPH_OK (0) on success or a nonzero error code.
 * When a `status` out-parameter is supplied, failures allocate a status
 * object carrying the code and a human-readable message; release it with
 * npgraph_status_free. Passing NULL for `status` is always allowed.
 */
#ifndef NPGRAPH_H
#define NPGRAPH_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined _WIN32
#define NPGRAPH_API __declspec(dllexport)
#else
#define NPGRAPH_API __attribute__((visibility("default")))
#endif

/* Error codes. */
#define NPGRAPH_OK 0
#define NPGRAPH_ERR_INVALID_ARGUMENT 1 /* bad parameters or configuration */
#define NPGRAPH_ERR_DATA 2             /* malformed or out-of-range input data */
#define NPGRAPH_ERR_IO 3               /* file system failure */
#define NPGRAPH_ERR_NUMERIC 4          /* solver or sampler breakdown */
#define NPGRAPH_ERR_INTERNAL 5         /* invariant violation inside the library */

/* Library version string, e.g. "1.0.0". */
NPGRAPH_API const char* npgraph_version(void);

/* Opaque failure details. */
typedef struct npgraph_status npgraph_status;

NPGRAPH_API int npgraph_status_code(const npgraph_status* status);
NPGRAPH_API const char* npgraph_status_message(const npgraph_status* status);
NPGRAPH_API void npgraph_status_free(npgraph_status* status);

/* Runs one subcommand ("simulate", "fit", "study", "select-basis") with a
 * JSON configuration document; result files are written to the output
 * directory named in the configuration. This is the full command-line
 * surface; see the README for the configuration schema. */
NPGRAPH_API int npgraph_run(const char* command, const char* config_json,
                            npgraph_status** status);

/* In-memory estimation on an n_rows x n_cols data matrix (row-major, values
 * in the unit interval). config_json uses the same schema as the "fit"
 * command minus the file paths; it may be NULL or "{}" for defaults, but
 * must contain a "seed" for reproducible runs. */
typedef struct npgraph_fit npgraph_fit;

NPGRAPH_API int npgraph_fit_create(const double* data, int n_rows, int n_cols,
                                   const char* config_json, npgraph_fit** fit,
                                   npgraph_status** status);
NPGRAPH_API void npgraph_fit_free(npgraph_fit* fit);

/* Result queries. Matrices are written row-major into caller-owned buffers
 * of n_cols * n_cols elements. */
NPGRAPH_API int npgraph_fit_dim(const npgraph_fit* fit);
NPGRAPH_API int npgraph_fit_edge_mean(const npgraph_fit* fit, double* out);
NPGRAPH_API int npgraph_fit_edges(const npgraph_fit* fit, int* out);
NPGRAPH_API int npgraph_fit_omega_mean(const npgraph_fit* fit, double* out);
/* Basis-function count chosen for one column (1-based result; 0 on error). */
NPGRAPH_API int npgraph_fit_basis_count(const npgraph_fit* fit, int column);
/* Selected spike-and-slab hyperparameters. */
NPGRAPH_API int npgraph_fit_selected_hyper(const npgraph_fit* fit, double* c0, double* b0,
                                           double* b1);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NPGRAPH_H */
