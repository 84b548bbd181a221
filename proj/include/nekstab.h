#ifndef NEKSTAB_H
#define NEKSTAB_H

/* C interface to the nekstab core: near-integrable Hamiltonian stability
 * laboratory (integer resonance lattices, Diophantine approximation,
 * stability-exponent envelopes, symplectic trajectory engine).
 *
 * Conventions:
 *   - every function returns an nks_status; NKS_OK means success;
 *   - on failure, nks_last_error() returns a thread-local message;
 *   - char** outputs receive malloc'd strings owned by the caller,
 *     released with nks_string_free();
 *   - structured payloads travel as JSON documents.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NKS_API __declspec(dllexport)
#else
#define NKS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nks_status {
    NKS_OK = 0,
    NKS_ERR_DOMAIN = 1,   /* precondition or range violation */
    NKS_ERR_PARSE = 2,    /* malformed JSON / CSV / file */
    NKS_ERR_RESOURCE = 3, /* enumeration or work budget exceeded */
    NKS_ERR_STEP = 4,     /* integrator failure */
    NKS_ERR_RUNTIME = 5,  /* I/O or unexpected failure */
    NKS_ERR_SELFTEST = 6  /* one or more selftest suites failed */
} nks_status;

NKS_API const char* nks_version(void);
NKS_API const char* nks_last_error(void);
NKS_API void nks_string_free(char* s);

/* ---- exact lattice kernel -------------------------------------------- */

/* Unimodular completion of a primitive integer vector. JSON out:
 * {"matrix": [[..]], "det": +-1, "row_norms": [..], "k_norm": K,
 *  "inverse": [[..]], "inverse_norm": .., "bounds": {"c": n!K^(n-1), "c_prime": K},
 *  "checks": {...all true...}}  (entries become decimal strings past int64) */
NKS_API nks_status nks_lattice_complete(const int64_t* k, size_t n, char** json_out);

/* Smith normal form of a full-row-rank r x n integer matrix (row-major).
 * JSON out: {"b": [[..]], "diag": [..], "a": [[..]], "reconstruction_ok": true} */
NKS_API nks_status nks_lattice_smith(const int64_t* entries, size_t rows, size_t cols, char** json_out);

/* Rational in [center - length/2, center + length/2] subset of [-1, 1]. */
NKS_API nks_status nks_lattice_dirichlet(double center, double length, int64_t* p_out, int64_t* q_out);

/* sqrt(det(M M^T)) of a full-row-rank basis matrix. */
NKS_API nks_status nks_lattice_volume(const int64_t* entries, size_t rows, size_t cols, double* out);

/* Upper bounds (n! K^(n-1), K), K = |k|_1, for primitive k. */
NKS_API nks_status nks_lattice_bounds(const int64_t* k, size_t n, double* c_upper, double* c_prime_upper);

/* ---- stability envelopes --------------------------------------------- */

/* Request JSON:
 *   {"n": 3, "eps": 1e-4, "delta": 0.0833, ...}            either delta or gamma
 *   optional: "alpha" (Gevrey case when present or != 1), "constants": {...}
 * Response: exponents, confinement radius, log time bound, schedule K,
 * threshold verdicts and the shape_only flag. */
NKS_API nks_status nks_envelope_predict(const char* request_json, char** json_out);

/* Local exponents near a multiplicity-m resonance. */
NKS_API nks_status nks_envelope_local(int n, int multiplicity, double alpha, double* a_out, double* b_out);

/* ---- systems and trajectories ---------------------------------------- */

typedef struct nks_system nks_system;

NKS_API nks_status nks_system_parse(const char* json_text, nks_system** out);
NKS_API nks_status nks_system_load(const char* path, nks_system** out);
NKS_API void nks_system_free(nks_system* sys);
NKS_API int nks_system_dim(const nks_system* sys);

/* Condition report: quasi-convexity margin and derivative bound over a
 * sample grid. Options JSON (may be NULL): {"grid_points": 64}
 * Response: {"qc_pass": .., "qc_margin_min": .., "derivative_bound_pass": ..,
 *            "gevrey_norm_bound": .. (when configured), "sup_f_bound": ..} */
NKS_API nks_status nks_system_check(const nks_system* sys, const char* options_json, char** report_json);

typedef struct nks_trajectory nks_trajectory;

/* Options JSON:
 * {"theta0": [..] | "seed": 1, "i0": [..], "T": 1e4,
 *  "rho": 0.1,                                   optional drift stop in (0, R/2)
 *  "dt": 0.01, "scheme": "implicit_midpoint" | "composed4",
 *  "fp_tol": 1e-12, "fp_max_iters": 50, "sample_stride": 1,
 *  "energy_slack": 1e-6,
 *  "detector": {"K": 10, "tol": 1e-6},          omit to disable detection
 *  "force": false}                               skip the condition gate
 */
NKS_API nks_status nks_simulate(const nks_system* sys, const char* options_json, nks_trajectory** out);
NKS_API void nks_trajectory_free(nks_trajectory* traj);
NKS_API nks_status nks_trajectory_write_csv(const nks_trajectory* traj, const char* path);
NKS_API nks_status nks_trajectory_events_json(const nks_trajectory* traj, char** json_out);
NKS_API nks_status nks_trajectory_summary_json(const nks_trajectory* traj, char** json_out);

/* ---- sweeps and exponent fits ---------------------------------------- */

typedef struct nks_sweep nks_sweep;

/* Options JSON:
 * {"eps": [1e-2, 1e-3, ...] strictly decreasing, "rho": 0.1, "T_max": 1e6,
 *  "seeds": [1, 2, ...], "workers": 4, "i0": [..],
 *  "dt": .., "scheme": .., "detector": {..}, "force": false} */
NKS_API nks_status nks_sweep_run(const nks_system* sys, const char* options_json, nks_sweep** out);

/* Analytic table T = exp(eps^-a): {"a": 0.25, "eps": [..]} */
NKS_API nks_status nks_sweep_synthetic(const char* options_json, nks_sweep** out);

NKS_API void nks_sweep_free(nks_sweep* sweep);
NKS_API nks_status nks_sweep_write_csv(const nks_sweep* sweep, const char* path);
NKS_API nks_status nks_sweep_summary_json(const nks_sweep* sweep, char** json_out);

/* Fit ln ln T against ln(1/eps) over the non-censored rows of a sweep CSV. */
NKS_API nks_status nks_fit_csv(const char* path, char** json_out);

/* ---- selftest --------------------------------------------------------- */

/* Runs the exhaustive property suites; returns NKS_OK iff all pass
 * (NKS_ERR_SELFTEST otherwise). The JSON report carries per-suite counts,
 * timings and the first counterexample of any failing suite. inject_fault
 * deliberately corrupts one case to exercise the failure path. */
NKS_API nks_status nks_selftest(int inject_fault, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* NEKSTAB_H */
