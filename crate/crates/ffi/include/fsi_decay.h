#ifndef FSI_DECAY_H
#define FSI_DECAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum FsiStatus {
  FSI_STATUS_OK = 0,
  FSI_STATUS_NULL_POINTER = 1,
  FSI_STATUS_INVALID_UTF8 = 2,
  FSI_STATUS_PARSE = 3,
  FSI_STATUS_INVALID_ARGUMENT = 4,
  // The question has no answer, e.g. no admissible λ.
  FSI_STATUS_NO_SOLUTION = 5,
  FSI_STATUS_NUMERICAL = 6,
  FSI_STATUS_IO = 7,
  FSI_STATUS_INTERNAL = 8,
  FSI_STATUS_PANIC = 9,
} FsiStatus;

// Simulator state and its factored step operator.
typedef struct FsiSimulation FsiSimulation;

// Parsed weight vector `(c_id, c_T, c_dt, c_Tdt, c_TT, c_dtt)`.
typedef struct FsiWeights FsiWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Crate version and expression-ledger hash, as a static string.
const char *fsi_version(void);

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into this library from the same thread.
const char *fsi_last_error(void);

// # Safety
// `s` must be NULL or a string returned by this library, freed once.
void fsi_string_free(char *s);

// Parse `len` weights (integer, `p/q` or decimal strings).
//
// # Safety
// `values` must point to `len` valid C strings; `out` must be writable.
enum FsiStatus fsi_weights_parse(const char *const *values, uintptr_t len, struct FsiWeights **out);

// The reference weight vector `(5, 5/3, 20/3, 17/3, 0, 25/3)`.
//
// # Safety
// `out` must be writable.
enum FsiStatus fsi_weights_reference(struct FsiWeights **out);

// # Safety
// `w` must be NULL or a handle from this library, freed once.
void fsi_weights_free(struct FsiWeights *w);

// α, κ, ε as exact `p/q` strings.
//
// # Safety
// `w` must be a valid handle; the out pointers must be writable.
enum FsiStatus fsi_exponents(const struct FsiWeights *w,
                             char **alpha,
                             char **kappa,
                             char **epsilon);

// Whether every compiled requirement holds at `w`. `report` may be NULL;
// otherwise it receives the JSON report.
//
// # Safety
// `w` must be a valid handle; `feasible` must be writable; `report` NULL or
// writable.
enum FsiStatus fsi_verify_weights(const struct FsiWeights *w, bool *feasible, char **report);

// Exponent `k` of the largest admissible `λ = 2^{-k}`. Returns
// `NoSolution` when none exists for `k ≤ 64`.
//
// # Safety
// String arguments must be valid C strings; `exponent` must be writable.
enum FsiStatus fsi_lemma_find_lambda(const char *c,
                                     const char *gamma,
                                     const char *alpha,
                                     const char *beta,
                                     const char *kappa,
                                     uint32_t *exponent);

// Start a simulation. `config_json` may be NULL for the default config.
//
// # Safety
// `config_json` must be NULL or a valid C string; `out` must be writable.
enum FsiStatus fsi_sim_new(const char *config_json, struct FsiSimulation **out);

// # Safety
// `s` must be NULL or a handle from this library, freed once.
void fsi_sim_free(struct FsiSimulation *s);

// Advance by `n` time steps.
//
// # Safety
// `s` must be a valid handle.
enum FsiStatus fsi_sim_step(struct FsiSimulation *s, uint64_t n);

// Current time, energy `E_id` and dissipation `D`. Any out pointer may be
// NULL.
//
// # Safety
// `s` must be a valid handle.
enum FsiStatus fsi_sim_observe(const struct FsiSimulation *s,
                               double *time,
                               double *energy,
                               double *dissipation);

// Number of packed unknowns.
//
// # Safety
// `s` must be a valid handle; `dim` must be writable.
enum FsiStatus fsi_sim_dim(const struct FsiSimulation *s, uintptr_t *dim);

// Copy the packed unknowns into `buf`, which holds `len` doubles; `len`
// must equal [`fsi_sim_dim`].
//
// # Safety
// `s` must be a valid handle; `buf` must have room for `len` doubles.
enum FsiStatus fsi_sim_state(const struct FsiSimulation *s, double *buf, uintptr_t len);

// Run a whole simulation and return the JSON report the CLI prints.
//
// # Safety
// `config_json` must be NULL or a valid C string; `report` must be writable.
enum FsiStatus fsi_sim_run_report(const char *config_json, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSI_DECAY_H */
