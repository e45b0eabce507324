/* SPDX-License-Identifier: Apache-2.0 */

#ifndef MHK_H
#define MHK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MhkStatus {
  MHK_STATUS_OK = 0,
  MHK_STATUS_NULL_POINTER = 1,
  MHK_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed or invalid configuration or input document.
   */
  MHK_STATUS_CONFIG_ERROR = 3,
  /**
   * Bad vertex label, size mismatch or similar misuse.
   */
  MHK_STATUS_INVALID_ARGUMENT = 4,
  /**
   * Input outside the mathematical domain of the operation.
   */
  MHK_STATUS_DOMAIN_ERROR = 5,
  MHK_STATUS_SIZE_LIMIT = 6,
  MHK_STATUS_NUMERICAL_ERROR = 7,
  MHK_STATUS_BUFFER_TOO_SMALL = 8,
  /**
   * The simulation has reached its horizon or stop rule.
   */
  MHK_STATUS_FINISHED = 9,
  /**
   * An internal panic was caught at the boundary.
   */
  MHK_STATUS_PANIC = 10,
} MhkStatus;

/**
 * An undirected simple graph under construction.
 */
typedef struct MhkGraph MhkGraph;

/**
 * A running simulation.
 */
typedef struct MhkSimulation MhkSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Release with
 * [`mhk_string_free`].
 */
char *mhk_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void mhk_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mhk_version(void);

/**
 * Creates a simulation from a JSON configuration document and samples its
 * initial state.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum MhkStatus mhk_simulation_new(const char *config_json, struct MhkSimulation **out);

/**
 * Applies one update. Returns [`MhkStatus::Finished`] without changing the
 * state once the horizon or the stop rule is reached.
 *
 * # Safety
 * `sim` must be a live handle from [`mhk_simulation_new`].
 */
enum MhkStatus mhk_simulation_step(struct MhkSimulation *sim);

/**
 * Current step index, or 0 for a NULL handle.
 *
 * # Safety
 * `sim` must be NULL or a live handle.
 */
uint64_t mhk_simulation_time(const struct MhkSimulation *sim);

/**
 * Writes the number of agents and the opinion dimension.
 *
 * # Safety
 * `sim` must be a live handle; `n` and `d` must be writable.
 */
enum MhkStatus mhk_simulation_shape(const struct MhkSimulation *sim, size_t *n, size_t *d);

/**
 * Copies the opinions, row-major `n x d`, into `buf` of length `len`.
 *
 * # Safety
 * `sim` must be a live handle; `buf` must hold `len` doubles.
 */
enum MhkStatus mhk_simulation_opinions(const struct MhkSimulation *sim, double *buf, size_t len);

/**
 * Energy of the current state.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be writable.
 */
enum MhkStatus mhk_simulation_energy(const struct MhkSimulation *sim, double *out);

/**
 * Largest pairwise opinion distance of the current state.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be writable.
 */
enum MhkStatus mhk_simulation_diameter(const struct MhkSimulation *sim, double *out);

/**
 * Releases a simulation. NULL is ignored.
 *
 * # Safety
 * `sim` must be NULL or a live handle, not used afterwards.
 */
void mhk_simulation_free(struct MhkSimulation *sim);

/**
 * Creates an edgeless graph on `n` vertices.
 *
 * # Safety
 * `out` must be writable.
 */
enum MhkStatus mhk_graph_new(size_t n, struct MhkGraph **out);

/**
 * Adds the edge `{i, j}` (1-based). Loops, out-of-range labels and repeated
 * edges are rejected.
 *
 * # Safety
 * `g` must be a live handle.
 */
enum MhkStatus mhk_graph_add_edge(struct MhkGraph *g, size_t i, size_t j);

/**
 * Algebraic connectivity of the graph Laplacian.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum MhkStatus mhk_graph_lambda2(const struct MhkGraph *g, double *out);

/**
 * Exact Cheeger constant `|dS| / |S|` (at most 20 vertices). `boundary` and
 * `size` receive the minimizing fraction and may be NULL.
 *
 * # Safety
 * `g` must be a live handle; non-NULL outputs must be writable.
 */
enum MhkStatus mhk_graph_cheeger(const struct MhkGraph *g,
                                 double *value,
                                 size_t *boundary,
                                 size_t *size);

/**
 * Spectrum, Cheeger witness and sandwich verdict as a JSON document.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum MhkStatus mhk_graph_spectra_json(const struct MhkGraph *g, char **out);

/**
 * Releases a graph. NULL is ignored.
 *
 * # Safety
 * `g` must be NULL or a live handle, not used afterwards.
 */
void mhk_graph_free(struct MhkGraph *g);

/**
 * Runs the verification suite for a JSON configuration. `replicates = 0`
 * keeps the document's value. The report is written to `report_json`;
 * `passed` receives 1 when every check passed.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; outputs must be writable.
 */
enum MhkStatus mhk_verify_json(const char *config_json,
                               uint64_t replicates,
                               int32_t *passed,
                               char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MHK_H */
