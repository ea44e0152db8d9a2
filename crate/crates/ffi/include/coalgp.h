#ifndef COALGP_H
#define COALGP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Gaussian process family.
typedef enum CoalgpKernelKind {
  COALGP_KERNEL_KIND_BROWNIAN_MOTION = 0,
  COALGP_KERNEL_KIND_ORNSTEIN_UHLENBECK = 1,
} CoalgpKernelKind;

// Result of every fallible call.
typedef enum CoalgpStatus {
  COALGP_STATUS_OK = 0,
  // A required pointer argument was null.
  COALGP_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  COALGP_STATUS_INVALID_UTF8 = 2,
  // Malformed Newick, JSON or trajectory text.
  COALGP_STATUS_PARSE = 3,
  // Arguments violate a precondition.
  COALGP_STATUS_VALIDATION = 4,
  // A value outside the domain of a function.
  COALGP_STATUS_DOMAIN = 5,
  // A numerical evaluation failed.
  COALGP_STATUS_EVALUATION = 6,
  // Simulation or sampling failed while running.
  COALGP_STATUS_RUNTIME = 7,
  // A file could not be read or written.
  COALGP_STATUS_IO = 8,
  // An index was out of range.
  COALGP_STATUS_OUT_OF_RANGE = 9,
  // The library panicked; this is a bug.
  COALGP_STATUS_PANIC = 10,
} CoalgpStatus;

// Output of one MCMC run.
typedef struct CoalgpChain CoalgpChain;

// Coalescent data: coalescent and sampling times.
typedef struct CoalgpData CoalgpData;

// Posterior summary of `N_e` on a grid.
typedef struct CoalgpSummary CoalgpSummary;

// Sampler settings; fill with [`coalgp_config_default`] and adjust.
typedef struct CoalgpMcmcConfig {
  size_t iterations;
  size_t burnin;
  size_t thin;
  uint64_t seed;
  // Gamma prior on the GP precision.
  double alpha;
  double beta;
  // Prior on the thinning rate.
  double lambda_hat;
  double epsilon;
  // Proposal half-width for the thinning rate; non-positive selects the default.
  double lambda_half_width;
  size_t rj_moves;
  bool prior_only;
} CoalgpMcmcConfig;

// Kernel choice. `parameter` is the initial-level variance for Brownian
// motion and the mean-reversion rate for Ornstein-Uhlenbeck.
typedef struct CoalgpKernel {
  enum CoalgpKernelKind kind;
  double parameter;
} CoalgpKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *coalgp_version(void);

// Message for the most recent failure on this thread, or null if none.
// The pointer stays valid until the next failing call on this thread.
const char *coalgp_last_error_message(void);

// Default sampler settings.
struct CoalgpMcmcConfig coalgp_config_default(void);

// Brownian-motion kernel with the default initial-level variance.
struct CoalgpKernel coalgp_kernel_default(void);

// Parse a Newick genealogy. `date_delim` is the separator of a
// `label<delim>date` tip suffix, or 0 to use branch lengths only.
//
// # Safety
// `newick` must be a NUL-terminated string and `out` a valid pointer.
enum CoalgpStatus coalgp_data_from_newick(const char *newick,
                                          char date_delim,
                                          struct CoalgpData **out);

// Build data from arrays: `n_coal` coalescent times starting at 0, and
// `n_samp` sampling times with their sample counts.
//
// # Safety
// Arrays must hold at least the stated number of elements.
enum CoalgpStatus coalgp_data_new(const double *coal_times,
                                  size_t n_coal,
                                  const double *samp_times,
                                  const size_t *samp_counts,
                                  size_t n_samp,
                                  struct CoalgpData **out);

// Simulate an isochronous genealogy of `n` tips under a named trajectory
// (`constant:c`, `expgrowth:n0,rate`, `boombust`) by thinning. A positive
// `lambda` is used as a constant bound; otherwise a piecewise bound is used.
//
// # Safety
// `trajectory` must be a NUL-terminated string and `out` a valid pointer.
enum CoalgpStatus coalgp_simulate_iso(size_t n,
                                      const char *trajectory,
                                      double lambda,
                                      uint64_t seed,
                                      uint64_t replicate,
                                      struct CoalgpData **out);

// Number of sampled tips.
//
// # Safety
// `data` must be a live handle or null (which yields 0).
size_t coalgp_data_num_tips(const struct CoalgpData *data);

// Root time, or NaN for a null handle.
//
// # Safety
// `data` must be a live handle or null.
double coalgp_data_tmrca(const struct CoalgpData *data);

// Number of coalescent times, including time 0.
//
// # Safety
// `data` must be a live handle or null (which yields 0).
size_t coalgp_data_num_coal_times(const struct CoalgpData *data);

// Copy the coalescent times into `buf`, which holds `len` values.
//
// # Safety
// `buf` must have room for `len` doubles.
enum CoalgpStatus coalgp_data_coal_times(const struct CoalgpData *data, double *buf, size_t len);

// Log density of the coalescent times under a named trajectory.
//
// # Safety
// Pointers must be valid; `trajectory` NUL-terminated.
enum CoalgpStatus coalgp_log_likelihood(const struct CoalgpData *data,
                                        const char *trajectory,
                                        double *out);

// # Safety
// `data` must come from this library and not be used afterwards.
void coalgp_data_free(struct CoalgpData *data);

// Run chain number `chain` of the sampler on `data`.
//
// # Safety
// Pointers must be valid.
enum CoalgpStatus coalgp_run_chain(const struct CoalgpData *data,
                                   const struct CoalgpMcmcConfig *config,
                                   struct CoalgpKernel kernel,
                                   uint64_t chain,
                                   struct CoalgpChain **out);

// Read a chain written by [`coalgp_chain_write`] or the command-line tool.
//
// # Safety
// `path` must be NUL-terminated and `out` valid.
enum CoalgpStatus coalgp_chain_read(const char *path, struct CoalgpChain **out);

// Write a chain as JSON lines.
//
// # Safety
// Pointers must be valid; `path` NUL-terminated.
enum CoalgpStatus coalgp_chain_write(const struct CoalgpChain *chain, const char *path);

// Number of retained draws.
//
// # Safety
// `chain` must be a live handle or null (which yields 0).
size_t coalgp_chain_num_draws(const struct CoalgpChain *chain);

// Scalar parameters of draw `index`. Any output pointer may be null.
//
// # Safety
// Non-null pointers must be valid.
enum CoalgpStatus coalgp_chain_draw(const struct CoalgpChain *chain,
                                    size_t index,
                                    double *theta,
                                    double *lambda,
                                    size_t *latent_count);

// # Safety
// `chain` must come from this library and not be used afterwards.
void coalgp_chain_free(struct CoalgpChain *chain);

// Summarize `N_e` on `grid` (`len` ascending times).
//
// # Safety
// Pointers must be valid; `grid` must hold `len` values.
enum CoalgpStatus coalgp_summarize(const struct CoalgpChain *chain,
                                   const double *grid,
                                   size_t len,
                                   uint64_t seed,
                                   struct CoalgpSummary **out);

// Number of grid points.
//
// # Safety
// `summary` must be a live handle or null (which yields 0).
size_t coalgp_summary_len(const struct CoalgpSummary *summary);

// Copy the median and 95% band into caller buffers of `len` values each.
// Any buffer may be null to skip it.
//
// # Safety
// Non-null buffers must have room for `len` doubles.
enum CoalgpStatus coalgp_summary_values(const struct CoalgpSummary *summary,
                                        double *median,
                                        double *lo95,
                                        double *hi95,
                                        size_t len);

// # Safety
// `summary` must come from this library and not be used afterwards.
void coalgp_summary_free(struct CoalgpSummary *summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COALGP_H */
