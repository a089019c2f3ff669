#ifndef FVLAB_H
#define FVLAB_H

/* Generated by cbindgen from the fvlab-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Code families exposed through the ABI.
typedef enum FvCode {
  FV_CODE_OPTIMAL = 0,
  FV_CODE_TYPE_SIZE = 1,
  FV_CODE_TWO_STAGE_FV = 2,
  FV_CODE_TWO_STAGE_FF = 3,
  FV_CODE_INTERLEAVE = 4,
} FvCode;

// Rate-expansion variants for the three-term prediction.
typedef enum FvRateVariant {
  FV_RATE_OPTIMAL = 0,
  FV_RATE_TYPE_SIZE = 1,
  FV_RATE_TWO_STAGE = 2,
} FvRateVariant;

// Status codes returned by every entry point.
typedef enum FvStatus {
  FV_STATUS_OK = 0,
  FV_STATUS_NULL_POINTER = 1,
  FV_STATUS_INVALID_DISTRIBUTION = 2,
  FV_STATUS_INVALID_EPSILON = 3,
  FV_STATUS_UNSUPPORTED = 4,
  FV_STATUS_TOO_LARGE = 5,
  FV_STATUS_DOMAIN = 6,
  FV_STATUS_INTERNAL = 7,
} FvStatus;

// Opaque handle around a validated source distribution.
typedef struct FvDist FvDist;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Human-readable name of a status code; a static string, do not free.
const char *fv_status_name(enum FvStatus status);

// Library version; a static string, do not free.
const char *fv_version(void);

// Validates and stores a probability vector of length m. On success writes
// a handle the caller must release with fv_dist_free.
//
// # Safety
// `probs` must point to `m` readable doubles and `out` to a writable slot.
enum FvStatus fv_dist_new(const double *probs, size_t m, struct FvDist **out);

// Releases a handle returned by fv_dist_new. Null is a no-op.
//
// # Safety
// `dist` must be a pointer from fv_dist_new, released at most once.
void fv_dist_free(struct FvDist *dist);

// Entropy of the distribution, in bits.
//
// # Safety
// `dist` must be a live handle and `out` writable.
enum FvStatus fv_entropy(const struct FvDist *dist, double *out);

// Varentropy of the distribution, in bits squared.
//
// # Safety
// `dist` must be a live handle and `out` writable.
enum FvStatus fv_varentropy(const struct FvDist *dist, double *out);

// Standard normal upper tail Q(x).
//
// # Safety
// `out` must be writable.
enum FvStatus fv_q(double x, double *out);

// Inverse of the standard normal upper tail on (0, 1).
//
// # Safety
// `out` must be writable.
enum FvStatus fv_q_inv(double p, double *out);

// Exact epsilon-rate of the chosen code at blocklength n: the bit count
// and the rate in bits per symbol.
//
// # Safety
// `dist` must be a live handle; `out_bits` and `out_rate` writable.
enum FvStatus fv_code_rate(enum FvCode code,
                           uint32_t n,
                           const struct FvDist *dist,
                           double eps,
                           uint64_t *out_bits,
                           double *out_rate);

// Bit counts of the binary interleaved code and of the optimal code; the
// former never exceeds the latter plus one.
//
// # Safety
// `dist` must be a live handle; `out_nr` and `out_nr_star` writable.
enum FvStatus fv_one_bit_gap(uint32_t n,
                             const struct FvDist *dist,
                             double eps,
                             uint64_t *out_nr,
                             uint64_t *out_nr_star);

// Three-term rate prediction H + sqrt(V/n) Qinv(eps) + c log2(n)/n for the
// chosen code family.
//
// # Safety
// `dist` must be a live handle and `out` writable.
enum FvStatus fv_predicted_rate(enum FvRateVariant variant,
                                uint32_t n,
                                const struct FvDist *dist,
                                double eps,
                                double *out);

// Closed-form optimum of the Kraft length-allocation program for a strictly
// increasing ladder of codeword lengths.
//
// # Safety
// `levels` must point to `len` readable u32 values and `out` be writable.
enum FvStatus fv_kraft_lp_optimal(const uint32_t *levels, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FVLAB_H */
