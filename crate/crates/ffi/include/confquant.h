#ifndef CONFQUANT_H
#define CONFQUANT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CqStatus {
  CQ_STATUS_OK = 0,
  CQ_STATUS_NULL_POINTER = 1,
  CQ_STATUS_PARSE = 2,
  CQ_STATUS_CRITICAL = 3,
  CQ_STATUS_DEGREE = 4,
  CQ_STATUS_INVALID = 5,
  CQ_STATUS_PANIC = 6,
} CqStatus;

/**
 * Opaque quantizer bound to one signature.
 */
typedef struct CqQuantizer CqQuantizer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a quantizer for signature `(p, q)` with the default degree cap.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum CqStatus cq_quantizer_new(uint32_t p, uint32_t q, struct CqQuantizer **out);

/**
 * Releases a quantizer. Null is ignored.
 *
 * # Safety
 * `q` must come from [`cq_quantizer_new`] and not be freed twice.
 */
void cq_quantizer_free(struct CqQuantizer *q);

/**
 * Quantizes a problem given as JSON and writes the operator as JSON.
 *
 * # Safety
 * `q` must be a live handle, `problem_json` a nul-terminated string and
 * `out_json` a valid pointer. The result must be freed with [`cq_string_free`].
 */
enum CqStatus cq_quantize(const struct CqQuantizer *q, const char *problem_json, char **out_json);

/**
 * Checks equivariance for every basis generator and stores the number of
 * nonzero residuals in `nonzero`.
 *
 * # Safety
 * Same requirements as [`cq_quantize`]; `nonzero` must be valid.
 */
enum CqStatus cq_verify(const struct CqQuantizer *q, const char *problem_json, uint32_t *nonzero);

/**
 * Distinct critical shift values up to degree `kmax`, as a JSON array of
 * strings like `"delta=1 from (1,0)->(0,0)"`.
 *
 * # Safety
 * `q` must be a live handle and `out_json` a valid pointer.
 */
enum CqStatus cq_criticals(const struct CqQuantizer *q, uint32_t kmax, char **out_json);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void cq_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null after a
 * success. Valid until the next call into the library on this thread.
 */
const char *cq_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONFQUANT_H */
