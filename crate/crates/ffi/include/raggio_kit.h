/* Generated by cbindgen from the raggio-kit-ffi sources. Do not edit. */

#ifndef RAGGIO_KIT_H
#define RAGGIO_KIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum RkStatus {
  RK_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  RK_STATUS_NULL_POINTER = 1,
  /*
   A string argument was not valid UTF-8.
   */
  RK_STATUS_INVALID_UTF8 = 2,
  /*
   Malformed JSON or algebra shorthand.
   */
  RK_STATUS_PARSE = 3,
  /*
   Input violates a mathematical precondition (not a state, bad weights, ...).
   */
  RK_STATUS_INVALID_INPUT = 4,
  /*
   Algebras or shapes do not fit together.
   */
  RK_STATUS_MISMATCH = 5,
  /*
   Requested problem exceeds the dimension cap.
   */
  RK_STATUS_RESOURCE_LIMIT = 6,
  /*
   Output buffer too small; the required length was written.
   */
  RK_STATUS_BUFFER_TOO_SMALL = 7,
  /*
   Internal failure caught at the boundary.
   */
  RK_STATUS_PANIC = 8,
} RkStatus;

/*
 Separability verdict tags.
 */
typedef enum RkVerdict {
  RK_VERDICT_SEPARABLE = 0,
  RK_VERDICT_ENTANGLED_PURE = 1,
  RK_VERDICT_ENTANGLED_PPT = 2,
  RK_VERDICT_UNDETERMINED = 3,
} RkVerdict;

/*
 Opaque finite-dimensional C*-algebra.
 */
typedef struct RkAlgebra RkAlgebra;

/*
 Opaque state on an algebra.
 */
typedef struct RkState RkState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *rk_version(void);

/*
 Message for the most recent failure on this thread, or an empty string.
 The pointer stays valid until the next failing call on this thread.
 */
const char *rk_last_error_message(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void rk_string_free(char *s);

/*
 Parses algebra shorthand such as `M2`, `D3`, `M2+D1` or `M2xD2`.

 # Safety
 `shorthand` must be a NUL-terminated string; `out` must be writable.
 */
enum RkStatus rk_algebra_parse(const char *shorthand, struct RkAlgebra **out);

/*
 Tensor product `a ⊗ b`, keeping the factorization.

 # Safety
 `a` and `b` must be live handles; `out` must be writable.
 */
enum RkStatus rk_algebra_tensor(const struct RkAlgebra *a,
                                const struct RkAlgebra *b,
                                struct RkAlgebra **out);

/*
 # Safety
 `alg` must be null or a handle not yet freed.
 */
void rk_algebra_free(struct RkAlgebra *alg);

/*
 Total Hilbert space dimension `Σ n_k`.

 # Safety
 `alg` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_algebra_total_dim(const struct RkAlgebra *alg, size_t *out);

/*
 # Safety
 `alg` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_algebra_is_commutative(const struct RkAlgebra *alg, bool *out);

/*
 Shorthand form of the algebra.

 # Safety
 `alg` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_algebra_to_string(const struct RkAlgebra *alg, char **out);

/*
 Reads a state from JSON: `{"algebra", "entries"}` for a density matrix or
 `{"algebra", "psi"}` for a unit vector.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum RkStatus rk_state_from_json(const char *json, struct RkState **out);

/*
 Builds a state from a dense block-diagonal density matrix given as
 `2·N·N` doubles, row-major, real and imaginary parts interleaved.

 # Safety
 `entries` must point to `len` readable doubles; `alg` must be a live
 handle; `out` must be writable.
 */
enum RkStatus rk_state_from_dense(const struct RkAlgebra *alg,
                                  const double *entries,
                                  size_t len,
                                  struct RkState **out);

/*
 Normalized trace on `alg`.

 # Safety
 `alg` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_state_maximally_mixed(const struct RkAlgebra *alg, struct RkState **out);

/*
 The singlet vector state on `M2 ⊗ M2`.

 # Safety
 `out` must be writable.
 */
enum RkStatus rk_state_singlet(struct RkState **out);

/*
 Werner state `p |singlet⟩⟨singlet| + (1 − p) 1/4`, `p ∈ [0, 1]`.

 # Safety
 `out` must be writable.
 */
enum RkStatus rk_state_werner(double p, struct RkState **out);

/*
 # Safety
 `s` must be null or a handle not yet freed.
 */
void rk_state_free(struct RkState *s);

/*
 JSON form `{"algebra", "entries"}`.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_state_to_json(const struct RkState *s, char **out);

/*
 Total dimension of the state's algebra.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_state_dim(const struct RkState *s, size_t *out);

/*
 `Tr ρ²`.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_state_purity(const struct RkState *s, double *out);

/*
 Diagonal of the density matrix (Born probabilities in the standard
 basis) into `buf`. The dimension is written to `written` (if non-null)
 even when `len` is too small.

 # Safety
 `buf` must point to `len` writable doubles; `s` must be a live handle.
 */
enum RkStatus rk_state_probabilities(const struct RkState *s,
                                     double *buf,
                                     size_t len,
                                     size_t *written);

/*
 Smallest eigenvalue of the partial transpose on the second factor.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_ppt_min_eigenvalue(const struct RkState *s, double *out);

/*
 Separability test with an iteration budget and seed. The verdict JSON
 (tag and certificate) goes to `json` when non-null.

 # Safety
 `s` must be a live handle; `verdict` must be writable.
 */
enum RkStatus rk_separability(const struct RkState *s,
                              size_t budget,
                              uint64_t seed,
                              enum RkVerdict *verdict,
                              char **json);

/*
 See-saw CHSH maximization; full result JSON to `json` when non-null.

 # Safety
 `s` must be a live handle; `value` must be writable.
 */
enum RkStatus rk_chsh_optimize(const struct RkState *s,
                               size_t restarts,
                               uint64_t seed,
                               double *value,
                               char **json);

/*
 Closed-form two-qubit CHSH maximum.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum RkStatus rk_horodecki_two_qubit(const struct RkState *s, double *out);

/*
 Sampled consistency check for the pair `a ⊗ b` with default budget,
 restarts and dimension cap. The report JSON goes to `json` when non-null.

 # Safety
 `a` and `b` must be NUL-terminated strings; `consistent` must be writable.
 */
enum RkStatus rk_raggio_check(const char *a,
                              const char *b,
                              size_t samples,
                              uint64_t seed,
                              size_t threads,
                              bool *consistent,
                              char **json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAGGIO_KIT_H */
