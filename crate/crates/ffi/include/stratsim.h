#ifndef STRATSIM_H
#define STRATSIM_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum StratsimStatus {
  STRATSIM_STATUS_OK = 0,
  STRATSIM_STATUS_NULL_POINTER = 1,
  STRATSIM_STATUS_INVALID_UTF8 = 2,
  STRATSIM_STATUS_CONFIG = 3,
  STRATSIM_STATUS_INVALID_INPUT = 4,
  STRATSIM_STATUS_ENGINE = 5,
  STRATSIM_STATUS_BUFFER_TOO_SMALL = 6,
  STRATSIM_STATUS_PANIC = 7,
} StratsimStatus;

/**
 * Opaque instance handle: the resolved configuration and its game.
 */
typedef struct StratsimInstance StratsimInstance;

typedef struct StratsimTrustReport {
  double strategic_value;
  double naive_value;
  double strategization_gap;
  double kappa;
  size_t strategic_candidate;
  /**
   * 1 when the gap is non-positive and kappa reaches the configured kappa0.
   */
  uint8_t trustworthy;
} StratsimTrustReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an instance from a built-in scenario name with default settings.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum StratsimStatus stratsim_instance_from_scenario(const char *name,
                                                    struct StratsimInstance **out);

/**
 * Creates an instance from the text of a TOML experiment config.
 *
 * # Safety
 * `toml` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum StratsimStatus stratsim_instance_from_config(const char *toml, struct StratsimInstance **out);

/**
 * Releases an instance. Null is ignored.
 *
 * # Safety
 * `inst` must come from one of the constructors and not be used afterwards.
 */
void stratsim_instance_free(struct StratsimInstance *inst);

/**
 * Number of models in the instance's hypothesis class, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t stratsim_instance_n_models(const struct StratsimInstance *inst);

/**
 * Writes the indices of the stable set for the configured user strategy.
 * `out_len` always receives the required length.
 *
 * # Safety
 * `inst` must be a live handle, `out_ids` must hold `capacity` entries, `out_len` must be valid.
 */
enum StratsimStatus stratsim_stable_set(const struct StratsimInstance *inst,
                                        size_t *out_ids,
                                        size_t capacity,
                                        size_t *out_len);

/**
 * Solves for the strategic user and returns the solution as a JSON string.
 *
 * # Safety
 * `inst` must be a live handle and `out_json` a valid pointer. Free the result with
 * [`stratsim_string_free`].
 */
enum StratsimStatus stratsim_solve_json(const struct StratsimInstance *inst, char **out_json);

/**
 * Fills `out` with the strategization gap and trust measure.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
enum StratsimStatus stratsim_trust_audit(const struct StratsimInstance *inst,
                                         struct StratsimTrustReport *out);

/**
 * Simulates `horizon` steps with `seed` and writes the final belief.
 * `out_len` always receives the number of models.
 *
 * # Safety
 * `inst` must be a live handle, `out_belief` must hold `capacity` entries, `out_len` must be valid.
 */
enum StratsimStatus stratsim_simulate(const struct StratsimInstance *inst,
                                      uint64_t seed,
                                      size_t horizon,
                                      double *out_belief,
                                      size_t capacity,
                                      size_t *out_len);

/**
 * Message for the last failed call on this thread, or null. Valid until the next call.
 */
const char *stratsim_last_error(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void stratsim_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRATSIM_H */
