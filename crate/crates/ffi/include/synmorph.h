#ifndef SYNMORPH_H
#define SYNMORPH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SmRedupMode {
  SM_REDUP_MODE_FULL = 0,
  SM_REDUP_MODE_PARTIAL = 1,
  SM_REDUP_MODE_TRIPLE = 2,
} SmRedupMode;

/**
 * Which side of the pair a rule is applied on.
 */
typedef enum SmSide {
  SM_SIDE_SOURCE = 0,
  SM_SIDE_TARGET = 1,
} SmSide;

/**
 * Result of every fallible call.
 */
typedef enum SmStatus {
  SM_STATUS_OK = 0,
  SM_STATUS_NULL_POINTER = 1,
  SM_STATUS_INVALID_UTF8 = 2,
  SM_STATUS_INVALID_ARGUMENT = 3,
  SM_STATUS_PARSE = 4,
  SM_STATUS_IO = 5,
  SM_STATUS_CONFIG = 6,
  SM_STATUS_EXHAUSTED = 7,
  SM_STATUS_LINE_COUNT_MISMATCH = 8,
  /**
   * The string rule does not apply to the given base.
   */
  SM_STATUS_NOT_APPLICABLE = 9,
  SM_STATUS_PANIC = 99,
} SmStatus;

/**
 * An evaluator bound to a pattern table and inventory.
 */
typedef struct SmEvaluator SmEvaluator;

/**
 * A morpheme inventory.
 */
typedef struct SmInventory SmInventory;

/**
 * A parsed pattern table.
 */
typedef struct SmPatterns SmPatterns;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *sm_version(void);

/**
 * Message for the last failure on this thread, or NULL. Owned by the library.
 */
const char *sm_last_error(void);

/**
 * Releases a string returned through a `char **` out-parameter.
 *
 * # Safety
 * `s` must be NULL or a pointer obtained from this library, freed once.
 */
void sm_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum SmStatus sm_patterns_default(struct SmPatterns **out);

/**
 * Parses a pattern table in TSV form.
 *
 * # Safety
 * `tsv` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SmStatus sm_patterns_parse(const char *tsv, struct SmPatterns **out);

/**
 * Number of patterns; 0 for NULL.
 *
 * # Safety
 * `p` must be NULL or a live handle.
 */
size_t sm_patterns_len(const struct SmPatterns *p);

/**
 * # Safety
 * `p` must be NULL or a handle from `sm_patterns_*`, freed once.
 */
void sm_patterns_free(struct SmPatterns *p);

/**
 * Parses an inventory TSV.
 *
 * # Safety
 * `tsv` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SmStatus sm_inventory_parse(const char *tsv, struct SmInventory **out);

/**
 * Generates an inventory whose morphemes are absent from the
 * whitespace-separated `corpus_tokens` and the line-per-entry `vocab`.
 * Either text may be NULL.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum SmStatus sm_inventory_generate(const struct SmPatterns *patterns,
                                    const char *corpus_tokens,
                                    const char *vocab,
                                    uint64_t seed,
                                    struct SmInventory **out);

/**
 * Serializes the inventory as TSV, in pattern-table order.
 *
 * # Safety
 * Handles must be live; `out` a valid pointer.
 */
enum SmStatus sm_inventory_to_tsv(const struct SmInventory *inventory,
                                  const struct SmPatterns *patterns,
                                  char **out);

/**
 * # Safety
 * `p` must be NULL or a handle from `sm_inventory_*`, freed once.
 */
void sm_inventory_free(struct SmInventory *p);

/**
 * Creates an evaluator. The pattern table and inventory are copied.
 *
 * # Safety
 * Handles must be live; `out` a valid pointer.
 */
enum SmStatus sm_evaluator_new(const struct SmPatterns *patterns,
                               const struct SmInventory *inventory,
                               struct SmEvaluator **out);

/**
 * Sets the target word list (one per line) used to detect compound-split
 * reduplication errors.
 *
 * # Safety
 * `ev` must be a live handle; `vocab` NUL-terminated.
 */
enum SmStatus sm_evaluator_set_target_vocab(struct SmEvaluator *ev, const char *vocab);

/**
 * Judges one output line against one metadata row (TSV, header optional).
 * `*error_code` receives the error code string, or NULL when correct.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum SmStatus sm_evaluator_line(const struct SmEvaluator *ev,
                                const char *meta_row,
                                const char *output,
                                bool *correct,
                                char **error_code);

/**
 * Evaluates newline-separated outputs against a metadata file's contents
 * and returns the per-pattern accuracy table as TSV.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum SmStatus sm_evaluator_report(const struct SmEvaluator *ev,
                                  const char *meta_tsv,
                                  const char *outputs,
                                  char **report_tsv);

/**
 * # Safety
 * `p` must be NULL or a handle from `sm_evaluator_new`, freed once.
 */
void sm_evaluator_free(struct SmEvaluator *p);

/**
 * `Sona` + `Räume` → `Sonaräume`.
 *
 * # Safety
 * Strings NUL-terminated; `out` a valid pointer.
 */
enum SmStatus sm_apply_compound(const char *base, const char *morpheme, char **out);

/**
 * `side` is an `SmSide` value.
 *
 * # Safety
 * Strings NUL-terminated; `out` a valid pointer.
 */
enum SmStatus sm_apply_circumfix(const char *base,
                                 const char *prefix,
                                 const char *suffix,
                                 uint32_t side,
                                 char **out);

/**
 * Returns `SM_STATUS_NOT_APPLICABLE` when the base has no inner vowel.
 *
 * # Safety
 * Strings NUL-terminated; `out` a valid pointer.
 */
enum SmStatus sm_apply_infix(const char *base, const char *infix, char **out);

/**
 * `triple` is three consonants, as `bpr` or `b-p-r`.
 *
 * # Safety
 * Strings NUL-terminated; `out` a valid pointer.
 */
enum SmStatus sm_apply_vowel_harmony(const char *base, const char *triple, char **out);

/**
 * `mode` is an `SmRedupMode` value.
 *
 * # Safety
 * Strings NUL-terminated; `out` a valid pointer.
 */
enum SmStatus sm_apply_reduplication(const char *base, uint32_t mode, char **out);

/**
 * Index of the frequency bucket, 0 (zero-shot) to 7 (>1000).
 */
uint32_t sm_bucket_of(uint64_t freq);

/**
 * Static label of the frequency bucket.
 */
const char *sm_bucket_label(uint64_t freq);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNMORPH_H */
