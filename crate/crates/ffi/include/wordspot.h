#ifndef WORDSPOT_H
#define WORDSPOT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum WsStatus {
  WS_STATUS_OK = 0,
  WS_STATUS_INVALID_ARGUMENT = 1,
  WS_STATUS_PARSE_ERROR = 2,
  WS_STATUS_IO_ERROR = 3,
  WS_STATUS_UNSUPPORTED_QUERY = 4,
  WS_STATUS_NO_INK = 5,
  WS_STATUS_NULL_POINTER = 6,
  /**
   * No index has been built or loaded yet.
   */
  WS_STATUS_NO_INDEX = 7,
  WS_STATUS_PANIC = 8,
} WsStatus;

/**
 * Pages plus the index built from them or loaded from text.
 */
typedef struct WsEngine WsEngine;

/**
 * Results of one search.
 */
typedef struct WsResults WsResults;

/**
 * One ranked match. Coordinates are inclusive pixel positions.
 */
typedef struct WsMatch {
  uint32_t distance;
  uint32_t line_idx;
  uint32_t word_idx;
  uint32_t x1;
  uint32_t y1;
  uint32_t x2;
  uint32_t y2;
} WsMatch;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call on this thread.
 */
const char *ws_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void ws_string_free(char *s);

/**
 * Shape token for query text, e.g. "the" gives "AAxx".
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum WsStatus ws_query_to_wst(const char *text, char **out);

/**
 * Edit distance between two byte strings.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated; `out` must be writable.
 */
enum WsStatus ws_levenshtein(const char *a, const char *b, size_t *out);

/**
 * New engine with reference font size `ref_font` (0 selects the default).
 *
 * # Safety
 * `out` must be writable.
 */
enum WsStatus ws_engine_new(uint32_t ref_font, struct WsEngine **out);

/**
 * # Safety
 * `engine` must come from [`ws_engine_new`] or be null.
 */
void ws_engine_free(struct WsEngine *engine);

/**
 * Add a NetPBM page held in memory. `path` is recorded in the index and may
 * be null. Any built index is discarded.
 *
 * # Safety
 * `data` must point to `len` readable bytes; strings must be NUL-terminated.
 */
enum WsStatus ws_engine_add_page(struct WsEngine *engine,
                                 const char *doc_id,
                                 const char *path,
                                 const uint8_t *data,
                                 size_t len);

/**
 * Segment all added pages into a fresh index.
 *
 * # Safety
 * `engine` must be a live handle.
 */
enum WsStatus ws_engine_build(struct WsEngine *engine);

/**
 * Number of words in the current index.
 *
 * # Safety
 * `engine` must be a live handle; `out` must be writable.
 */
enum WsStatus ws_engine_word_count(const struct WsEngine *engine, size_t *out);

/**
 * Replace the index with one parsed from text. Pages added in memory are
 * used for documents they cover; others are read from their recorded paths.
 *
 * # Safety
 * `engine` must be a live handle; `text` must be NUL-terminated.
 */
enum WsStatus ws_engine_load_index(struct WsEngine *engine, const char *text);

/**
 * Serialize the current index.
 *
 * # Safety
 * `engine` must be a live handle; `out` must be writable.
 */
enum WsStatus ws_engine_save_index(const struct WsEngine *engine, char **out);

/**
 * Ranked matches for `query`. A negative `threshold` or zero `char_width`
 * selects the default (2.5 and 40 respectively).
 *
 * # Safety
 * `engine` must be a live handle; `query` must be NUL-terminated; `out`
 * must be writable.
 */
enum WsStatus ws_engine_search(const struct WsEngine *engine,
                               const char *query,
                               double threshold,
                               uint32_t char_width,
                               struct WsResults **out);

/**
 * # Safety
 * `results` must be a live handle or null.
 */
size_t ws_results_len(const struct WsResults *results);

/**
 * # Safety
 * `results` must be a live handle; `out` must be writable.
 */
enum WsStatus ws_results_get(const struct WsResults *results, size_t i, struct WsMatch *out);

/**
 * Document id of match `i`, or null when out of range. Owned by `results`.
 *
 * # Safety
 * `results` must be a live handle or null.
 */
const char *ws_results_doc_id(const struct WsResults *results, size_t i);

/**
 * # Safety
 * `results` must come from [`ws_engine_search`] or be null.
 */
void ws_results_free(struct WsResults *results);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WORDSPOT_H */
