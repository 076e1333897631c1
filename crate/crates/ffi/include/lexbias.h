#ifndef LEXBIAS_H
#define LEXBIAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LEXBIAS_LABEL_NOT_BIASED 0

#define LEXBIAS_LABEL_BIASED 1

#define LEXBIAS_LABEL_INCONCLUSIVE 2

typedef enum LexbiasStatus {
  LEXBIAS_STATUS_OK = 0,
  LEXBIAS_STATUS_NULL_ARGUMENT = 1,
  LEXBIAS_STATUS_INVALID_UTF8 = 2,
  LEXBIAS_STATUS_INVALID_ARGUMENT = 3,
  LEXBIAS_STATUS_IO = 4,
  LEXBIAS_STATUS_FORMAT = 5,
  LEXBIAS_STATUS_DOMAIN = 6,
  LEXBIAS_STATUS_PANIC = 7,
} LexbiasStatus;

// Trained baseline classifier.
typedef struct LexbiasModel LexbiasModel;

// Demonstration pool with hashing embeddings, used to render prompts.
typedef struct LexbiasPool LexbiasPool;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or null. Valid until the next call
// into this library on the same thread; do not free.
const char *lexbias_last_error(void);

// Library version as a static string; do not free.
const char *lexbias_version(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a pointer previously returned through an out-parameter
// of this library and not yet freed.
void lexbias_string_free(char *s);

// Matthews correlation of a confusion matrix with Biased as the positive class.
//
// # Safety
// `out` must be null or valid for writes.
enum LexbiasStatus lexbias_mcc(uint64_t tp, uint64_t tn, uint64_t fp, uint64_t fn_, double *out);

// McNemar test from the two discordant counts.
//
// # Safety
// `statistic` and `p_value` must be null or valid for writes.
enum LexbiasStatus lexbias_mcnemar(uint64_t b, uint64_t c, double *statistic, double *p_value);

// Parse a model response with the default phrases into one of the
// `LEXBIAS_LABEL_*` codes.
//
// # Safety
// `response` must be null or a nul-terminated string; `label` must be null
// or valid for writes.
enum LexbiasStatus lexbias_parse_label(const char *response, int32_t *label);

// Load a `text,label,explanation` CSV and embed it.
//
// # Safety
// `path` must be null or a nul-terminated string; `out` must be null or
// valid for writes.
enum LexbiasStatus lexbias_pool_load(const char *path,
                                     uint32_t embed_dim,
                                     uint64_t embed_seed,
                                     struct LexbiasPool **out);

// Number of examples in the pool, 0 for null.
//
// # Safety
// `pool` must be null or a live handle.
size_t lexbias_pool_len(const struct LexbiasPool *pool);

// Render the prompt for `target` under `settings` (for example `8-shot-exp`),
// retrieving the nearest demonstrations. The result is freed with
// [`lexbias_string_free`].
//
// # Safety
// `pool` must be null or a live handle; string arguments must be null or
// nul-terminated; `out` must be null or valid for writes.
enum LexbiasStatus lexbias_pool_render(const struct LexbiasPool *pool,
                                       const char *target,
                                       const char *settings,
                                       char **out);

// # Safety
// `pool` must be null or a handle from [`lexbias_pool_load`] not yet freed.
void lexbias_pool_free(struct LexbiasPool *pool);

// Load a model file written by `baseline train`.
//
// # Safety
// `path` must be null or nul-terminated; `out` must be null or valid for writes.
enum LexbiasStatus lexbias_model_load(const char *path, struct LexbiasModel **out);

// Classify one sentence. `probability` receives P(Biased) and may be null.
//
// # Safety
// `model` must be null or a live handle; `text` must be null or
// nul-terminated; `label` must be null or valid for writes; `probability`
// must be null or valid for writes.
enum LexbiasStatus lexbias_model_predict(const struct LexbiasModel *model,
                                         const char *text,
                                         int32_t *label,
                                         double *probability);

// # Safety
// `model` must be null or a handle from [`lexbias_model_load`] not yet freed.
void lexbias_model_free(struct LexbiasModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEXBIAS_H */
