#ifndef ENTAILKIT_H
#define ENTAILKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Values for the `format` argument of `ek_store_load`.
 */
#define EK_FORMAT_BINARY 0

#define EK_FORMAT_TEXT 1

/**
 * Values for the `strategy` argument of `ek_represent`.
 */
#define EK_STRATEGY_THRESHOLD 0

#define EK_STRATEGY_MEAN 1

/**
 * Values for the `feature_set` argument of `ek_pair_features`.
 */
#define EK_FEATURES_EMDV_THR 0

#define EK_FEATURES_EMDV_PLAIN 1

#define EK_FEATURES_HAND_THR 2

#define EK_FEATURES_HAND_PLAIN 3

/**
 * Labels written by `ek_model_predict`.
 */
#define EK_LABEL_NEUTRAL 0

#define EK_LABEL_ENTAILMENT 1

#define EK_LABEL_CONTRADICTION 2

typedef enum EkStatus {
  EK_STATUS_OK = 0,
  EK_STATUS_NULL_POINTER = 1,
  EK_STATUS_INVALID_UTF8 = 2,
  EK_STATUS_IO = 3,
  EK_STATUS_PARSE = 4,
  EK_STATUS_DIMENSION = 5,
  EK_STATUS_MODEL = 6,
  EK_STATUS_INVALID_ARGUMENT = 7,
  EK_STATUS_BUFFER_TOO_SMALL = 8,
  EK_STATUS_NOT_FOUND = 9,
  EK_STATUS_PANIC = 10,
} EkStatus;

/**
 * Trained single model or ensemble.
 */
typedef struct EkModel EkModel;

/**
 * Stopword list and lemma table.
 */
typedef struct EkPrep EkPrep;

/**
 * Word-embedding store.
 */
typedef struct EkStore EkStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ek_last_error(void);

/**
 * Library version as a static string.
 */
const char *ek_version(void);

/**
 * Loads a word2vec file. `format` is `EK_FORMAT_BINARY` or `EK_FORMAT_TEXT`.
 *
 * # Safety
 * `path` must be a valid C string and `out` a writable pointer.
 */
enum EkStatus ek_store_load(const char *path, int32_t format, struct EkStore **out);

/**
 * # Safety
 * `store` must come from `ek_store_load` and not be used afterwards. NULL is ignored.
 */
void ek_store_free(struct EkStore *store);

/**
 * Vector dimension, or 0 for a NULL store.
 *
 * # Safety
 * `store` must be NULL or a live store.
 */
size_t ek_store_dimension(const struct EkStore *store);

/**
 * Number of words, or 0 for a NULL store.
 *
 * # Safety
 * `store` must be NULL or a live store.
 */
size_t ek_store_len(const struct EkStore *store);

/**
 * Copies the vector of `word` into `out` (length `len` >= dimension).
 * Returns `EK_STATUS_NOT_FOUND` for unknown words.
 *
 * # Safety
 * Pointers must be valid; `out` must hold `len` doubles.
 */
enum EkStatus ek_store_lookup(const struct EkStore *store,
                              const char *word,
                              double *out,
                              size_t len);

/**
 * Built-in stopwords and lemma table.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum EkStatus ek_prep_builtin(struct EkPrep **out);

/**
 * Loads preprocessing resources; a NULL path keeps the built-in resource.
 *
 * # Safety
 * Paths must be NULL or valid C strings; `out` must be writable.
 */
enum EkStatus ek_prep_load(const char *stopwords_path,
                           const char *lemmas_path,
                           struct EkPrep **out);

/**
 * # Safety
 * `prep` must come from `ek_prep_*` and not be used afterwards. NULL is ignored.
 */
void ek_prep_free(struct EkPrep *prep);

/**
 * Preprocesses `sentence` and writes its sentence vector to `out`.
 * `in_vocab` (optional) receives the number of tokens found in the store.
 *
 * # Safety
 * Pointers must be valid; `out` must hold `len` doubles.
 */
enum EkStatus ek_represent(const struct EkStore *store,
                           const struct EkPrep *prep,
                           const char *sentence,
                           int32_t strategy,
                           double *out,
                           size_t len,
                           size_t *in_vocab);

/**
 * Feature vector of one text/hypothesis pair. `sts_store` may be NULL to
 * reuse `word_store`. `out_len` receives the feature count, also when the
 * call fails with `EK_STATUS_BUFFER_TOO_SMALL`.
 *
 * # Safety
 * Pointers must be valid; `out` must hold `len` doubles.
 */
enum EkStatus ek_pair_features(const struct EkStore *word_store,
                               const struct EkStore *sts_store,
                               const struct EkPrep *prep,
                               const char *text,
                               const char *hypothesis,
                               int32_t feature_set,
                               double *out,
                               size_t len,
                               size_t *out_len);

/**
 * Loads a model file written by `entailkit experiment --save-model`.
 *
 * # Safety
 * `path` must be a valid C string and `out` writable.
 */
enum EkStatus ek_model_load(const char *path, struct EkModel **out);

/**
 * Number of features the model expects, or 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live model.
 */
size_t ek_model_dimension(const struct EkModel *model);

/**
 * Predicts one row; `label` receives one of the `EK_LABEL_*` values.
 *
 * # Safety
 * `features` must point to `len` doubles; `label` must be writable.
 */
enum EkStatus ek_model_predict(const struct EkModel *model,
                               const double *features,
                               size_t len,
                               int32_t *label);

/**
 * # Safety
 * `model` must come from `ek_model_load` and not be used afterwards. NULL is ignored.
 */
void ek_model_free(struct EkModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTAILKIT_H */
