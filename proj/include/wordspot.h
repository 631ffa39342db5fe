/*
 * wordspot C API: cross-script handwritten-word retrieval engine.
 *
 * Opaque handles + integer status codes. Every function returning
 * ws_status sets a thread-local diagnostic readable via ws_last_error()
 * on failure. Strings returned through char** are heap-allocated and must
 * be released with ws_string_free().
 */
#ifndef WORDSPOT_H
#define WORDSPOT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ws_status {
    WS_OK = 0,
    WS_ERR_INVALID_ARGUMENT = 1,
    WS_ERR_CONFIG = 2,
    WS_ERR_IO = 3,
    WS_ERR_FORMAT = 4,
    WS_ERR_CAPACITY = 5,
    WS_ERR_DIMENSION = 6,
    WS_ERR_DEGENERATE = 7,
    WS_ERR_INFEASIBLE = 8,
    WS_ERR_STATE = 9,
    WS_ERR_OVERFLOW = 10,
    WS_ERR_INTERNAL = 11
} ws_status;

const char* ws_version(void);
const char* ws_status_name(ws_status status);

/* Thread-local message describing the most recent failure on this thread. */
const char* ws_last_error(void);

void ws_string_free(char* text);

/* ---- configuration ---------------------------------------------------- */

typedef struct ws_config ws_config;

ws_status ws_config_defaults(ws_config** out);
ws_status ws_config_load(const char* path, ws_config** out);
/* Dotted-path override; value is parsed as JSON (bare words as strings). */
ws_status ws_config_set(ws_config* config, const char* dotted_key, const char* value_json);
ws_status ws_config_dump(const ws_config* config, char** out_json);
void ws_config_free(ws_config* config);

/* ---- pipeline commands ------------------------------------------------ */

ws_status ws_generate_dataset(const ws_config* config, const char* out_dir);

ws_status ws_train(const ws_config* config, const char* dataset_dir, const char* run_dir);

/* split is one of "train", "finetune", "id_eval", "ood_eval". */
ws_status ws_evaluate(const ws_config* config, const char* checkpoint, const char* dataset_dir,
                      const char* split, const char* out_dir);

ws_status ws_cross_evaluate(const ws_config* config, const char* checkpoint,
                            const char* dataset_dir, const char* split, const char* out_dir);

ws_status ws_characterize(const ws_config* config, const char* checkpoint,
                          const char* dataset_dir, const char* split, const char* out_dir);

ws_status ws_quantize(const ws_config* config, const char* checkpoint, const char* dataset_dir,
                      const char* out_dir);

ws_status ws_ablate(const ws_config* config, const char* dataset_dir, const char* out_dir);

/* ---- model handle ------------------------------------------------------ */

typedef struct ws_model ws_model;

ws_status ws_model_load(const char* checkpoint, ws_model** out);
void ws_model_free(ws_model* model);

int ws_model_embed_dim(const ws_model* model);

/* pixels: row-major grayscale in [0,1], height x width as configured at
 * training time. out_embedding must hold ws_model_embed_dim() doubles. */
ws_status ws_model_encode_image(const ws_model* model, const double* pixels, int height,
                                int width, double* out_embedding);

ws_status ws_model_encode_text(const ws_model* model, int semantic_id, const char* language,
                               double* out_embedding);

#ifdef __cplusplus
}
#endif

#endif /* WORDSPOT_H */
