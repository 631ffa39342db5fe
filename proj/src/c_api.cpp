#include "wordspot.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "wordspot/config.hpp"
#include "wordspot/pipeline.hpp"

// ws_config wraps the canonical JSON text (re-validated on every use);
// ws_model owns loaded checkpoint parameters.
struct ws_config {
    std::string json_text;
};

struct ws_model {
    wordspot::ModelParams params;
};

namespace {

thread_local std::string t_last_error;

ws_status to_status(wordspot::ErrorCode code) {
    switch (code) {
        case wordspot::ErrorCode::invalid_argument: return WS_ERR_INVALID_ARGUMENT;
        case wordspot::ErrorCode::config: return WS_ERR_CONFIG;
        case wordspot::ErrorCode::io: return WS_ERR_IO;
        case wordspot::ErrorCode::format: return WS_ERR_FORMAT;
        case wordspot::ErrorCode::capacity: return WS_ERR_CAPACITY;
        case wordspot::ErrorCode::dimension: return WS_ERR_DIMENSION;
        case wordspot::ErrorCode::degenerate: return WS_ERR_DEGENERATE;
        case wordspot::ErrorCode::infeasible: return WS_ERR_INFEASIBLE;
        case wordspot::ErrorCode::state: return WS_ERR_STATE;
        case wordspot::ErrorCode::overflow: return WS_ERR_OVERFLOW;
        case wordspot::ErrorCode::internal: return WS_ERR_INTERNAL;
    }
    return WS_ERR_INTERNAL;
}

template <typename Fn>
ws_status guarded(Fn&& fn) {
    try {
        fn();
        return WS_OK;
    } catch (const wordspot::Error& e) {
        t_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return WS_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return WS_ERR_INTERNAL;
    }
}

ws_status fail(ws_status status, const char* message) {
    t_last_error = message;
    return status;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

wordspot::RunConfig parse_config(const ws_config* config) {
    if (!config) wordspot::raise(wordspot::ErrorCode::invalid_argument, "config handle is null");
    return wordspot::config_from_json_text(config->json_text);
}

}  // namespace

extern "C" {

const char* ws_version(void) { return "0.1.0"; }

const char* ws_status_name(ws_status status) {
    switch (status) {
        case WS_OK: return "ok";
        case WS_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case WS_ERR_CONFIG: return "config";
        case WS_ERR_IO: return "io";
        case WS_ERR_FORMAT: return "format";
        case WS_ERR_CAPACITY: return "capacity";
        case WS_ERR_DIMENSION: return "dimension";
        case WS_ERR_DEGENERATE: return "degenerate";
        case WS_ERR_INFEASIBLE: return "infeasible";
        case WS_ERR_STATE: return "state";
        case WS_ERR_OVERFLOW: return "overflow";
        case WS_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* ws_last_error(void) { return t_last_error.c_str(); }

void ws_string_free(char* text) { std::free(text); }

ws_status ws_config_defaults(ws_config** out) {
    if (!out) return fail(WS_ERR_INVALID_ARGUMENT, "ws_config_defaults: out is null");
    return guarded([&] {
        *out = new ws_config{wordspot::config_to_json_text(wordspot::default_run_config())};
    });
}

ws_status ws_config_load(const char* path, ws_config** out) {
    if (!path || !out) return fail(WS_ERR_INVALID_ARGUMENT, "ws_config_load: null argument");
    return guarded([&] {
        wordspot::RunConfig cfg = wordspot::load_run_config(path);
        *out = new ws_config{wordspot::config_to_json_text(cfg)};
    });
}

ws_status ws_config_set(ws_config* config, const char* dotted_key, const char* value_json) {
    if (!config || !dotted_key || !value_json) {
        return fail(WS_ERR_INVALID_ARGUMENT, "ws_config_set: null argument");
    }
    return guarded([&] {
        std::string text = config->json_text;
        wordspot::apply_override(text, dotted_key, value_json);
        wordspot::config_from_json_text(text);  // validate before committing
        config->json_text = text;
    });
}

ws_status ws_config_dump(const ws_config* config, char** out_json) {
    if (!config || !out_json) return fail(WS_ERR_INVALID_ARGUMENT, "ws_config_dump: null argument");
    return guarded([&] {
        const wordspot::RunConfig cfg = wordspot::config_from_json_text(config->json_text);
        *out_json = dup_string(wordspot::config_to_json_text(cfg));
        if (!*out_json) wordspot::raise(wordspot::ErrorCode::internal, "allocation failed");
    });
}

void ws_config_free(ws_config* config) { delete config; }

ws_status ws_generate_dataset(const ws_config* config, const char* out_dir) {
    if (!out_dir) return fail(WS_ERR_INVALID_ARGUMENT, "ws_generate_dataset: out_dir is null");
    return guarded([&] { wordspot::cmd_generate(parse_config(config), out_dir); });
}

ws_status ws_train(const ws_config* config, const char* dataset_dir, const char* run_dir) {
    if (!dataset_dir || !run_dir) return fail(WS_ERR_INVALID_ARGUMENT, "ws_train: null path");
    return guarded([&] { wordspot::cmd_train(parse_config(config), dataset_dir, run_dir); });
}

ws_status ws_evaluate(const ws_config* config, const char* checkpoint, const char* dataset_dir,
                      const char* split, const char* out_dir) {
    if (!checkpoint || !dataset_dir || !split || !out_dir) {
        return fail(WS_ERR_INVALID_ARGUMENT, "ws_evaluate: null argument");
    }
    return guarded([&] {
        wordspot::cmd_eval(parse_config(config), checkpoint, dataset_dir, split, out_dir);
    });
}

ws_status ws_cross_evaluate(const ws_config* config, const char* checkpoint,
                            const char* dataset_dir, const char* split, const char* out_dir) {
    if (!checkpoint || !dataset_dir || !split || !out_dir) {
        return fail(WS_ERR_INVALID_ARGUMENT, "ws_cross_evaluate: null argument");
    }
    return guarded([&] {
        wordspot::cmd_cross_eval(parse_config(config), checkpoint, dataset_dir, split, out_dir);
    });
}

ws_status ws_characterize(const ws_config* config, const char* checkpoint,
                          const char* dataset_dir, const char* split, const char* out_dir) {
    if (!checkpoint || !dataset_dir || !split || !out_dir) {
        return fail(WS_ERR_INVALID_ARGUMENT, "ws_characterize: null argument");
    }
    return guarded([&] {
        wordspot::cmd_characterize(parse_config(config), checkpoint, dataset_dir, split, out_dir);
    });
}

ws_status ws_quantize(const ws_config* config, const char* checkpoint, const char* dataset_dir,
                      const char* out_dir) {
    if (!checkpoint || !dataset_dir || !out_dir) {
        return fail(WS_ERR_INVALID_ARGUMENT, "ws_quantize: null argument");
    }
    return guarded([&] {
        wordspot::cmd_quantize(parse_config(config), checkpoint, dataset_dir, out_dir);
    });
}

ws_status ws_ablate(const ws_config* config, const char* dataset_dir, const char* out_dir) {
    if (!dataset_dir || !out_dir) return fail(WS_ERR_INVALID_ARGUMENT, "ws_ablate: null path");
    return guarded([&] { wordspot::cmd_ablate(parse_config(config), dataset_dir, out_dir); });
}

ws_status ws_model_load(const char* checkpoint, ws_model** out) {
    if (!checkpoint || !out) return fail(WS_ERR_INVALID_ARGUMENT, "ws_model_load: null argument");
    return guarded([&] { *out = new ws_model{wordspot::load_checkpoint(checkpoint)}; });
}

void ws_model_free(ws_model* model) { delete model; }

int ws_model_embed_dim(const ws_model* model) {
    return model ? model->params.cfg.anchor.embed_dim : 0;
}

ws_status ws_model_encode_image(const ws_model* model, const double* pixels, int height,
                                int width, double* out_embedding) {
    if (!model || !pixels || !out_embedding) {
        return fail(WS_ERR_INVALID_ARGUMENT, "ws_model_encode_image: null argument");
    }
    return guarded([&] {
        wordspot::Image img;
        img.height = height;
        img.width = width;
        img.pixels.assign(pixels, pixels + static_cast<std::size_t>(height) * width);
        const wordspot::Tensor v = wordspot::encode_image(img, model->params);
        std::memcpy(out_embedding, v.data.data(), v.data.size() * sizeof(double));
    });
}

ws_status ws_model_encode_text(const ws_model* model, int semantic_id, const char* language,
                               double* out_embedding) {
    if (!model || !language || !out_embedding) {
        return fail(WS_ERR_INVALID_ARGUMENT, "ws_model_encode_text: null argument");
    }
    return guarded([&] {
        const wordspot::Tensor z = wordspot::encode_text(semantic_id, language, model->params);
        std::memcpy(out_embedding, z.data.data(), z.data.size() * sizeof(double));
    });
}

}  // extern "C"
