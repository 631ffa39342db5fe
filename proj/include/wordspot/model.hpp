#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wordspot/autograd.hpp"
#include "wordspot/lexicon.hpp"
#include "wordspot/render.hpp"
#include "wordspot/tensor.hpp"

namespace wordspot {

// Frozen semantic-anchor side. base vectors are a pure function of
// (anchor_seed, semantic_id, language): a shared class direction plus a
// small language offset, so cross-lingual synonyms start pre-aligned.
struct AnchorConfig {
    int base_dim = 64;
    int embed_dim = 32;
    double language_offset_beta = 0.1;
    uint64_t anchor_seed = 11;
    std::vector<std::string> languages = {"en", "zh", "es"};

    void validate() const;
};

Tensor anchor_base(int semantic_id, const std::string& language, const AnchorConfig& cfg);

struct ModelConfig {
    AnchorConfig anchor;
    int hidden_dim = 64;
    int canvas_height = 24;
    int canvas_width = 72;
    int pool = 4;  // patch size of the mean-pool front end
    double temperature_init = 0.07;

    int pooled_dim() const;
    void validate() const;
};

// All trainable tensors. Frozen anchor bases are intentionally absent.
struct ModelParams {
    ModelConfig cfg;
    Tensor w1, b1;  // pooled_dim -> hidden
    Tensor w2, b2;  // hidden -> hidden
    Tensor w3, b3;  // hidden -> embed
    Tensor text_proj;  // base_dim -> embed
    Tensor log_temperature;  // [1], clamped to [ln 0.01, ln 1.0]

    std::vector<Tensor*> trainable();
    std::vector<const Tensor*> trainable() const;
    std::vector<std::string> names() const;
    std::size_t param_count() const;
    double temperature() const;
    void clamp_temperature();
};

ModelParams init_params(uint64_t seed, const ModelConfig& cfg);

// 4x4 (cfg.pool) mean-pool + flatten; the fixed, parameter-free front end.
Tensor pool_image(const Image& image, const ModelConfig& cfg);

// Inference-path encoders (plain tensors, unit-norm outputs).
Tensor encode_image(const Image& image, const ModelParams& params);
Tensor encode_text(int semantic_id, const std::string& language, const ModelParams& params);

// Graph-building encoders used by training. `pooled` is [N x pooled_dim],
// `anchors` is [N x base_dim]; both enter as constants.
struct ModelGraph {
    NodePtr w1, b1, w2, b2, w3, b3, text_proj, log_temperature;
    std::vector<NodePtr> all() const { return {w1, b1, w2, b2, w3, b3, text_proj, log_temperature}; }
};

ModelGraph make_graph(const ModelParams& params);
NodePtr encode_image_batch(const ModelGraph& g, const Tensor& pooled);
NodePtr encode_text_batch(const ModelGraph& g, const Tensor& anchors);

// Checkpoint: one JSON header line, then named little-endian f64 blobs.
// save -> load round-trips bit-exactly.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace wordspot
