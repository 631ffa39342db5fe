#pragma once

#include <string>
#include <vector>

#include "wordspot/autograd.hpp"
#include "wordspot/tensor.hpp"

namespace wordspot {

// One training batch after encoding: unit-norm visual rows V and text rows Z
// with their semantic labels and language tags.
struct EmbeddingBatch {
    Tensor visual;  // [N x D]
    Tensor text;    // [N x D]
    std::vector<int> labels;
    std::vector<std::string> languages;

    void validate() const;  // unit rows within 1e-6, N >= 2
};

struct LossConfig {
    double lambda = 0.5;
    double epsilon = 1e-8;

    void validate() const;
};

// Which loss terms participate (the ablation grid's axes).
struct LossToggles {
    bool v2t = true;
    bool t2v = true;
    bool inv = true;

    bool any() const { return v2t || t2v || inv; }
};

// Broken-out values of one loss evaluation (for history/reporting).
struct LossBreakdown {
    double total = 0.0;
    double contrastive = 0.0;  // the ITC part actually used (0 when disabled)
    double invariance = 0.0;   // L_INV before the lambda weight (0 when disabled)
    double temperature = 0.0;
};

// Value-level entry points (validate their inputs; used by tests and eval).
Tensor similarity_matrix(const Tensor& visual, const Tensor& text);
double loss_v2t(const Tensor& similarity, double temperature);
double loss_t2v(const Tensor& similarity, double temperature);
double loss_itc(const Tensor& similarity, double temperature);
Tensor semantic_mask(const std::vector<int>& labels);
double loss_inv(const Tensor& embeddings, const std::vector<int>& labels, double epsilon);
double total_loss(const EmbeddingBatch& batch, double temperature, const LossConfig& cfg);

// Graph-level builders (differentiable end to end, including through the
// temperature node). `labels` is the per-row batch labeling; the mask over
// H = [V; Z] is derived inside loss_inv_node.
NodePtr similarity_node(const NodePtr& visual, const NodePtr& text);
NodePtr loss_v2t_node(const NodePtr& similarity, const NodePtr& log_temperature);
NodePtr loss_t2v_node(const NodePtr& similarity, const NodePtr& log_temperature);
NodePtr loss_itc_node(const NodePtr& similarity, const NodePtr& log_temperature);
NodePtr loss_inv_node(const NodePtr& visual, const NodePtr& text,
                      const std::vector<int>& labels, double epsilon);

struct LossNodes {
    NodePtr total;
    NodePtr contrastive;  // null when no contrastive term enabled
    NodePtr invariance;   // null when disabled
};

LossNodes total_loss_node(const NodePtr& visual, const NodePtr& text,
                          const std::vector<int>& labels, const NodePtr& log_temperature,
                          const LossConfig& cfg, const LossToggles& toggles = {});

}  // namespace wordspot
