#include "wordspot/objectives.hpp"

#include <cmath>

namespace wordspot {

namespace {

void check_unit_rows(const Tensor& m, const char* what) {
    if (m.ndim() != 2) raise(ErrorCode::dimension, std::string(what) + ": expected a matrix");
    for (int i = 0; i < m.rows(); ++i) {
        double sq = 0.0;
        for (int j = 0; j < m.cols(); ++j) sq += m.at(i, j) * m.at(i, j);
        if (std::fabs(std::sqrt(sq) - 1.0) > 1e-6) {
            raise(ErrorCode::invalid_argument, std::string(what) + ": row " + std::to_string(i) +
                                                   " is not unit norm (|x| = " +
                                                   std::to_string(std::sqrt(sq)) + ")");
        }
    }
}

// Temperature enters every contrastive term as the logit scale 1/tau with
// tau = exp(log_temperature), kept positive by construction.
NodePtr scaled_logits(const NodePtr& similarity, const NodePtr& log_temperature) {
    const double tau = std::exp(log_temperature->value.data[0]);
    if (tau < 0.01 - 1e-12 || tau > 1.0 + 1e-12) {
        raise(ErrorCode::invalid_argument,
              "contrastive loss: temperature " + std::to_string(tau) + " outside [0.01, 1]");
    }
    const NodePtr inv_tau = exp_op(scale(log_temperature, -1.0));
    return scalar_mul(inv_tau, similarity);
}

NodePtr mean_diag_cross_entropy(const NodePtr& logits) {
    // -(1/N) sum_i log softmax(row_i)[i]  ==  mean(lse(row) - diag)
    return mean(sub(row_logsumexp(logits), take_diag(logits)));
}

}  // namespace

void EmbeddingBatch::validate() const {
    if (visual.ndim() != 2 || text.ndim() != 2 || !visual.same_shape(text)) {
        raise(ErrorCode::dimension, "embedding batch: V and Z must be matrices of equal shape");
    }
    const int n = visual.rows();
    if (n < 2) raise(ErrorCode::invalid_argument, "embedding batch: need at least 2 rows");
    if (static_cast<int>(labels.size()) != n ||
        (!languages.empty() && static_cast<int>(languages.size()) != n)) {
        raise(ErrorCode::invalid_argument, "embedding batch: label/language length mismatch");
    }
    check_unit_rows(visual, "embedding batch V");
    check_unit_rows(text, "embedding batch Z");
}

void LossConfig::validate() const {
    if (lambda < 0.0 || epsilon < 0.0) {
        raise(ErrorCode::config, "loss: lambda and epsilon must be non-negative");
    }
}

Tensor similarity_matrix(const Tensor& visual, const Tensor& text) {
    check_unit_rows(visual, "similarity_matrix V");
    check_unit_rows(text, "similarity_matrix Z");
    if (visual.cols() != text.cols()) {
        raise(ErrorCode::dimension, "similarity_matrix: embedding dims differ");
    }
    const int n = visual.rows(), m = text.rows(), d = visual.cols();
    Tensor s = Tensor::zeros({n, m});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) acc += visual.at(i, k) * text.at(j, k);
            s.at(i, j) = acc;
        }
    return s;
}

NodePtr similarity_node(const NodePtr& visual, const NodePtr& text) {
    return matmul(visual, transpose(text));
}

NodePtr loss_v2t_node(const NodePtr& similarity, const NodePtr& log_temperature) {
    return mean_diag_cross_entropy(scaled_logits(similarity, log_temperature));
}

NodePtr loss_t2v_node(const NodePtr& similarity, const NodePtr& log_temperature) {
    return mean_diag_cross_entropy(transpose(scaled_logits(similarity, log_temperature)));
}

NodePtr loss_itc_node(const NodePtr& similarity, const NodePtr& log_temperature) {
    const NodePtr logits = scaled_logits(similarity, log_temperature);
    return scale(add(mean_diag_cross_entropy(logits),
                     mean_diag_cross_entropy(transpose(logits))),
                 0.5);
}

Tensor semantic_mask(const std::vector<int>& labels) {
    const int n = static_cast<int>(labels.size());
    Tensor m = Tensor::zeros({n, n});
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (j != k && labels[j] == labels[k]) m.at(j, k) = 1.0;
    return m;
}

NodePtr loss_inv_node(const NodePtr& visual, const NodePtr& text,
                      const std::vector<int>& labels, double epsilon) {
    // H = [V; Z] with labels duplicated; positives are same-class pairs of
    // any modality, diagonal excluded.
    std::vector<int> h_labels = labels;
    h_labels.insert(h_labels.end(), labels.begin(), labels.end());
    const Tensor mask = semantic_mask(h_labels);
    double mask_sum = 0.0;
    for (double x : mask.data) mask_sum += x;

    const NodePtr h = concat_rows(visual, text);
    const NodePtr gram = matmul(h, transpose(h));
    const NodePtr positives = sum(mul(gram, constant(mask)));
    // 1 - sum(M . G) / (sum(M) + eps)
    return affine(positives, -1.0 / (mask_sum + epsilon), 1.0);
}

LossNodes total_loss_node(const NodePtr& visual, const NodePtr& text,
                          const std::vector<int>& labels, const NodePtr& log_temperature,
                          const LossConfig& cfg, const LossToggles& toggles) {
    cfg.validate();
    if (!toggles.any()) {
        raise(ErrorCode::config, "total_loss: all loss terms are disabled");
    }
    LossNodes out;
    if (toggles.v2t || toggles.t2v) {
        const NodePtr s = similarity_node(visual, text);
        if (toggles.v2t && toggles.t2v) {
            out.contrastive = loss_itc_node(s, log_temperature);
        } else if (toggles.v2t) {
            out.contrastive = loss_v2t_node(s, log_temperature);
        } else {
            out.contrastive = loss_t2v_node(s, log_temperature);
        }
    }
    if (toggles.inv) {
        out.invariance = loss_inv_node(visual, text, labels, cfg.epsilon);
    }
    if (out.contrastive && out.invariance) {
        out.total = add(out.contrastive, scale(out.invariance, cfg.lambda));
    } else if (out.contrastive) {
        out.total = out.contrastive;
    } else {
        out.total = scale(out.invariance, cfg.lambda);
    }
    return out;
}

// -- value-level wrappers ----------------------------------------------------

double loss_v2t(const Tensor& similarity, double temperature) {
    const NodePtr s = constant(similarity);
    const NodePtr lt = constant(Tensor::scalar(std::log(temperature)));
    return loss_v2t_node(s, lt)->value.data[0];
}

double loss_t2v(const Tensor& similarity, double temperature) {
    const NodePtr s = constant(similarity);
    const NodePtr lt = constant(Tensor::scalar(std::log(temperature)));
    return loss_t2v_node(s, lt)->value.data[0];
}

double loss_itc(const Tensor& similarity, double temperature) {
    const NodePtr s = constant(similarity);
    const NodePtr lt = constant(Tensor::scalar(std::log(temperature)));
    return loss_itc_node(s, lt)->value.data[0];
}

double loss_inv(const Tensor& embeddings, const std::vector<int>& labels, double epsilon) {
    check_unit_rows(embeddings, "loss_inv H");
    if (static_cast<int>(labels.size()) != embeddings.rows()) {
        raise(ErrorCode::invalid_argument, "loss_inv: one label per embedding row required");
    }
    const Tensor mask = semantic_mask(labels);
    double mask_sum = 0.0, positives = 0.0;
    const int n = embeddings.rows(), d = embeddings.cols();
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (mask.at(j, k) == 0.0) continue;
            mask_sum += 1.0;
            double dot = 0.0;
            for (int c = 0; c < d; ++c) dot += embeddings.at(j, c) * embeddings.at(k, c);
            positives += dot;
        }
    return 1.0 - positives / (mask_sum + epsilon);
}

double total_loss(const EmbeddingBatch& batch, double temperature, const LossConfig& cfg) {
    batch.validate();
    cfg.validate();
    const NodePtr v = constant(batch.visual);
    const NodePtr z = constant(batch.text);
    const NodePtr lt = constant(Tensor::scalar(std::log(temperature)));
    return total_loss_node(v, z, batch.labels, lt, cfg).total->value.data[0];
}

}  // namespace wordspot
