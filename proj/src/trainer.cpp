#include "wordspot/trainer.hpp"

#include <cmath>
#include <unordered_map>

namespace wordspot {

std::string stage_name(Stage s) {
    return s == Stage::pretrain ? "pretrain" : "finetune";
}

void StageConfig::validate() const {
    if (lr <= 0.0) raise(ErrorCode::config, "stage: lr must be positive");
    if (epochs < 1) raise(ErrorCode::config, "stage: epochs must be >= 1");
}

EncodedPool build_encoded_pool(const Dataset& dataset, Split split, const ModelConfig& cfg) {
    EncodedPool pool;
    pool.indices = dataset.indices_of(split);
    if (pool.indices.empty()) {
        raise(ErrorCode::infeasible, "no samples in split '" + split_name(split) + "'");
    }
    const int n = static_cast<int>(pool.indices.size());
    pool.pooled = Tensor::zeros({n, cfg.pooled_dim()});
    pool.anchors = Tensor::zeros({n, cfg.anchor.base_dim});
    pool.labels.resize(static_cast<std::size_t>(n));
    pool.languages.resize(static_cast<std::size_t>(n));
    // Anchor bases repeat per (y, l); cache them.
    std::unordered_map<std::string, Tensor> anchor_cache;
    for (int i = 0; i < n; ++i) {
        const Sample& s = dataset.samples[static_cast<std::size_t>(pool.indices[i])];
        const Tensor p = pool_image(s.image, cfg);
        for (int j = 0; j < cfg.pooled_dim(); ++j) pool.pooled.at(i, j) = p.at(j);
        const std::string key = std::to_string(s.semantic_id) + "/" + s.language;
        auto it = anchor_cache.find(key);
        if (it == anchor_cache.end()) {
            it = anchor_cache.emplace(key, anchor_base(s.semantic_id, s.language, cfg.anchor)).first;
        }
        for (int j = 0; j < cfg.anchor.base_dim; ++j) pool.anchors.at(i, j) = it->second.at(j);
        pool.labels[static_cast<std::size_t>(i)] = s.semantic_id;
        pool.languages[static_cast<std::size_t>(i)] = s.language;
    }
    return pool;
}

namespace {

// Gathers the rows of an encoded pool selected by a batch.
void gather_batch(const EncodedPool& pool, const std::vector<int>& batch_dataset_indices,
                  const std::unordered_map<int, int>& dataset_to_pool, Tensor& pooled,
                  Tensor& anchors, std::vector<int>& labels) {
    const int n = static_cast<int>(batch_dataset_indices.size());
    const int pd = pool.pooled.cols(), bd = pool.anchors.cols();
    pooled = Tensor::zeros({n, pd});
    anchors = Tensor::zeros({n, bd});
    labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int pi = dataset_to_pool.at(batch_dataset_indices[static_cast<std::size_t>(i)]);
        for (int j = 0; j < pd; ++j) pooled.at(i, j) = pool.pooled.at(pi, j);
        for (int j = 0; j < bd; ++j) anchors.at(i, j) = pool.anchors.at(pi, j);
        labels[static_cast<std::size_t>(i)] = pool.labels[static_cast<std::size_t>(pi)];
    }
}

}  // namespace

TrainHistory train_stage(ModelParams& params, const Dataset& dataset,
                         const StageConfig& stage_cfg, const SamplerConfig& sampler_cfg,
                         const LossConfig& loss_cfg, const LossToggles& toggles,
                         const EpochEval& epoch_eval, long first_step) {
    stage_cfg.validate();
    loss_cfg.validate();
    if (!toggles.any()) raise(ErrorCode::config, "train: all loss terms disabled");

    const EncodedPool pool = build_encoded_pool(dataset, stage_cfg.split, params.cfg);
    std::unordered_map<int, int> dataset_to_pool;
    for (std::size_t i = 0; i < pool.indices.size(); ++i) {
        dataset_to_pool[pool.indices[i]] = static_cast<int>(i);
    }

    // The two stages must not share a sampler stream, or stage order would
    // leak between runs with different epoch counts.
    SamplerConfig stage_sampler = sampler_cfg;
    stage_sampler.seed = hash_combine(sampler_cfg.seed, static_cast<uint64_t>(stage_cfg.stage));
    BatchSampler sampler(dataset, pool.indices, stage_sampler);

    AdamWConfig opt_cfg = stage_cfg.optimizer;
    opt_cfg.lr = stage_cfg.lr;
    auto trainable = params.trainable();
    AdamWState opt_state = make_adamw_state(trainable);

    const int steps_per_epoch = static_cast<int>(pool.indices.size()) / sampler.batch_size();
    if (steps_per_epoch < 1) {
        raise(ErrorCode::infeasible, "train: split smaller than one batch");
    }

    TrainHistory history;
    long step = first_step;
    for (int epoch = 0; epoch < stage_cfg.epochs; ++epoch) {
        double loss_acc = 0.0;
        for (int s = 0; s < steps_per_epoch; ++s, ++step) {
            const std::vector<int> batch = sampler.next_batch();
            Tensor pooled, anchors;
            std::vector<int> labels;
            gather_batch(pool, batch, dataset_to_pool, pooled, anchors, labels);

            ModelGraph graph = make_graph(params);
            LossNodes losses;
            try {
                const NodePtr v = encode_image_batch(graph, pooled);
                const NodePtr z = encode_text_batch(graph, anchors);
                losses = total_loss_node(v, z, labels, graph.log_temperature, loss_cfg, toggles);
                backward(losses.total);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::degenerate) {
                    raise(ErrorCode::degenerate,
                          "training aborted at step " + std::to_string(step) + ": " + e.what());
                }
                throw;
            }

            std::vector<const Tensor*> grads;
            for (const NodePtr& node : graph.all()) grads.push_back(&node->grad);
            adamw_step(trainable, grads, opt_state, opt_cfg);
            params.clamp_temperature();

            StepRecord rec;
            rec.step = step;
            rec.stage = stage_cfg.stage;
            rec.total = losses.total->value.data[0];
            rec.contrastive = losses.contrastive ? losses.contrastive->value.data[0] : 0.0;
            rec.invariance = losses.invariance ? losses.invariance->value.data[0] : 0.0;
            rec.temperature = params.temperature();
            if (!std::isfinite(rec.total)) {
                raise(ErrorCode::degenerate,
                      "training diverged at step " + std::to_string(step));
            }
            history.steps.push_back(rec);
            loss_acc += rec.total;
        }
        EpochRecord er;
        er.epoch = epoch;
        er.stage = stage_cfg.stage;
        er.mean_loss = loss_acc / steps_per_epoch;
        er.eval_acc1 = epoch_eval ? epoch_eval(params) : -1.0;
        history.epochs.push_back(er);
    }
    return history;
}

TwoStageConfig default_two_stage() {
    TwoStageConfig cfg;
    cfg.pretrain.stage = Stage::pretrain;
    cfg.pretrain.lr = 1e-4;
    cfg.pretrain.epochs = 20;
    cfg.pretrain.split = Split::train;
    cfg.finetune.stage = Stage::finetune;
    cfg.finetune.lr = 1e-5;
    cfg.finetune.epochs = 20;
    cfg.finetune.split = Split::finetune;
    return cfg;
}

TrainResult run_two_stage(const Dataset& dataset, const ModelConfig& model_cfg,
                          const TwoStageConfig& cfg, const EpochEval& epoch_eval) {
    if (!cfg.toggles.any()) {
        raise(ErrorCode::config, "run_two_stage: configuration disables every loss term");
    }
    TrainResult result;
    result.params = init_params(cfg.init_seed, model_cfg);
    result.history = train_stage(result.params, dataset, cfg.pretrain, cfg.sampler, cfg.loss,
                                 cfg.toggles, epoch_eval, 0);
    result.stage1_params = result.params;
    if (cfg.run_finetune) {
        const long next_step = static_cast<long>(result.history.steps.size());
        TrainHistory ft = train_stage(result.params, dataset, cfg.finetune, cfg.sampler,
                                      cfg.loss, cfg.toggles, epoch_eval, next_step);
        result.history.steps.insert(result.history.steps.end(), ft.steps.begin(), ft.steps.end());
        result.history.epochs.insert(result.history.epochs.end(), ft.epochs.begin(),
                                     ft.epochs.end());
    }
    return result;
}

}  // namespace wordspot
