#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wordspot/dataset.hpp"
#include "wordspot/model.hpp"
#include "wordspot/objectives.hpp"
#include "wordspot/optim.hpp"
#include "wordspot/sampler.hpp"

namespace wordspot {

enum class Stage { pretrain, finetune };

std::string stage_name(Stage s);

struct StageConfig {
    Stage stage = Stage::pretrain;
    double lr = 1e-4;
    int epochs = 20;
    Split split = Split::train;
    AdamWConfig optimizer;  // lr field here wins over optimizer.lr

    void validate() const;
};

struct StepRecord {
    long step = 0;
    Stage stage = Stage::pretrain;
    double total = 0.0;
    double contrastive = 0.0;
    double invariance = 0.0;
    double temperature = 0.0;
};

struct EpochRecord {
    int epoch = 0;
    Stage stage = Stage::pretrain;
    double mean_loss = 0.0;
    double eval_acc1 = -1.0;  // -1 when no eval callback installed
};

struct TrainHistory {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
};

// Optional per-epoch snapshot hook (returns an accuracy-like scalar).
using EpochEval = std::function<double(const ModelParams&)>;

// Runs one stage in place: epochs x floor(|split| / N) optimizer steps of
// encode -> total_loss -> backward -> adamw -> temperature clamp.
TrainHistory train_stage(ModelParams& params, const Dataset& dataset,
                         const StageConfig& stage_cfg, const SamplerConfig& sampler_cfg,
                         const LossConfig& loss_cfg, const LossToggles& toggles,
                         const EpochEval& epoch_eval = nullptr, long first_step = 0);

struct TwoStageConfig {
    StageConfig pretrain;   // defaults: lr 1e-4, 20 epochs, train split
    StageConfig finetune;   // defaults: lr 1e-5, 20 epochs, finetune split
    SamplerConfig sampler;
    LossConfig loss;
    LossToggles toggles;
    bool run_finetune = true;  // the ablation grid's FT axis
    uint64_t init_seed = 5;
};

TwoStageConfig default_two_stage();

struct TrainResult {
    ModelParams params;
    TrainHistory history;
    ModelParams stage1_params;  // snapshot after pretraining
};

TrainResult run_two_stage(const Dataset& dataset, const ModelConfig& model_cfg,
                          const TwoStageConfig& cfg, const EpochEval& epoch_eval = nullptr);

// Cached pooled features + per-sample anchors for one split (encoding input).
struct EncodedPool {
    std::vector<int> indices;           // dataset sample indices
    Tensor pooled;                      // [n x pooled_dim]
    Tensor anchors;                     // [n x base_dim]
    std::vector<int> labels;
    std::vector<std::string> languages;
};

EncodedPool build_encoded_pool(const Dataset& dataset, Split split, const ModelConfig& cfg);

}  // namespace wordspot
