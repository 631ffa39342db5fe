#pragma once

#include <cstdint>
#include <string>

#include "wordspot/dataset.hpp"
#include "wordspot/model.hpp"
#include "wordspot/objectives.hpp"
#include "wordspot/sampler.hpp"
#include "wordspot/trainer.hpp"

namespace wordspot {

// Every tunable of a run in one validated bundle. Loading rejects unknown
// keys; the documented defaults are exactly what default_run_config()
// serializes to.
struct RunConfig {
    // lexicon
    int num_classes = 20;
    std::vector<std::string> languages = {"en", "zh", "es"};
    uint64_t lexicon_seed = 101;
    // dataset
    GenerateConfig dataset;
    // model
    ModelConfig model;
    // loss / sampler / stages / optimizer
    LossConfig loss;
    SamplerConfig sampler;
    double pretrain_lr = 1e-4;
    int pretrain_epochs = 20;
    double finetune_lr = 1e-5;
    int finetune_epochs = 20;
    AdamWConfig optimizer;
    // ablation axes
    LossToggles toggles;
    bool finetune_stage = true;
    // seeds and misc
    uint64_t init_seed = 505;
    int calibration_samples = 64;
    uint64_t eval_random_seed = 606;

    void validate() const;
    TwoStageConfig two_stage() const;
};

RunConfig default_run_config();

RunConfig config_from_json_text(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Applies a dotted-path override, e.g. ("dataset.seed", "7") or
// ("ablation.inv", "false"). The value is parsed as JSON.
void apply_override(std::string& json_text, const std::string& dotted_key,
                    const std::string& value_json);

std::string config_to_json_text(const RunConfig& cfg);

}  // namespace wordspot
