#pragma once

#include <string>

#include "wordspot/config.hpp"
#include "wordspot/metrics.hpp"

namespace wordspot {

// Orchestration layer behind the C API and the CLI. Every command writes
// its artifacts under the given directory; wall-clock information goes to a
// run_info.txt sidecar so the artifacts themselves are reproducible
// byte-for-byte.

void cmd_generate(const RunConfig& cfg, const std::string& out_dir);

// Trains per cfg (two stages unless ablation disables stage 2) and writes
// config.json, stage1.ckpt, [stage2.ckpt], history.log.
void cmd_train(const RunConfig& cfg, const std::string& dataset_dir, const std::string& run_dir);

// Within-language protocols for every language plus the mixed protocol on
// the chosen split; writes results.jsonl, metrics_report.json, metrics.csv.
MetricsReport cmd_eval(const RunConfig& cfg, const std::string& checkpoint,
                       const std::string& dataset_dir, const std::string& split,
                       const std::string& out_dir);

// All ordered language pairs (a -> b, a != b) plus the random-ranker
// baseline row; writes cross_results.jsonl, cross_report.json,
// cross_metrics.csv.
MetricsReport cmd_cross_eval(const RunConfig& cfg, const std::string& checkpoint,
                             const std::string& dataset_dir, const std::string& split,
                             const std::string& out_dir);

// Embedding-geometry statistics of the visual embeddings on a split.
GeometryStats cmd_characterize(const RunConfig& cfg, const std::string& checkpoint,
                               const std::string& dataset_dir, const std::string& split,
                               const std::string& out_dir);

struct QuantSummary {
    double mean_cosine = 0.0;       // quantized vs float embedding agreement
    double float_acc1 = 0.0;        // within-language average on ood_eval
    double quantized_acc1 = 0.0;
    long weight_bytes_f32 = 0;
    long weight_bytes_int8 = 0;
};

// Calibrates on the train split, writes model_int8.qckpt, quant_report.json
// and cost.csv, and compares the two inference paths on the OOD split.
QuantSummary cmd_quantize(const RunConfig& cfg, const std::string& checkpoint,
                          const std::string& dataset_dir, const std::string& out_dir);

struct AblationRow {
    bool v2t = false, t2v = false, inv = false, finetune = false;
    double acc1 = 0.0, mrr = 0.0, nes = 0.0;
};

// The 14-row objective x fine-tuning grid; OOD metrics are within-language
// averages. Writes ablation.csv and ablation_report.json.
std::vector<AblationRow> cmd_ablate(const RunConfig& cfg, const std::string& dataset_dir,
                                    const std::string& out_dir);

// Shared helper: within-language Acc@1 averaged over all languages of a
// split (the headline "desk OOD Acc@1" of reports).
double within_language_acc1(const Dataset& dataset, Split split, const ModelParams& params);

// The ablation grid rows in report order (without metrics), exposed for the
// acceptance suite's multi-seed averaging.
std::vector<AblationRow> ablation_grid();

// Trains per cfg in memory and returns the result (no artifacts written).
TrainResult train_in_memory(const RunConfig& cfg, const Dataset& dataset);

}  // namespace wordspot
