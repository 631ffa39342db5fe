#include "wordspot/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wordspot/quant.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wordspot {

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << content;
    if (!out) raise(ErrorCode::io, "failed writing '" + path + "'");
}

// Timestamps live here and only here.
void write_run_info(const std::string& dir, const std::string& command) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    write_text((fs::path(dir) / "run_info.txt").string(),
               "command: " + command + "\nfinished: " + buf + "\n");
}

Dataset open_dataset(const std::string& dataset_dir) {
    return read_dataset(manifest_path_for(dataset_dir));
}

void check_dataset_matches(const RunConfig& cfg, const Dataset& ds) {
    if (ds.lexicon.num_classes() != cfg.num_classes || ds.lexicon.languages() != cfg.languages) {
        raise(ErrorCode::config, "dataset lexicon does not match the run config");
    }
    if (ds.manifest.canvas_height != cfg.dataset.canvas_height ||
        ds.manifest.canvas_width != cfg.dataset.canvas_width) {
        raise(ErrorCode::config, "dataset canvas does not match the run config");
    }
}

json result_to_json(const RetrievalResult& r, const std::string& protocol) {
    json top_k = json::array();
    for (int idx : r.ranking) top_k.push_back(idx);
    return json{{"query_id", r.query_id},
                {"protocol", protocol},
                {"rank", r.rank_of_ground_truth},
                {"top_k", top_k},
                {"top1_text", r.top1_text},
                {"gt_text", r.ground_truth_text}};
}

std::string history_to_jsonl(const TrainHistory& history) {
    std::string out;
    for (const StepRecord& s : history.steps) {
        out += json{{"type", "step"},
                    {"step", s.step},
                    {"stage", stage_name(s.stage)},
                    {"total", s.total},
                    {"contrastive", s.contrastive},
                    {"invariance", s.invariance},
                    {"temperature", s.temperature}}
                   .dump() +
               "\n";
    }
    for (const EpochRecord& e : history.epochs) {
        json j{{"type", "epoch"},
               {"epoch", e.epoch},
               {"stage", stage_name(e.stage)},
               {"mean_loss", e.mean_loss}};
        if (e.eval_acc1 >= 0.0) j["eval_acc1"] = e.eval_acc1;
        out += j.dump() + "\n";
    }
    return out;
}

Split parse_split(const std::string& name) { return split_from_name(name); }

}  // namespace

double within_language_acc1(const Dataset& dataset, Split split, const ModelParams& params) {
    double acc = 0.0;
    int n = 0;
    for (const std::string& lang : dataset.lexicon.languages()) {
        const auto results = eval_protocol(dataset, split, Protocol::within(lang), params);
        acc += summarize("within(" + lang + ")", results).acc1;
        ++n;
    }
    return acc / n;
}

TrainResult train_in_memory(const RunConfig& cfg, const Dataset& dataset) {
    return run_two_stage(dataset, cfg.model, cfg.two_stage());
}

void cmd_generate(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    if (fs::exists(manifest_path_for(out_dir))) {
        raise(ErrorCode::state,
              "dataset already exists at '" + out_dir + "' (datasets are never overwritten)");
    }
    const Lexicon lexicon = Lexicon::build(cfg.num_classes, cfg.languages, cfg.lexicon_seed);
    generate_dataset(lexicon, cfg.dataset, out_dir);
    write_run_info(out_dir, "gen");
}

void cmd_train(const RunConfig& cfg, const std::string& dataset_dir, const std::string& run_dir) {
    cfg.validate();
    const Dataset dataset = open_dataset(dataset_dir);
    check_dataset_matches(cfg, dataset);
    fs::create_directories(run_dir);
    const fs::path dir(run_dir);
    if (fs::exists(dir / "stage1.ckpt")) {
        raise(ErrorCode::state,
              "run directory '" + run_dir + "' already holds checkpoints (refusing to overwrite)");
    }

    TwoStageConfig ts = cfg.two_stage();
    TrainResult result = run_two_stage(dataset, cfg.model, ts, [&](const ModelParams& p) {
        return within_language_acc1(dataset, Split::id_eval, p);
    });

    write_text((dir / "config.json").string(), config_to_json_text(cfg));
    save_checkpoint((dir / "stage1.ckpt").string(), result.stage1_params);
    if (ts.run_finetune) {
        save_checkpoint((dir / "stage2.ckpt").string(), result.params);
    }
    write_text((dir / "history.log").string(), history_to_jsonl(result.history));
    write_run_info(run_dir, "train");
}

MetricsReport cmd_eval(const RunConfig& cfg, const std::string& checkpoint,
                       const std::string& dataset_dir, const std::string& split,
                       const std::string& out_dir) {
    cfg.validate();
    const Dataset dataset = open_dataset(dataset_dir);
    check_dataset_matches(cfg, dataset);
    const ModelParams params = load_checkpoint(checkpoint);
    const Split sp = parse_split(split);
    fs::create_directories(out_dir);

    MetricsReport report;
    report.metadata["checkpoint"] = fs::path(checkpoint).filename().string();
    report.metadata["split"] = split;
    report.metadata["dataset_seed"] = std::to_string(dataset.manifest.seed);

    std::string results_jsonl;
    std::vector<Protocol> protocols;
    for (const std::string& lang : dataset.lexicon.languages()) {
        protocols.push_back(Protocol::within(lang));
    }
    protocols.push_back(Protocol::mixed());
    for (const Protocol& protocol : protocols) {
        const auto results = eval_protocol(dataset, sp, protocol, params);
        for (const RetrievalResult& r : results) {
            results_jsonl += result_to_json(r, protocol.name()).dump() + "\n";
        }
        report.protocols.push_back(summarize(protocol.name(), results));
    }

    const fs::path dir(out_dir);
    write_text((dir / "results.jsonl").string(), results_jsonl);
    write_report(report, (dir / "metrics_report.json").string(), (dir / "metrics.csv").string());
    write_run_info(out_dir, "eval");
    return report;
}

MetricsReport cmd_cross_eval(const RunConfig& cfg, const std::string& checkpoint,
                             const std::string& dataset_dir, const std::string& split,
                             const std::string& out_dir) {
    cfg.validate();
    const Dataset dataset = open_dataset(dataset_dir);
    check_dataset_matches(cfg, dataset);
    const ModelParams params = load_checkpoint(checkpoint);
    const Split sp = parse_split(split);
    fs::create_directories(out_dir);

    MetricsReport report;
    report.metadata["checkpoint"] = fs::path(checkpoint).filename().string();
    report.metadata["split"] = split;
    report.metadata["dataset_seed"] = std::to_string(dataset.manifest.seed);

    // Ordered pairs, query language first, per the cross-lingual protocol.
    std::vector<Protocol> pairs;
    const auto& langs = dataset.lexicon.languages();
    if (langs == std::vector<std::string>{"en", "zh", "es"}) {
        // Canonical column order of the cross-lingual report.
        pairs = {Protocol::cross("en", "zh"), Protocol::cross("zh", "en"),
                 Protocol::cross("zh", "es"), Protocol::cross("es", "zh"),
                 Protocol::cross("es", "en"), Protocol::cross("en", "es")};
    } else {
        for (const std::string& a : langs)
            for (const std::string& b : langs)
                if (a != b) pairs.push_back(Protocol::cross(a, b));
    }

    std::string results_jsonl;
    double acc1_sum = 0.0, mrr_sum = 0.0, nes_sum = 0.0;
    for (const Protocol& protocol : pairs) {
        const auto results = eval_protocol(dataset, sp, protocol, params);
        for (const RetrievalResult& r : results) {
            results_jsonl += result_to_json(r, protocol.name()).dump() + "\n";
        }
        const ProtocolMetrics m = summarize(protocol.name(), results);
        acc1_sum += m.acc1;
        mrr_sum += m.mrr;
        nes_sum += m.nes;
        report.protocols.push_back(m);
    }
    ProtocolMetrics avg;
    avg.protocol = "average";
    avg.num_queries = 0;
    avg.acc1 = acc1_sum / pairs.size();
    avg.mrr = mrr_sum / pairs.size();
    avg.nes = nes_sum / pairs.size();
    // acc3/acc5 of the average row mirror the component means as well.
    for (const ProtocolMetrics& m : report.protocols) {
        avg.acc3 += m.acc3 / pairs.size();
        avg.acc5 += m.acc5 / pairs.size();
        avg.num_queries += m.num_queries;
    }
    report.protocols.push_back(avg);

    // Uniform-random ranker over the same queries (the baseline row).
    {
        double r1 = 0.0, rm = 0.0, rn = 0.0, r3 = 0.0, r5 = 0.0;
        int nq = 0;
        for (const Protocol& protocol : pairs) {
            const auto results = eval_protocol_random(dataset, sp, protocol, dataset.lexicon,
                                                      dataset.lexicon.languages(),
                                                      cfg.eval_random_seed);
            const ProtocolMetrics m = summarize(protocol.name(), results);
            r1 += m.acc1 / pairs.size();
            r3 += m.acc3 / pairs.size();
            r5 += m.acc5 / pairs.size();
            rm += m.mrr / pairs.size();
            rn += m.nes / pairs.size();
            nq += m.num_queries;
        }
        ProtocolMetrics random_row;
        random_row.protocol = "random";
        random_row.num_queries = nq;
        random_row.acc1 = r1;
        random_row.acc3 = r3;
        random_row.acc5 = r5;
        random_row.mrr = rm;
        random_row.nes = rn;
        report.protocols.push_back(random_row);
    }

    const fs::path dir(out_dir);
    write_text((dir / "cross_results.jsonl").string(), results_jsonl);
    write_report(report, (dir / "cross_report.json").string(),
                 (dir / "cross_metrics.csv").string());
    write_run_info(out_dir, "cross-eval");
    return report;
}

GeometryStats cmd_characterize(const RunConfig& cfg, const std::string& checkpoint,
                               const std::string& dataset_dir, const std::string& split,
                               const std::string& out_dir) {
    cfg.validate();
    const Dataset dataset = open_dataset(dataset_dir);
    check_dataset_matches(cfg, dataset);
    const ModelParams params = load_checkpoint(checkpoint);
    const Split sp = parse_split(split);
    fs::create_directories(out_dir);

    const auto indices = dataset.indices_of(sp);
    if (indices.empty()) raise(ErrorCode::infeasible, "characterize: empty split '" + split + "'");
    Tensor embeddings = Tensor::zeros({static_cast<int>(indices.size()),
                                       cfg.model.anchor.embed_dim});
    std::vector<int> labels(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const Sample& s = dataset.samples[static_cast<std::size_t>(indices[i])];
        const Tensor v = encode_image(s.image, params);
        for (int j = 0; j < cfg.model.anchor.embed_dim; ++j)
            embeddings.at(static_cast<int>(i), j) = v.at(j);
        labels[i] = s.semantic_id;
    }
    const GeometryStats stats = characterize(embeddings, labels);

    MetricsReport report;
    report.metadata["checkpoint"] = fs::path(checkpoint).filename().string();
    report.metadata["split"] = split;
    report.has_geometry = true;
    report.geometry = stats;
    write_report(report, (fs::path(out_dir) / "geometry_report.json").string(),
                 (fs::path(out_dir) / "geometry.csv").string());
    write_run_info(out_dir, "characterize");
    return stats;
}

QuantSummary cmd_quantize(const RunConfig& cfg, const std::string& checkpoint,
                          const std::string& dataset_dir, const std::string& out_dir) {
    cfg.validate();
    const Dataset dataset = open_dataset(dataset_dir);
    check_dataset_matches(cfg, dataset);
    const ModelParams params = load_checkpoint(checkpoint);
    fs::create_directories(out_dir);

    const auto train_indices = dataset.indices_of(Split::train);
    std::vector<const Image*> calibration;
    for (int idx : train_indices) {
        calibration.push_back(&dataset.samples[static_cast<std::size_t>(idx)].image);
        if (static_cast<int>(calibration.size()) >= cfg.calibration_samples) break;
    }
    const QuantModel qmodel = calibrate(params, calibration);
    save_quant_model((fs::path(out_dir) / "model_int8.qckpt").string(), qmodel);

    QuantSummary summary;
    const CostReport cost = cost_model(cfg.model);
    summary.weight_bytes_f32 = cost.weight_bytes_f32;
    summary.weight_bytes_int8 = cost.weight_bytes_int8;

    // Embedding agreement + retrieval comparison on the OOD split.
    const auto ood = dataset.indices_of(Split::ood_eval);
    if (ood.empty()) raise(ErrorCode::infeasible, "quantize: ood_eval split is empty");
    double cos_acc = 0.0;
    for (int idx : ood) {
        const Image& img = dataset.samples[static_cast<std::size_t>(idx)].image;
        const Tensor vf = encode_image(img, params);
        const Tensor vq = quantized_encode(img, qmodel);
        double dot = 0.0;
        for (std::size_t k = 0; k < vf.data.size(); ++k) dot += vf.data[k] * vq.data[k];
        cos_acc += dot;
    }
    summary.mean_cosine = cos_acc / static_cast<double>(ood.size());

    double facc = 0.0, qacc = 0.0;
    for (const std::string& lang : dataset.lexicon.languages()) {
        const Protocol protocol = Protocol::within(lang);
        facc += summarize(protocol.name(),
                          eval_protocol(dataset, Split::ood_eval, protocol, params))
                    .acc1;
        qacc += summarize(protocol.name(),
                          eval_protocol_with(dataset, Split::ood_eval, protocol, params,
                                             [&qmodel](const Image& img) {
                                                 return quantized_encode(img, qmodel);
                                             }))
                    .acc1;
    }
    const double n_langs = static_cast<double>(dataset.lexicon.languages().size());
    summary.float_acc1 = facc / n_langs;
    summary.quantized_acc1 = qacc / n_langs;

    json j{{"mean_cosine", summary.mean_cosine},
           {"float_acc1", summary.float_acc1},
           {"quantized_acc1", summary.quantized_acc1},
           {"acc1_drop", summary.float_acc1 - summary.quantized_acc1},
           {"weight_bytes_f32", cost.weight_bytes_f32},
           {"weight_bytes_int8", cost.weight_bytes_int8},
           {"mac_total", cost.mac_total},
           {"latency_ratio_f32_over_int8", cost.latency_ratio_f32_over_int8},
           {"energy_ratio_f32_over_int8", cost.energy_ratio_f32_over_int8},
           {"checkpoint", fs::path(checkpoint).filename().string()}};
    write_text((fs::path(out_dir) / "quant_report.json").string(), j.dump(2) + "\n");
    write_text((fs::path(out_dir) / "cost.csv").string(), cost_report_csv(cost));
    write_run_info(out_dir, "quantize");
    return summary;
}

std::vector<AblationRow> ablation_grid() {
    // Row order mirrors the objective/fine-tuning ablation table.
    std::vector<AblationRow> grid;
    const bool combos[7][3] = {{true, false, false}, {true, false, true},
                               {false, true, false}, {false, true, true},
                               {false, false, true}, {true, true, false},
                               {true, true, true}};
    for (const auto& combo : combos) {
        for (bool ft : {false, true}) {
            AblationRow row;
            row.v2t = combo[0];
            row.t2v = combo[1];
            row.inv = combo[2];
            row.finetune = ft;
            grid.push_back(row);
        }
    }
    return grid;
}

std::vector<AblationRow> cmd_ablate(const RunConfig& cfg, const std::string& dataset_dir,
                                    const std::string& out_dir) {
    cfg.validate();
    const Dataset dataset = open_dataset(dataset_dir);
    check_dataset_matches(cfg, dataset);
    fs::create_directories(out_dir);

    std::vector<AblationRow> rows = ablation_grid();
    // Each objective combo is trained once; the FT row continues from the
    // stage-1 snapshot.
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        RunConfig run = cfg;
        run.toggles.v2t = rows[i].v2t;
        run.toggles.t2v = rows[i].t2v;
        run.toggles.inv = rows[i].inv;
        run.finetune_stage = true;
        const TrainResult result = train_in_memory(run, dataset);

        auto fill = [&](AblationRow& row, const ModelParams& params) {
            double acc = 0.0, mrr_v = 0.0, nes_v = 0.0;
            for (const std::string& lang : dataset.lexicon.languages()) {
                const Protocol protocol = Protocol::within(lang);
                const ProtocolMetrics m = summarize(
                    protocol.name(), eval_protocol(dataset, Split::ood_eval, protocol, params));
                acc += m.acc1;
                mrr_v += m.mrr;
                nes_v += m.nes;
            }
            const double n = static_cast<double>(dataset.lexicon.languages().size());
            row.acc1 = acc / n;
            row.mrr = mrr_v / n;
            row.nes = nes_v / n;
        };
        fill(rows[i], result.stage1_params);
        fill(rows[i + 1], result.params);
    }

    std::string csv = "v2t,t2v,inv,ft,acc1,mrr,nes\n";
    json jrows = json::array();
    for (const AblationRow& row : rows) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%.6f,%.6f,%.6f\n", row.v2t ? 1 : 0,
                      row.t2v ? 1 : 0, row.inv ? 1 : 0, row.finetune ? 1 : 0, row.acc1, row.mrr,
                      row.nes);
        csv += buf;
        jrows.push_back(json{{"v2t", row.v2t},
                             {"t2v", row.t2v},
                             {"inv", row.inv},
                             {"ft", row.finetune},
                             {"acc1", row.acc1},
                             {"mrr", row.mrr},
                             {"nes", row.nes}});
    }
    write_text((fs::path(out_dir) / "ablation.csv").string(), csv);
    write_text((fs::path(out_dir) / "ablation_report.json").string(),
               json{{"rows", jrows}}.dump(2) + "\n");
    write_run_info(out_dir, "ablate");
    return rows;
}

}  // namespace wordspot
