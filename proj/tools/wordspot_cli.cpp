// wordspot command-line front end. Talks to the engine exclusively through
// the C API in wordspot.h.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wordspot.h"

namespace {

struct ConfigDeleter {
    void operator()(ws_config* c) const { ws_config_free(c); }
};
using ConfigPtr = std::unique_ptr<ws_config, ConfigDeleter>;

[[noreturn]] void die(const char* what, ws_status status) {
    std::fprintf(stderr, "wordspot %s failed (%s): %s\n", what, ws_status_name(status),
                 ws_last_error());
    std::exit(1);
}

ConfigPtr make_config(const std::string& config_path, const std::vector<std::string>& overrides) {
    ws_config* raw = nullptr;
    ws_status status =
        config_path.empty() ? ws_config_defaults(&raw) : ws_config_load(config_path.c_str(), &raw);
    if (status != WS_OK) die("config", status);
    ConfigPtr config(raw);
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "wordspot: --set expects key=value, got '%s'\n", kv.c_str());
            std::exit(1);
        }
        status = ws_config_set(config.get(), kv.substr(0, eq).c_str(),
                               kv.substr(eq + 1).c_str());
        if (status != WS_OK) die("config override", status);
    }
    return config;
}

// WORDSPOT_OUT_ROOT, when set, prefixes every relative output directory.
std::string resolve_out(const std::string& dir) {
    const char* root = std::getenv("WORDSPOT_OUT_ROOT");
    if (!root || dir.empty() || std::filesystem::path(dir).is_absolute()) return dir;
    return (std::filesystem::path(root) / dir).string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wordspot: cross-script handwritten word retrieval"};
    app.require_subcommand(1);

    std::string config_path, dataset_dir, run_dir, checkpoint, split = "ood_eval", out_dir;
    std::vector<std::string> overrides;
    bool show_defaults = false;
    unsigned long long seed_override = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file (JSON)");
        cmd->add_option("--set", overrides, "config override, dotted key=JSON value")
            ->take_all();
    };

    CLI::App* config_cmd = app.add_subcommand("config", "inspect configuration");
    config_cmd->add_flag("--defaults", show_defaults, "print the documented defaults");
    add_common(config_cmd);

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    add_common(gen);
    gen->add_option("--out", out_dir, "dataset output directory")->required();
    gen->add_option("--seed", seed_override, "dataset seed override");

    CLI::App* train = app.add_subcommand("train", "run the two-stage training");
    add_common(train);
    train->add_option("--data", dataset_dir, "dataset directory")->required();
    train->add_option("--out", run_dir, "run directory for checkpoints and logs")->required();

    CLI::App* eval = app.add_subcommand("eval", "within-language + mixed retrieval metrics");
    add_common(eval);
    eval->add_option("--ckpt", checkpoint, "model checkpoint")->required();
    eval->add_option("--data", dataset_dir, "dataset directory")->required();
    eval->add_option("--split", split, "evaluation split (default ood_eval)");
    eval->add_option("--out", out_dir, "report output directory")->required();

    CLI::App* cross = app.add_subcommand("cross-eval", "all ordered cross-lingual pairs");
    add_common(cross);
    cross->add_option("--ckpt", checkpoint, "model checkpoint")->required();
    cross->add_option("--data", dataset_dir, "dataset directory")->required();
    cross->add_option("--split", split, "evaluation split (default ood_eval)");
    cross->add_option("--out", out_dir, "report output directory")->required();

    CLI::App* character = app.add_subcommand("characterize", "embedding-space geometry");
    add_common(character);
    character->add_option("--ckpt", checkpoint, "model checkpoint")->required();
    character->add_option("--data", dataset_dir, "dataset directory")->required();
    character->add_option("--split", split, "split to characterize (default ood_eval)");
    character->add_option("--out", out_dir, "report output directory")->required();

    CLI::App* quant = app.add_subcommand("quantize", "int8 quantization + cost model");
    add_common(quant);
    quant->add_option("--ckpt", checkpoint, "model checkpoint")->required();
    quant->add_option("--data", dataset_dir, "dataset directory")->required();
    quant->add_option("--out", out_dir, "report output directory")->required();

    CLI::App* ablate = app.add_subcommand("ablate", "objective/fine-tuning ablation grid");
    add_common(ablate);
    ablate->add_option("--data", dataset_dir, "dataset directory")->required();
    ablate->add_option("--out", out_dir, "report output directory")->required();

    CLI11_PARSE(app, argc, argv);

    seed_set = gen->parsed() && gen->count("--seed") > 0;
    if (seed_set) {
        overrides.push_back("dataset.seed=" + std::to_string(seed_override));
    }
    ConfigPtr config = make_config(config_path, overrides);
    ws_status status = WS_OK;

    if (config_cmd->parsed()) {
        char* text = nullptr;
        status = ws_config_dump(config.get(), &text);
        if (status != WS_OK) die("config", status);
        std::fputs(text, stdout);
        ws_string_free(text);
        if (!show_defaults && config_path.empty() && overrides.empty()) {
            std::fprintf(stderr, "note: no --config given, these are the defaults\n");
        }
        return 0;
    }
    if (gen->parsed()) {
        status = ws_generate_dataset(config.get(), resolve_out(out_dir).c_str());
        if (status != WS_OK) die("gen", status);
        std::printf("dataset written to %s\n", resolve_out(out_dir).c_str());
        return 0;
    }
    if (train->parsed()) {
        status = ws_train(config.get(), dataset_dir.c_str(), resolve_out(run_dir).c_str());
        if (status != WS_OK) die("train", status);
        std::printf("run artifacts written to %s\n", resolve_out(run_dir).c_str());
        return 0;
    }
    if (eval->parsed()) {
        status = ws_evaluate(config.get(), checkpoint.c_str(), dataset_dir.c_str(), split.c_str(),
                             resolve_out(out_dir).c_str());
        if (status != WS_OK) die("eval", status);
        std::printf("metrics written to %s\n", resolve_out(out_dir).c_str());
        return 0;
    }
    if (cross->parsed()) {
        status = ws_cross_evaluate(config.get(), checkpoint.c_str(), dataset_dir.c_str(),
                                   split.c_str(), resolve_out(out_dir).c_str());
        if (status != WS_OK) die("cross-eval", status);
        std::printf("cross-lingual metrics written to %s\n", resolve_out(out_dir).c_str());
        return 0;
    }
    if (character->parsed()) {
        status = ws_characterize(config.get(), checkpoint.c_str(), dataset_dir.c_str(),
                                 split.c_str(), resolve_out(out_dir).c_str());
        if (status != WS_OK) die("characterize", status);
        std::printf("geometry report written to %s\n", resolve_out(out_dir).c_str());
        return 0;
    }
    if (quant->parsed()) {
        status = ws_quantize(config.get(), checkpoint.c_str(), dataset_dir.c_str(),
                             resolve_out(out_dir).c_str());
        if (status != WS_OK) die("quantize", status);
        std::printf("quantization artifacts written to %s\n", resolve_out(out_dir).c_str());
        return 0;
    }
    if (ablate->parsed()) {
        status = ws_ablate(config.get(), dataset_dir.c_str(), resolve_out(out_dir).c_str());
        if (status != WS_OK) die("ablate", status);
        std::printf("ablation table written to %s\n", resolve_out(out_dir).c_str());
        return 0;
    }
    return 1;
}
