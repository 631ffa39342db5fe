#include "wordspot/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace wordspot {

namespace {

json config_to_json(const RunConfig& c) {
    return json{
        {"lexicon",
         {{"num_classes", c.num_classes}, {"languages", c.languages}, {"seed", c.lexicon_seed}}},
        {"dataset",
         {{"seed", c.dataset.seed},
          {"canvas_height", c.dataset.canvas_height},
          {"canvas_width", c.dataset.canvas_width},
          {"train_per_class_per_lang", c.dataset.train_per_class_per_lang},
          {"finetune_per_class_per_lang", c.dataset.finetune_per_class_per_lang},
          {"id_eval_per_class_per_lang", c.dataset.id_eval_per_class_per_lang},
          {"ood_eval_per_class_per_lang", c.dataset.ood_eval_per_class_per_lang},
          {"distortion_scale", c.dataset.distortion_scale},
          {"styles",
           {{"train", {c.dataset.styles.train_begin, c.dataset.styles.train_end}},
            {"id_eval", {c.dataset.styles.id_eval_begin, c.dataset.styles.id_eval_end}},
            {"ood_eval", {c.dataset.styles.ood_eval_begin, c.dataset.styles.ood_eval_end}}}}}},
        {"model",
         {{"embed_dim", c.model.anchor.embed_dim},
          {"base_dim", c.model.anchor.base_dim},
          {"language_offset_beta", c.model.anchor.language_offset_beta},
          {"anchor_seed", c.model.anchor.anchor_seed},
          {"hidden_dim", c.model.hidden_dim},
          {"pool", c.model.pool},
          {"temperature_init", c.model.temperature_init}}},
        {"loss", {{"lambda", c.loss.lambda}, {"epsilon", c.loss.epsilon}}},
        {"sampler",
         {{"batch_size", c.sampler.batch_size},
          {"min_instances_per_class", c.sampler.min_instances_per_class},
          {"language_balance", c.sampler.language_balance},
          {"seed", c.sampler.seed}}},
        {"stages",
         {{"pretrain", {{"lr", c.pretrain_lr}, {"epochs", c.pretrain_epochs}}},
          {"finetune", {{"lr", c.finetune_lr}, {"epochs", c.finetune_epochs}}}}},
        {"optimizer",
         {{"beta1", c.optimizer.beta1},
          {"beta2", c.optimizer.beta2},
          {"eps", c.optimizer.eps},
          {"weight_decay", c.optimizer.weight_decay}}},
        {"ablation",
         {{"v2t", c.toggles.v2t},
          {"t2v", c.toggles.t2v},
          {"inv", c.toggles.inv},
          {"finetune_stage", c.finetune_stage}}},
        {"init_seed", c.init_seed},
        {"quant", {{"calibration_samples", c.calibration_samples}}},
        {"eval", {{"random_seed", c.eval_random_seed}}}};
}

// Rejects keys absent from the defaults tree and primitive/type mismatches.
void check_unknown_keys(const json& value, const json& reference, const std::string& path) {
    if (!value.is_object()) return;
    if (!reference.is_object()) {
        raise(ErrorCode::config, "config: '" + path + "' should not be an object");
    }
    for (const auto& [key, sub] : value.items()) {
        const std::string sub_path = path.empty() ? key : path + "." + key;
        if (!reference.contains(key)) {
            raise(ErrorCode::config, "config: unknown key '" + sub_path + "'");
        }
        check_unknown_keys(sub, reference.at(key), sub_path);
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

void read_style_range(const json& styles, const char* key, int& begin, int& end) {
    if (!styles.contains(key)) return;
    const auto range = styles.at(key).get<std::vector<int>>();
    if (range.size() != 2) {
        raise(ErrorCode::config, std::string("config: styles.") + key + " must be [begin, end)");
    }
    begin = range[0];
    end = range[1];
}

}  // namespace

void RunConfig::validate() const {
    if (num_classes < 2) raise(ErrorCode::config, "config: lexicon.num_classes must be >= 2");
    if (languages.empty()) raise(ErrorCode::config, "config: lexicon.languages must be non-empty");
    dataset.styles.validate();
    model.validate();
    loss.validate();
    if (pretrain_lr <= 0.0 || finetune_lr <= 0.0) {
        raise(ErrorCode::config, "config: stage learning rates must be positive");
    }
    if (pretrain_epochs < 1 || finetune_epochs < 1) {
        raise(ErrorCode::config, "config: stage epochs must be >= 1");
    }
    if (!toggles.any()) {
        raise(ErrorCode::config, "config: ablation disables every loss term");
    }
    if (calibration_samples < 16) {
        raise(ErrorCode::config, "config: quant.calibration_samples must be >= 16");
    }
    if (model.canvas_height != dataset.canvas_height ||
        model.canvas_width != dataset.canvas_width) {
        raise(ErrorCode::config, "config: model canvas and dataset canvas must agree");
    }
}

TwoStageConfig RunConfig::two_stage() const {
    TwoStageConfig ts = default_two_stage();
    ts.pretrain.lr = pretrain_lr;
    ts.pretrain.epochs = pretrain_epochs;
    ts.pretrain.optimizer = optimizer;
    ts.finetune.lr = finetune_lr;
    ts.finetune.epochs = finetune_epochs;
    ts.finetune.optimizer = optimizer;
    ts.sampler = sampler;
    ts.loss = loss;
    ts.toggles = toggles;
    ts.run_finetune = finetune_stage;
    ts.init_seed = init_seed;
    return ts;
}

RunConfig default_run_config() {
    RunConfig c;
    c.dataset.seed = 202;
    c.model.anchor.anchor_seed = 303;
    c.sampler.seed = 404;
    return c;
}

RunConfig config_from_json_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::config, std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig c = default_run_config();
    check_unknown_keys(j, config_to_json(c), "");
    try {
        if (j.contains("lexicon")) {
            const json& l = j.at("lexicon");
            c.num_classes = get_or(l, "num_classes", c.num_classes);
            c.languages = get_or(l, "languages", c.languages);
            c.lexicon_seed = get_or(l, "seed", c.lexicon_seed);
        }
        if (j.contains("dataset")) {
            const json& d = j.at("dataset");
            c.dataset.seed = get_or(d, "seed", c.dataset.seed);
            c.dataset.canvas_height = get_or(d, "canvas_height", c.dataset.canvas_height);
            c.dataset.canvas_width = get_or(d, "canvas_width", c.dataset.canvas_width);
            c.dataset.train_per_class_per_lang =
                get_or(d, "train_per_class_per_lang", c.dataset.train_per_class_per_lang);
            c.dataset.finetune_per_class_per_lang =
                get_or(d, "finetune_per_class_per_lang", c.dataset.finetune_per_class_per_lang);
            c.dataset.id_eval_per_class_per_lang =
                get_or(d, "id_eval_per_class_per_lang", c.dataset.id_eval_per_class_per_lang);
            c.dataset.ood_eval_per_class_per_lang =
                get_or(d, "ood_eval_per_class_per_lang", c.dataset.ood_eval_per_class_per_lang);
            c.dataset.distortion_scale = get_or(d, "distortion_scale", c.dataset.distortion_scale);
            if (d.contains("styles")) {
                const json& s = d.at("styles");
                read_style_range(s, "train", c.dataset.styles.train_begin,
                                 c.dataset.styles.train_end);
                read_style_range(s, "id_eval", c.dataset.styles.id_eval_begin,
                                 c.dataset.styles.id_eval_end);
                read_style_range(s, "ood_eval", c.dataset.styles.ood_eval_begin,
                                 c.dataset.styles.ood_eval_end);
            }
        }
        if (j.contains("model")) {
            const json& m = j.at("model");
            c.model.anchor.embed_dim = get_or(m, "embed_dim", c.model.anchor.embed_dim);
            c.model.anchor.base_dim = get_or(m, "base_dim", c.model.anchor.base_dim);
            c.model.anchor.language_offset_beta =
                get_or(m, "language_offset_beta", c.model.anchor.language_offset_beta);
            c.model.anchor.anchor_seed = get_or(m, "anchor_seed", c.model.anchor.anchor_seed);
            c.model.hidden_dim = get_or(m, "hidden_dim", c.model.hidden_dim);
            c.model.pool = get_or(m, "pool", c.model.pool);
            c.model.temperature_init = get_or(m, "temperature_init", c.model.temperature_init);
        }
        if (j.contains("loss")) {
            const json& l = j.at("loss");
            c.loss.lambda = get_or(l, "lambda", c.loss.lambda);
            c.loss.epsilon = get_or(l, "epsilon", c.loss.epsilon);
        }
        if (j.contains("sampler")) {
            const json& s = j.at("sampler");
            c.sampler.batch_size = get_or(s, "batch_size", c.sampler.batch_size);
            c.sampler.min_instances_per_class =
                get_or(s, "min_instances_per_class", c.sampler.min_instances_per_class);
            c.sampler.language_balance = get_or(s, "language_balance", c.sampler.language_balance);
            c.sampler.seed = get_or(s, "seed", c.sampler.seed);
        }
        if (j.contains("stages")) {
            const json& st = j.at("stages");
            if (st.contains("pretrain")) {
                c.pretrain_lr = get_or(st.at("pretrain"), "lr", c.pretrain_lr);
                c.pretrain_epochs = get_or(st.at("pretrain"), "epochs", c.pretrain_epochs);
            }
            if (st.contains("finetune")) {
                c.finetune_lr = get_or(st.at("finetune"), "lr", c.finetune_lr);
                c.finetune_epochs = get_or(st.at("finetune"), "epochs", c.finetune_epochs);
            }
        }
        if (j.contains("optimizer")) {
            const json& o = j.at("optimizer");
            c.optimizer.beta1 = get_or(o, "beta1", c.optimizer.beta1);
            c.optimizer.beta2 = get_or(o, "beta2", c.optimizer.beta2);
            c.optimizer.eps = get_or(o, "eps", c.optimizer.eps);
            c.optimizer.weight_decay = get_or(o, "weight_decay", c.optimizer.weight_decay);
        }
        if (j.contains("ablation")) {
            const json& a = j.at("ablation");
            c.toggles.v2t = get_or(a, "v2t", c.toggles.v2t);
            c.toggles.t2v = get_or(a, "t2v", c.toggles.t2v);
            c.toggles.inv = get_or(a, "inv", c.toggles.inv);
            c.finetune_stage = get_or(a, "finetune_stage", c.finetune_stage);
        }
        c.init_seed = get_or(j, "init_seed", c.init_seed);
        if (j.contains("quant")) {
            c.calibration_samples =
                get_or(j.at("quant"), "calibration_samples", c.calibration_samples);
        }
        if (j.contains("eval")) {
            c.eval_random_seed = get_or(j.at("eval"), "random_seed", c.eval_random_seed);
        }
    } catch (const json::exception& e) {
        raise(ErrorCode::config, std::string("config: ") + e.what());
    }
    // The canvas is owned by the dataset section; the model side mirrors it.
    c.model.canvas_height = c.dataset.canvas_height;
    c.model.canvas_width = c.dataset.canvas_width;
    c.model.anchor.languages = c.languages;
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str());
}

void apply_override(std::string& json_text, const std::string& dotted_key,
                    const std::string& value_json) {
    json j;
    try {
        j = json_text.empty() ? json::object() : json::parse(json_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::config, std::string("config: invalid JSON: ") + e.what());
    }
    json value;
    try {
        value = json::parse(value_json);
    } catch (const json::exception&) {
        value = value_json;  // bare strings are taken verbatim
    }
    json* cursor = &j;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = dotted_key.find('.', start);
        const std::string part = dotted_key.substr(start, dot - start);
        if (part.empty()) raise(ErrorCode::config, "config: empty segment in key override");
        if (dot == std::string::npos) {
            (*cursor)[part] = value;
            break;
        }
        cursor = &(*cursor)[part];
        start = dot + 1;
    }
    json_text = j.dump();
}

std::string config_to_json_text(const RunConfig& cfg) {
    return config_to_json(cfg).dump(2) + "\n";
}

}  // namespace wordspot
