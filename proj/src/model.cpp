#include "wordspot/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

using nlohmann::json;

namespace wordspot {

namespace {

constexpr double kLogTempMin = -4.605170185988091;  // ln 0.01
constexpr double kLogTempMax = 0.0;                 // ln 1.0

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian; big-endian hosts are unsupported");

Tensor unit_gaussian_vector(int dim, uint64_t seed) {
    Rng rng(seed);
    Tensor v = Tensor::zeros({dim});
    double sq = 0.0;
    for (int i = 0; i < dim; ++i) {
        v.at(i) = rng.normal();
        sq += v.at(i) * v.at(i);
    }
    const double norm = std::sqrt(sq);
    if (norm < 1e-12) raise(ErrorCode::internal, "anchor draw produced a zero vector");
    for (int i = 0; i < dim; ++i) v.at(i) /= norm;
    return v;
}

Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    Tensor w = Tensor::zeros({fan_in, fan_out});
    for (double& x : w.data) x = rng.uniform(-a, a);
    return w;
}

}  // namespace

void AnchorConfig::validate() const {
    if (base_dim < embed_dim) {
        raise(ErrorCode::config, "anchor: base_dim must be >= embed_dim");
    }
    if (language_offset_beta < 0.0 || language_offset_beta > 1.0) {
        raise(ErrorCode::config, "anchor: language_offset_beta must lie in [0, 1]");
    }
    if (embed_dim < 2) raise(ErrorCode::config, "anchor: embed_dim must be >= 2");
}

Tensor anchor_base(int semantic_id, const std::string& language, const AnchorConfig& cfg) {
    if (semantic_id < 0) raise(ErrorCode::invalid_argument, "anchor: negative semantic_id");
    if (std::find(cfg.languages.begin(), cfg.languages.end(), language) == cfg.languages.end()) {
        raise(ErrorCode::invalid_argument, "anchor: unknown language '" + language + "'");
    }
    const uint64_t class_seed = hash_combine(cfg.anchor_seed, static_cast<uint64_t>(semantic_id));
    Tensor u = unit_gaussian_vector(cfg.base_dim, class_seed);
    if (cfg.language_offset_beta > 0.0) {
        const Tensor delta = unit_gaussian_vector(cfg.base_dim, hash_str(class_seed, language));
        double sq = 0.0;
        for (int i = 0; i < cfg.base_dim; ++i) {
            u.at(i) += cfg.language_offset_beta * delta.at(i);
            sq += u.at(i) * u.at(i);
        }
        const double norm = std::sqrt(sq);
        for (int i = 0; i < cfg.base_dim; ++i) u.at(i) /= norm;
    }
    return u;
}

int ModelConfig::pooled_dim() const {
    return (canvas_height / pool) * (canvas_width / pool);
}

void ModelConfig::validate() const {
    anchor.validate();
    if (pool < 1 || canvas_height % pool != 0 || canvas_width % pool != 0) {
        raise(ErrorCode::config, "model: canvas must tile exactly into pool patches");
    }
    if (hidden_dim < 2) raise(ErrorCode::config, "model: hidden_dim must be >= 2");
    if (temperature_init < 0.01 || temperature_init > 1.0) {
        raise(ErrorCode::config, "model: temperature_init must lie in [0.01, 1.0]");
    }
}

std::vector<Tensor*> ModelParams::trainable() {
    return {&w1, &b1, &w2, &b2, &w3, &b3, &text_proj, &log_temperature};
}

std::vector<const Tensor*> ModelParams::trainable() const {
    return {&w1, &b1, &w2, &b2, &w3, &b3, &text_proj, &log_temperature};
}

std::vector<std::string> ModelParams::names() const {
    return {"w1", "b1", "w2", "b2", "w3", "b3", "text_proj", "log_temperature"};
}

std::size_t ModelParams::param_count() const {
    std::size_t n = 0;
    for (const Tensor* t : trainable()) n += t->numel();
    return n;
}

double ModelParams::temperature() const { return std::exp(log_temperature.data[0]); }

void ModelParams::clamp_temperature() {
    log_temperature.data[0] = std::clamp(log_temperature.data[0], kLogTempMin, kLogTempMax);
}

ModelParams init_params(uint64_t seed, const ModelConfig& cfg) {
    cfg.validate();
    Rng rng(hash_combine(seed, 0x90de1));
    ModelParams p;
    p.cfg = cfg;
    const int pd = cfg.pooled_dim();
    const int h = cfg.hidden_dim;
    const int d = cfg.anchor.embed_dim;
    p.w1 = xavier_uniform(pd, h, rng);
    p.b1 = Tensor::zeros({h});
    p.w2 = xavier_uniform(h, h, rng);
    p.b2 = Tensor::zeros({h});
    p.w3 = xavier_uniform(h, d, rng);
    p.b3 = Tensor::zeros({d});
    p.text_proj = xavier_uniform(cfg.anchor.base_dim, d, rng);
    p.log_temperature = Tensor::scalar(std::log(cfg.temperature_init));
    return p;
}

Tensor pool_image(const Image& image, const ModelConfig& cfg) {
    if (image.height != cfg.canvas_height || image.width != cfg.canvas_width) {
        raise(ErrorCode::dimension, "encode_image: image is " + std::to_string(image.height) +
                                        "x" + std::to_string(image.width) + ", model expects " +
                                        std::to_string(cfg.canvas_height) + "x" +
                                        std::to_string(cfg.canvas_width));
    }
    const int ph = cfg.canvas_height / cfg.pool;
    const int pw = cfg.canvas_width / cfg.pool;
    Tensor out = Tensor::zeros({ph * pw});
    const double inv = 1.0 / (cfg.pool * cfg.pool);
    for (int i = 0; i < ph; ++i) {
        for (int j = 0; j < pw; ++j) {
            double acc = 0.0;
            for (int r = 0; r < cfg.pool; ++r)
                for (int c = 0; c < cfg.pool; ++c)
                    acc += image.at(i * cfg.pool + r, j * cfg.pool + c);
            out.at(i * pw + j) = acc * inv;
        }
    }
    return out;
}

ModelGraph make_graph(const ModelParams& params) {
    ModelGraph g;
    g.w1 = parameter(params.w1);
    g.b1 = parameter(params.b1);
    g.w2 = parameter(params.w2);
    g.b2 = parameter(params.b2);
    g.w3 = parameter(params.w3);
    g.b3 = parameter(params.b3);
    g.text_proj = parameter(params.text_proj);
    g.log_temperature = parameter(params.log_temperature);
    return g;
}

NodePtr encode_image_batch(const ModelGraph& g, const Tensor& pooled) {
    NodePtr x = constant(pooled);
    NodePtr h1 = tanh_op(add_rowvec(matmul(x, g.w1), g.b1));
    NodePtr h2 = tanh_op(add_rowvec(matmul(h1, g.w2), g.b2));
    NodePtr out = add_rowvec(matmul(h2, g.w3), g.b3);
    return l2_normalize(out);
}

NodePtr encode_text_batch(const ModelGraph& g, const Tensor& anchors) {
    return l2_normalize(matmul(constant(anchors), g.text_proj));
}

namespace {

// Plain forward helpers for the graph-free inference path.
std::vector<double> linear_tanh(const std::vector<double>& x, const Tensor& w, const Tensor& b,
                                bool apply_tanh) {
    const int n = w.shape[0], m = w.shape[1];
    std::vector<double> out(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        double acc = b.at(j);
        for (int i = 0; i < n; ++i) acc += x[static_cast<std::size_t>(i)] * w.at(i, j);
        out[static_cast<std::size_t>(j)] = apply_tanh ? std::tanh(acc) : acc;
    }
    return out;
}

Tensor normalized_vector(std::vector<double> v, const char* what) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm < 1e-12) {
        raise(ErrorCode::degenerate, std::string(what) + ": degenerate (near-zero) embedding");
    }
    for (double& x : v) x /= norm;
    return Tensor::vector(std::move(v));
}

}  // namespace

Tensor encode_image(const Image& image, const ModelParams& params) {
    const Tensor pooled = pool_image(image, params.cfg);
    std::vector<double> h = linear_tanh(pooled.data, params.w1, params.b1, true);
    h = linear_tanh(h, params.w2, params.b2, true);
    h = linear_tanh(h, params.w3, params.b3, false);
    return normalized_vector(std::move(h), "encode_image");
}

Tensor encode_text(int semantic_id, const std::string& language, const ModelParams& params) {
    const Tensor a = anchor_base(semantic_id, language, params.cfg.anchor);
    const int bd = params.cfg.anchor.base_dim, d = params.cfg.anchor.embed_dim;
    std::vector<double> z(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int i = 0; i < bd; ++i) acc += a.at(i) * params.text_proj.at(i, j);
        z[static_cast<std::size_t>(j)] = acc;
    }
    return normalized_vector(std::move(z), "encode_text");
}

// -- checkpoint io -----------------------------------------------------------

void save_checkpoint(const std::string& path, const ModelParams& params) {
    json tensors = json::array();
    const auto names = params.names();
    const auto ptrs = params.trainable();
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
        tensors.push_back(json{{"name", names[i]}, {"shape", ptrs[i]->shape}});
    }
    json header{{"format", "wordspot-ckpt"},
                {"version", 1},
                {"anchor",
                 {{"base_dim", params.cfg.anchor.base_dim},
                  {"embed_dim", params.cfg.anchor.embed_dim},
                  {"language_offset_beta", params.cfg.anchor.language_offset_beta},
                  {"anchor_seed", params.cfg.anchor.anchor_seed},
                  {"languages", params.cfg.anchor.languages}}},
                {"model",
                 {{"hidden_dim", params.cfg.hidden_dim},
                  {"canvas_height", params.cfg.canvas_height},
                  {"canvas_width", params.cfg.canvas_width},
                  {"pool", params.cfg.pool},
                  {"temperature_init", params.cfg.temperature_init}}},
                {"tensors", tensors}};

    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot open checkpoint '" + path + "' for writing");
    out << header.dump() << "\n";
    for (const Tensor* t : ptrs) {
        out.write(reinterpret_cast<const char*>(t->data.data()),
                  static_cast<std::streamsize>(t->data.size() * sizeof(double)));
    }
    if (!out) raise(ErrorCode::io, "failed writing checkpoint '" + path + "'");
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open checkpoint '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) raise(ErrorCode::format, "checkpoint '" + path + "' is empty");

    ModelParams p;
    json tensors;
    try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != "wordspot-ckpt") {
            raise(ErrorCode::format, "'" + path + "' is not a model checkpoint");
        }
        const json& a = header.at("anchor");
        p.cfg.anchor.base_dim = a.at("base_dim").get<int>();
        p.cfg.anchor.embed_dim = a.at("embed_dim").get<int>();
        p.cfg.anchor.language_offset_beta = a.at("language_offset_beta").get<double>();
        p.cfg.anchor.anchor_seed = a.at("anchor_seed").get<uint64_t>();
        p.cfg.anchor.languages = a.at("languages").get<std::vector<std::string>>();
        const json& m = header.at("model");
        p.cfg.hidden_dim = m.at("hidden_dim").get<int>();
        p.cfg.canvas_height = m.at("canvas_height").get<int>();
        p.cfg.canvas_width = m.at("canvas_width").get<int>();
        p.cfg.pool = m.at("pool").get<int>();
        p.cfg.temperature_init = m.at("temperature_init").get<double>();
        tensors = header.at("tensors");
    } catch (const json::exception& e) {
        raise(ErrorCode::format, "checkpoint header: " + std::string(e.what()));
    }

    const auto expected_names = p.names();
    if (tensors.size() != expected_names.size()) {
        raise(ErrorCode::format, "checkpoint: unexpected tensor count");
    }
    auto ptrs = p.trainable();
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
        std::string name;
        std::vector<int> shape;
        try {
            name = tensors[i].at("name").get<std::string>();
            shape = tensors[i].at("shape").get<std::vector<int>>();
        } catch (const json::exception& e) {
            raise(ErrorCode::format, "checkpoint tensor entry: " + std::string(e.what()));
        }
        if (name != expected_names[i]) {
            raise(ErrorCode::format, "checkpoint: tensor '" + name + "' out of order, expected '" +
                                         expected_names[i] + "'");
        }
        Tensor t = Tensor::zeros(shape);
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(t.data.size() * sizeof(double))) {
            raise(ErrorCode::io, "checkpoint '" + path + "' is truncated at tensor '" + name + "'");
        }
        *ptrs[i] = std::move(t);
    }
    p.cfg.validate();
    const int pd = p.cfg.pooled_dim(), h = p.cfg.hidden_dim, d = p.cfg.anchor.embed_dim;
    const std::vector<std::vector<int>> expected_shapes = {
        {pd, h}, {h}, {h, h}, {h}, {h, d}, {d}, {p.cfg.anchor.base_dim, d}, {1}};
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
        if (ptrs[i]->shape != expected_shapes[i]) {
            raise(ErrorCode::format, "checkpoint: tensor '" + expected_names[i] +
                                         "' has shape " + ptrs[i]->shape_str() +
                                         " inconsistent with its config");
        }
    }
    return p;
}

}  // namespace wordspot
