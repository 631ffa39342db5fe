#include "wordspot/quant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

using nlohmann::json;

namespace wordspot {

namespace {

constexpr double kScaleFloor = 1e-8;

int8_t quantize_one(double x, double scale) {
    const double q = std::nearbyint(x / scale);
    return static_cast<int8_t>(std::clamp(q, -127.0, 127.0));
}

// Row-vector [n] times int8 matrix [n x m] with int32 accumulation.
void int8_matvec(const std::vector<int8_t>& x, const QuantTensor& w, std::vector<int32_t>& acc) {
    const int n = w.shape[0], m = w.shape[1];
    acc.assign(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < n; ++i) {
        const int32_t xi = x[static_cast<std::size_t>(i)];
        if (xi == 0) continue;
        for (int j = 0; j < m; ++j) {
            const int32_t prod = xi * w.values[static_cast<std::size_t>(i) * m + j];
            // At the configured layer widths the accumulator cannot reach
            // +-2^31; the guard stays for misconfigured models.
            if (acc[static_cast<std::size_t>(j)] > std::numeric_limits<int32_t>::max() - prod &&
                prod > 0) {
                raise(ErrorCode::overflow, "quantized_encode: int32 accumulator overflow");
            }
            if (acc[static_cast<std::size_t>(j)] < std::numeric_limits<int32_t>::min() - prod &&
                prod < 0) {
                raise(ErrorCode::overflow, "quantized_encode: int32 accumulator overflow");
            }
            acc[static_cast<std::size_t>(j)] += prod;
        }
    }
}

std::vector<int8_t> quantize_activations(const std::vector<double>& x, double scale) {
    std::vector<int8_t> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = quantize_one(x[i], scale);
    return out;
}

double max_abs(const std::vector<double>& xs, double running) {
    for (double x : xs) running = std::max(running, std::fabs(x));
    return running;
}

}  // namespace

double symmetric_scale(const Tensor& t) {
    double m = 0.0;
    for (double x : t.data) m = std::max(m, std::fabs(x));
    return std::max(m / 127.0, kScaleFloor);
}

QuantTensor quantize(const Tensor& t, double scale) {
    if (scale <= 0.0) raise(ErrorCode::invalid_argument, "quantize: scale must be positive");
    QuantTensor q;
    q.shape = t.shape;
    q.scale = scale;
    q.values.resize(t.data.size());
    for (std::size_t i = 0; i < t.data.size(); ++i) q.values[i] = quantize_one(t.data[i], scale);
    return q;
}

Tensor dequantize(const QuantTensor& q) {
    Tensor t = Tensor::zeros(q.shape);
    for (std::size_t i = 0; i < q.values.size(); ++i) {
        t.data[i] = static_cast<double>(q.values[i]) * q.scale;
    }
    return t;
}

QuantModel calibrate(const ModelParams& params, const std::vector<const Image*>& calibration) {
    if (calibration.size() < 16) {
        raise(ErrorCode::invalid_argument,
              "calibrate: need >= 16 calibration samples, got " +
                  std::to_string(calibration.size()));
    }
    QuantModel qm;
    qm.cfg = params.cfg;
    qm.w1 = quantize(params.w1, symmetric_scale(params.w1));
    qm.w2 = quantize(params.w2, symmetric_scale(params.w2));
    qm.w3 = quantize(params.w3, symmetric_scale(params.w3));
    qm.b1 = params.b1;
    qm.b2 = params.b2;
    qm.b3 = params.b3;

    // Track activation ranges on the float path.
    double in_max = 0.0, h1_max = 0.0, h2_max = 0.0;
    const int pd = params.cfg.pooled_dim(), h = params.cfg.hidden_dim;
    for (const Image* img : calibration) {
        const Tensor pooled = pool_image(*img, params.cfg);
        in_max = max_abs(pooled.data, in_max);
        std::vector<double> h1(static_cast<std::size_t>(h), 0.0);
        for (int j = 0; j < h; ++j) {
            double acc = params.b1.at(j);
            for (int i = 0; i < pd; ++i) acc += pooled.at(i) * params.w1.at(i, j);
            h1[static_cast<std::size_t>(j)] = std::tanh(acc);
        }
        h1_max = max_abs(h1, h1_max);
        std::vector<double> h2(static_cast<std::size_t>(h), 0.0);
        for (int j = 0; j < h; ++j) {
            double acc = params.b2.at(j);
            for (int i = 0; i < h; ++i) acc += h1[static_cast<std::size_t>(i)] * params.w2.at(i, j);
            h2[static_cast<std::size_t>(j)] = std::tanh(acc);
        }
        h2_max = max_abs(h2, h2_max);
    }
    qm.act_scale_in = std::max(in_max / 127.0, kScaleFloor);
    qm.act_scale_h1 = std::max(h1_max / 127.0, kScaleFloor);
    qm.act_scale_h2 = std::max(h2_max / 127.0, kScaleFloor);
    return qm;
}

Tensor quantized_encode(const Image& image, const QuantModel& qmodel) {
    const Tensor pooled = pool_image(image, qmodel.cfg);
    const int h = qmodel.cfg.hidden_dim;
    const int d = qmodel.cfg.anchor.embed_dim;

    const std::vector<int8_t> xq = quantize_activations(pooled.data, qmodel.act_scale_in);
    std::vector<int32_t> acc;

    int8_matvec(xq, qmodel.w1, acc);
    std::vector<double> h1(static_cast<std::size_t>(h));
    for (int j = 0; j < h; ++j) {
        h1[static_cast<std::size_t>(j)] = std::tanh(
            acc[static_cast<std::size_t>(j)] * qmodel.act_scale_in * qmodel.w1.scale +
            qmodel.b1.at(j));
    }

    const std::vector<int8_t> h1q = quantize_activations(h1, qmodel.act_scale_h1);
    int8_matvec(h1q, qmodel.w2, acc);
    std::vector<double> h2(static_cast<std::size_t>(h));
    for (int j = 0; j < h; ++j) {
        h2[static_cast<std::size_t>(j)] = std::tanh(
            acc[static_cast<std::size_t>(j)] * qmodel.act_scale_h1 * qmodel.w2.scale +
            qmodel.b2.at(j));
    }

    const std::vector<int8_t> h2q = quantize_activations(h2, qmodel.act_scale_h2);
    int8_matvec(h2q, qmodel.w3, acc);
    Tensor out = Tensor::zeros({d});
    double sq = 0.0;
    for (int j = 0; j < d; ++j) {
        out.at(j) = acc[static_cast<std::size_t>(j)] * qmodel.act_scale_h2 * qmodel.w3.scale +
                    qmodel.b3.at(j);
        sq += out.at(j) * out.at(j);
    }
    const double norm = std::sqrt(sq);
    if (norm < 1e-12) {
        raise(ErrorCode::degenerate, "quantized_encode: degenerate embedding");
    }
    for (int j = 0; j < d; ++j) out.at(j) /= norm;
    return out;
}

CostReport cost_model(const ModelConfig& cfg) {
    CostReport report;
    const long pd = cfg.pooled_dim();
    const long h = cfg.hidden_dim;
    const long d = cfg.anchor.embed_dim;
    report.layers = {{"fc1", pd * h, pd * h + h},
                     {"fc2", h * h, h * h + h},
                     {"fc3", h * d, h * d + d}};
    long weight_elems = 0, act_elems = pd;
    for (const LayerCost& layer : report.layers) {
        report.mac_total += layer.macs;
        weight_elems += layer.weight_elems;
    }
    act_elems += h + h + d;
    report.pool_ops = static_cast<long>(cfg.canvas_height) * cfg.canvas_width;
    report.mac_total += report.pool_ops;
    report.weight_bytes_f32 = weight_elems * 4;
    report.weight_bytes_int8 = weight_elems;
    report.activation_bytes_f32 = act_elems * 4;
    report.activation_bytes_int8 = act_elems;
    report.latency_ratio_f32_over_int8 = 4.0;  // bytes-per-operand ratio
    report.energy_ratio_f32_over_int8 = 4.0;   // declared per-MAC energy ratio
    return report;
}

std::string cost_report_csv(const CostReport& report) {
    std::string out = "layer,macs,weight_elems\n";
    for (const LayerCost& layer : report.layers) {
        out += layer.name + "," + std::to_string(layer.macs) + "," +
               std::to_string(layer.weight_elems) + "\n";
    }
    out += "pool," + std::to_string(report.pool_ops) + ",0\n";
    out += "total," + std::to_string(report.mac_total) + ",\n";
    return out;
}

namespace {

void write_blob_i8(std::ofstream& out, const std::vector<int8_t>& v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
}

void write_blob_f64(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace

void save_quant_model(const std::string& path, const QuantModel& qm) {
    json header{{"format", "wordspot-qmodel"},
                {"version", 1},
                {"anchor",
                 {{"base_dim", qm.cfg.anchor.base_dim},
                  {"embed_dim", qm.cfg.anchor.embed_dim},
                  {"language_offset_beta", qm.cfg.anchor.language_offset_beta},
                  {"anchor_seed", qm.cfg.anchor.anchor_seed},
                  {"languages", qm.cfg.anchor.languages}}},
                {"model",
                 {{"hidden_dim", qm.cfg.hidden_dim},
                  {"canvas_height", qm.cfg.canvas_height},
                  {"canvas_width", qm.cfg.canvas_width},
                  {"pool", qm.cfg.pool},
                  {"temperature_init", qm.cfg.temperature_init}}},
                {"weights",
                 {{"w1", {{"shape", qm.w1.shape}, {"scale", qm.w1.scale}}},
                  {"w2", {{"shape", qm.w2.shape}, {"scale", qm.w2.scale}}},
                  {"w3", {{"shape", qm.w3.shape}, {"scale", qm.w3.scale}}}}},
                {"activation_scales",
                 {{"in", qm.act_scale_in}, {"h1", qm.act_scale_h1}, {"h2", qm.act_scale_h2}}}};
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << header.dump() << "\n";
    write_blob_i8(out, qm.w1.values);
    write_blob_i8(out, qm.w2.values);
    write_blob_i8(out, qm.w3.values);
    write_blob_f64(out, qm.b1.data);
    write_blob_f64(out, qm.b2.data);
    write_blob_f64(out, qm.b3.data);
    if (!out) raise(ErrorCode::io, "failed writing '" + path + "'");
}

QuantModel load_quant_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open quant model '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) raise(ErrorCode::format, "quant model '" + path + "' is empty");

    QuantModel qm;
    try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != "wordspot-qmodel") {
            raise(ErrorCode::format, "'" + path + "' is not a quantized model file");
        }
        const json& a = header.at("anchor");
        qm.cfg.anchor.base_dim = a.at("base_dim").get<int>();
        qm.cfg.anchor.embed_dim = a.at("embed_dim").get<int>();
        qm.cfg.anchor.language_offset_beta = a.at("language_offset_beta").get<double>();
        qm.cfg.anchor.anchor_seed = a.at("anchor_seed").get<uint64_t>();
        qm.cfg.anchor.languages = a.at("languages").get<std::vector<std::string>>();
        const json& m = header.at("model");
        qm.cfg.hidden_dim = m.at("hidden_dim").get<int>();
        qm.cfg.canvas_height = m.at("canvas_height").get<int>();
        qm.cfg.canvas_width = m.at("canvas_width").get<int>();
        qm.cfg.pool = m.at("pool").get<int>();
        qm.cfg.temperature_init = m.at("temperature_init").get<double>();
        const json& w = header.at("weights");
        qm.w1.shape = w.at("w1").at("shape").get<std::vector<int>>();
        qm.w1.scale = w.at("w1").at("scale").get<double>();
        qm.w2.shape = w.at("w2").at("shape").get<std::vector<int>>();
        qm.w2.scale = w.at("w2").at("scale").get<double>();
        qm.w3.shape = w.at("w3").at("shape").get<std::vector<int>>();
        qm.w3.scale = w.at("w3").at("scale").get<double>();
        const json& s = header.at("activation_scales");
        qm.act_scale_in = s.at("in").get<double>();
        qm.act_scale_h1 = s.at("h1").get<double>();
        qm.act_scale_h2 = s.at("h2").get<double>();
    } catch (const json::exception& e) {
        raise(ErrorCode::format, "quant model header: " + std::string(e.what()));
    }

    auto read_i8 = [&](QuantTensor& q) {
        q.values.resize(shape_numel(q.shape));
        in.read(reinterpret_cast<char*>(q.values.data()),
                static_cast<std::streamsize>(q.values.size()));
        if (in.gcount() != static_cast<std::streamsize>(q.values.size())) {
            raise(ErrorCode::io, "quant model '" + path + "' is truncated");
        }
    };
    auto read_f64 = [&](Tensor& t, int n) {
        t = Tensor::zeros({n});
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(t.data.size() * sizeof(double))) {
            raise(ErrorCode::io, "quant model '" + path + "' is truncated");
        }
    };
    read_i8(qm.w1);
    read_i8(qm.w2);
    read_i8(qm.w3);
    read_f64(qm.b1, qm.cfg.hidden_dim);
    read_f64(qm.b2, qm.cfg.hidden_dim);
    read_f64(qm.b3, qm.cfg.anchor.embed_dim);
    qm.cfg.validate();
    return qm;
}

}  // namespace wordspot
