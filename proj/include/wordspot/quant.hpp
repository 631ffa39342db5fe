#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wordspot/model.hpp"
#include "wordspot/tensor.hpp"

namespace wordspot {

// Symmetric per-tensor int8 quantization (zero point 0).
struct QuantTensor {
    std::vector<int> shape;
    std::vector<int8_t> values;
    double scale = 1.0;
};

QuantTensor quantize(const Tensor& t, double scale);
Tensor dequantize(const QuantTensor& q);

// scale = max|x| / 127, floored at 1e-8 for all-zero tensors.
double symmetric_scale(const Tensor& t);

// int8 visual encoder: quantized weights per layer plus calibrated
// activation scales at each quantization point. Biases stay in f64.
struct QuantModel {
    ModelConfig cfg;
    QuantTensor w1, w2, w3;
    Tensor b1, b2, b3;
    double act_scale_in = 1.0;   // pooled input
    double act_scale_h1 = 1.0;   // tanh output of layer 1
    double act_scale_h2 = 1.0;   // tanh output of layer 2
};

// Per-tensor weight scales from the weights themselves; activation scales
// from the max |activation| observed on the calibration batch (>= 16
// samples required).
QuantModel calibrate(const ModelParams& params, const std::vector<const Image*>& calibration);

// Integer matmuls with int32 accumulation, dequantize between layers,
// float tanh and final l2_normalize. Output comparable to the float path
// via cosine similarity.
Tensor quantized_encode(const Image& image, const QuantModel& qmodel);

struct LayerCost {
    std::string name;
    long macs = 0;
    long weight_elems = 0;
};

struct CostReport {
    std::vector<LayerCost> layers;
    long mac_total = 0;
    long pool_ops = 0;
    long weight_bytes_f32 = 0;
    long weight_bytes_int8 = 0;  // exactly f32/4, scales excluded
    long activation_bytes_f32 = 0;
    long activation_bytes_int8 = 0;
    // Declared linear model: latency ~ MACs x bytes/operand, energy ~ MACs x
    // per-MAC energy with an int8:f32 coefficient of 1:4. Not a hardware
    // estimate.
    double latency_ratio_f32_over_int8 = 0.0;
    double energy_ratio_f32_over_int8 = 0.0;
};

CostReport cost_model(const ModelConfig& cfg);

std::string cost_report_csv(const CostReport& report);

// Quantized model file: JSON header + int8 weight blobs + f64 bias blobs.
void save_quant_model(const std::string& path, const QuantModel& qmodel);
QuantModel load_quant_model(const std::string& path);

}  // namespace wordspot
