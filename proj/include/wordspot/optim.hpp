#pragma once

#include <string>
#include <vector>

#include "wordspot/tensor.hpp"

namespace wordspot {

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Per-parameter moments plus the shared step counter.
struct AdamWState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long t = 0;
};

AdamWState make_adamw_state(const std::vector<Tensor*>& params);

// One decoupled-weight-decay Adam step, in place:
//   p -= lr * wd * p                    (decay first, per contract)
//   m = b1*m + (1-b1)*g ; v = b2*v + (1-b2)*g^2
//   p -= lr * m_hat / (sqrt(v_hat) + eps)
void adamw_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                AdamWState& state, const AdamWConfig& cfg);

}  // namespace wordspot
