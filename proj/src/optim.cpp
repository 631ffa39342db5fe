#include "wordspot/optim.hpp"

#include <cmath>

namespace wordspot {

AdamWState make_adamw_state(const std::vector<Tensor*>& params) {
    AdamWState state;
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Tensor* p : params) {
        state.m.push_back(Tensor::zeros(p->shape));
        state.v.push_back(Tensor::zeros(p->shape));
    }
    return state;
}

void adamw_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
                AdamWState& state, const AdamWConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        raise(ErrorCode::invalid_argument, "adamw_step: parameter/gradient/state count mismatch");
    }
    if (cfg.lr <= 0.0) raise(ErrorCode::invalid_argument, "adamw_step: lr must be positive");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        if (!p.same_shape(g) || !p.same_shape(state.m[k])) {
            raise(ErrorCode::dimension, "adamw_step: shape mismatch for parameter " +
                                            std::to_string(k));
        }
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            p.data[i] -= cfg.lr * cfg.weight_decay * p.data[i];
            m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
            v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
            const double m_hat = m.data[i] / bc1;
            const double v_hat = v.data[i] / bc2;
            p.data[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
        p.ensure_finite("adamw_step: parameter " + std::to_string(k));
    }
}

}  // namespace wordspot
