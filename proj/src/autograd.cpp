#include "wordspot/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace wordspot {

namespace {

NodePtr make_node(Tensor value, std::vector<NodePtr> parents,
                  std::function<void(Node&)> backprop) {
    bool needs_grad = false;
    for (const auto& p : parents) needs_grad = needs_grad || p->requires_grad;
    auto node = std::make_shared<Node>(std::move(value), needs_grad);
    if (needs_grad) {
        node->parents = std::move(parents);
        node->backprop = std::move(backprop);
    }
    return node;
}

void check_same_shape(const NodePtr& a, const NodePtr& b, const char* op) {
    if (!a->value.same_shape(b->value)) {
        raise(ErrorCode::dimension, std::string(op) + ": shape mismatch " +
                                        a->value.shape_str() + " vs " + b->value.shape_str());
    }
}

void check_matrix(const NodePtr& a, const char* op) {
    if (a->value.ndim() != 2) {
        raise(ErrorCode::dimension, std::string(op) + ": expected rank-2 tensor, got " +
                                        a->value.shape_str());
    }
}

}  // namespace

NodePtr constant(Tensor value) { return std::make_shared<Node>(std::move(value), false); }

NodePtr parameter(Tensor value) { return std::make_shared<Node>(std::move(value), true); }

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
    check_matrix(a, "matmul");
    check_matrix(b, "matmul");
    const int m = a->value.shape[0], k = a->value.shape[1];
    const int k2 = b->value.shape[0], n = b->value.shape[1];
    if (k != k2) {
        raise(ErrorCode::dimension, "matmul: inner dimensions disagree " +
                                        a->value.shape_str() + " vs " + b->value.shape_str());
    }
    Tensor out = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double aip = a->value.at(i, p);
            if (aip == 0.0) continue;
            for (int j = 0; j < n; ++j) out.at(i, j) += aip * b->value.at(p, j);
        }
    }
    return make_node(std::move(out), {a, b}, [a, b, m, k, n](Node& self) {
        // dA += dC * B^T ; dB += A^T * dC
        if (a->requires_grad) {
            for (int i = 0; i < m; ++i)
                for (int p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j) acc += self.grad.at(i, j) * b->value.at(p, j);
                    a->grad.at(i, p) += acc;
                }
        }
        if (b->requires_grad) {
            for (int p = 0; p < k; ++p)
                for (int j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (int i = 0; i < m; ++i) acc += a->value.at(i, p) * self.grad.at(i, j);
                    b->grad.at(p, j) += acc;
                }
        }
    });
}

NodePtr transpose(const NodePtr& a) {
    check_matrix(a, "transpose");
    const int m = a->value.shape[0], n = a->value.shape[1];
    Tensor out = Tensor::zeros({n, m});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(j, i) = a->value.at(i, j);
    return make_node(std::move(out), {a}, [a, m, n](Node& self) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) a->grad.at(i, j) += self.grad.at(j, i);
    });
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
    check_same_shape(a, b, "add");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->value.data[i];
    return make_node(std::move(out), {a, b}, [a, b](Node& self) {
        for (std::size_t i = 0; i < self.grad.data.size(); ++i) {
            if (a->requires_grad) a->grad.data[i] += self.grad.data[i];
            if (b->requires_grad) b->grad.data[i] += self.grad.data[i];
        }
    });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b->value.data[i];
    return make_node(std::move(out), {a, b}, [a, b](Node& self) {
        for (std::size_t i = 0; i < self.grad.data.size(); ++i) {
            if (a->requires_grad) a->grad.data[i] += self.grad.data[i];
            if (b->requires_grad) b->grad.data[i] -= self.grad.data[i];
        }
    });
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
    check_same_shape(a, b, "mul");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b->value.data[i];
    return make_node(std::move(out), {a, b}, [a, b](Node& self) {
        for (std::size_t i = 0; i < self.grad.data.size(); ++i) {
            if (a->requires_grad) a->grad.data[i] += self.grad.data[i] * b->value.data[i];
            if (b->requires_grad) b->grad.data[i] += self.grad.data[i] * a->value.data[i];
        }
    });
}

NodePtr scale(const NodePtr& a, double k) { return affine(a, k, 0.0); }

NodePtr affine(const NodePtr& a, double k, double b) {
    Tensor out = a->value;
    for (double& x : out.data) x = k * x + b;
    return make_node(std::move(out), {a}, [a, k](Node& self) {
        for (std::size_t i = 0; i < self.grad.data.size(); ++i)
            a->grad.data[i] += k * self.grad.data[i];
    });
}

NodePtr tanh_op(const NodePtr& a) {
    Tensor out = a->value;
    for (double& x : out.data) x = std::tanh(x);
    return make_node(std::move(out), {a}, [a](Node& self) {
        for (std::size_t i = 0; i < self.grad.data.size(); ++i) {
            const double t = self.value.data[i];
            a->grad.data[i] += self.grad.data[i] * (1.0 - t * t);
        }
    });
}

NodePtr relu_op(const NodePtr& a) {
    Tensor out = a->value;
    for (double& x : out.data) x = x > 0.0 ? x : 0.0;
    return make_node(std::move(out), {a}, [a](Node& self) {
        for (std::size_t i = 0; i < self.grad.data.size(); ++i) {
            if (a->value.data[i] > 0.0) a->grad.data[i] += self.grad.data[i];
        }
    });
}

NodePtr exp_op(const NodePtr& a) {
    Tensor out = a->value;
    for (double& x : out.data) x = std::exp(x);
    return make_node(std::move(out), {a}, [a](Node& self) {
        for (std::size_t i = 0; i < self.grad.data.size(); ++i)
            a->grad.data[i] += self.grad.data[i] * self.value.data[i];
    });
}

NodePtr log_op(const NodePtr& a) {
    Tensor out = a->value;
    for (double& x : out.data) x = std::log(x);
    return make_node(std::move(out), {a}, [a](Node& self) {
        for (std::size_t i = 0; i < self.grad.data.size(); ++i)
            a->grad.data[i] += self.grad.data[i] / a->value.data[i];
    });
}

NodePtr sum(const NodePtr& a) {
    double acc = 0.0;
    for (double x : a->value.data) acc += x;
    return make_node(Tensor::scalar(acc), {a}, [a](Node& self) {
        const double g = self.grad.data[0];
        for (double& gx : a->grad.data) gx += g;
    });
}

NodePtr mean(const NodePtr& a) {
    const double n = static_cast<double>(a->value.numel());
    double acc = 0.0;
    for (double x : a->value.data) acc += x;
    return make_node(Tensor::scalar(acc / n), {a}, [a, n](Node& self) {
        const double g = self.grad.data[0] / n;
        for (double& gx : a->grad.data) gx += g;
    });
}

NodePtr add_rowvec(const NodePtr& a, const NodePtr& v) {
    check_matrix(a, "add_rowvec");
    if (v->value.ndim() != 1 || v->value.shape[0] != a->value.shape[1]) {
        raise(ErrorCode::dimension, "add_rowvec: bias shape " + v->value.shape_str() +
                                        " does not match matrix " + a->value.shape_str());
    }
    const int m = a->value.shape[0], n = a->value.shape[1];
    Tensor out = a->value;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(i, j) += v->value.at(j);
    return make_node(std::move(out), {a, v}, [a, v, m, n](Node& self) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                const double g = self.grad.at(i, j);
                if (a->requires_grad) a->grad.at(i, j) += g;
                if (v->requires_grad) v->grad.at(j) += g;
            }
    });
}

NodePtr scalar_mul(const NodePtr& s, const NodePtr& a) {
    if (!s->value.is_scalar()) {
        raise(ErrorCode::dimension, "scalar_mul: scalar operand has shape " + s->value.shape_str());
    }
    const double sv = s->value.data[0];
    Tensor out = a->value;
    for (double& x : out.data) x *= sv;
    return make_node(std::move(out), {s, a}, [s, a, sv](Node& self) {
        if (s->requires_grad) {
            double acc = 0.0;
            for (std::size_t i = 0; i < self.grad.data.size(); ++i)
                acc += self.grad.data[i] * a->value.data[i];
            s->grad.data[0] += acc;
        }
        if (a->requires_grad) {
            for (std::size_t i = 0; i < self.grad.data.size(); ++i)
                a->grad.data[i] += self.grad.data[i] * sv;
        }
    });
}

NodePtr row_logsumexp(const NodePtr& a) {
    check_matrix(a, "row_logsumexp");
    const int m = a->value.shape[0], n = a->value.shape[1];
    Tensor out = Tensor::zeros({m});
    for (int i = 0; i < m; ++i) {
        double mx = a->value.at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, a->value.at(i, j));
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += std::exp(a->value.at(i, j) - mx);
        out.at(i) = mx + std::log(acc);
    }
    return make_node(std::move(out), {a}, [a, m, n](Node& self) {
        // d lse / d a_ij = softmax(a_i)_j
        for (int i = 0; i < m; ++i) {
            const double g = self.grad.at(i);
            if (g == 0.0) continue;
            const double lse = self.value.at(i);
            for (int j = 0; j < n; ++j)
                a->grad.at(i, j) += g * std::exp(a->value.at(i, j) - lse);
        }
    });
}

NodePtr take_diag(const NodePtr& a) {
    check_matrix(a, "take_diag");
    const int m = a->value.shape[0], n = a->value.shape[1];
    if (m != n) raise(ErrorCode::dimension, "take_diag: matrix is not square " + a->value.shape_str());
    Tensor out = Tensor::zeros({n});
    for (int i = 0; i < n; ++i) out.at(i) = a->value.at(i, i);
    return make_node(std::move(out), {a}, [a, n](Node& self) {
        for (int i = 0; i < n; ++i) a->grad.at(i, i) += self.grad.at(i);
    });
}

NodePtr concat_rows(const NodePtr& a, const NodePtr& b) {
    check_matrix(a, "concat_rows");
    check_matrix(b, "concat_rows");
    const int ma = a->value.shape[0], mb = b->value.shape[0], n = a->value.shape[1];
    if (b->value.shape[1] != n) {
        raise(ErrorCode::dimension, "concat_rows: column counts differ " +
                                        a->value.shape_str() + " vs " + b->value.shape_str());
    }
    Tensor out = Tensor::zeros({ma + mb, n});
    std::copy(a->value.data.begin(), a->value.data.end(), out.data.begin());
    std::copy(b->value.data.begin(), b->value.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(a->value.numel()));
    return make_node(std::move(out), {a, b}, [a, b](Node& self) {
        const std::size_t na = a->value.numel();
        if (a->requires_grad)
            for (std::size_t i = 0; i < na; ++i) a->grad.data[i] += self.grad.data[i];
        if (b->requires_grad)
            for (std::size_t i = 0; i < b->value.numel(); ++i)
                b->grad.data[i] += self.grad.data[na + i];
    });
}

NodePtr l2_normalize(const NodePtr& a) {
    const bool is_vec = a->value.ndim() == 1;
    if (!is_vec) check_matrix(a, "l2_normalize");
    const int m = is_vec ? 1 : a->value.shape[0];
    const int n = is_vec ? a->value.shape[0] : a->value.shape[1];
    Tensor out = a->value;
    std::vector<double> norms(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double sq = 0.0;
        for (int j = 0; j < n; ++j) {
            const double x = a->value.data[static_cast<std::size_t>(i) * n + j];
            sq += x * x;
        }
        const double nrm = std::sqrt(sq);
        if (nrm < 1e-12) {
            raise(ErrorCode::degenerate,
                  "l2_normalize: degenerate vector (norm " + std::to_string(nrm) +
                      ") at row " + std::to_string(i));
        }
        norms[static_cast<std::size_t>(i)] = nrm;
        for (int j = 0; j < n; ++j) out.data[static_cast<std::size_t>(i) * n + j] /= nrm;
    }
    return make_node(std::move(out), {a}, [a, m, n, norms](Node& self) {
        // Per row: dx = (du - (du . u) u) / |x|
        for (int i = 0; i < m; ++i) {
            const std::size_t base = static_cast<std::size_t>(i) * n;
            double dot = 0.0;
            for (int j = 0; j < n; ++j)
                dot += self.grad.data[base + j] * self.value.data[base + j];
            const double inv = 1.0 / norms[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j)
                a->grad.data[base + j] +=
                    (self.grad.data[base + j] - dot * self.value.data[base + j]) * inv;
        }
    });
}

void backward(const NodePtr& loss) {
    if (!loss->value.is_scalar()) {
        raise(ErrorCode::invalid_argument,
              "backward: root must be scalar, got shape " + loss->value.shape_str());
    }
    // Iterative post-order DFS for the reverse topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.get(), 0);
    visited.insert(loss.get());
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            Node* child = node->parents[next_child++].get();
            if (child->requires_grad && visited.insert(child).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    // Interior nodes get fresh grad buffers per sweep; leaf parameters keep
    // accumulating until the caller zeroes them.
    for (Node* node : order) {
        if (node->backprop) node->grad.fill(0.0);
    }
    loss->grad.data[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backprop) node->backprop(*node);
    }
}

}  // namespace wordspot
