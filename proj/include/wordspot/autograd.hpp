#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wordspot/tensor.hpp"

namespace wordspot {

// Reverse-mode autodiff over a dynamically built DAG. Nodes are created by
// the op functions below; backward() runs one reverse topological sweep and
// accumulates into .grad (callers zero grads between batches).
struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;        // same shape as value, zero-initialized
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backprop;  // pushes this->grad into parents

    explicit Node(Tensor v, bool needs_grad = false)
        : value(std::move(v)), grad(Tensor::zeros(value.shape)), requires_grad(needs_grad) {}

    void zero_grad() { grad.fill(0.0); }
};

NodePtr constant(Tensor value);
NodePtr parameter(Tensor value);

// Core ops. Gradients follow the standard rules; every op validates shapes.
NodePtr matmul(const NodePtr& a, const NodePtr& b);
NodePtr transpose(const NodePtr& a);
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);  // elementwise
NodePtr scale(const NodePtr& a, double k);
NodePtr affine(const NodePtr& a, double k, double b);  // k*a + b elementwise
NodePtr tanh_op(const NodePtr& a);
NodePtr relu_op(const NodePtr& a);
NodePtr exp_op(const NodePtr& a);
NodePtr log_op(const NodePtr& a);
NodePtr sum(const NodePtr& a);   // -> [1]
NodePtr mean(const NodePtr& a);  // -> [1]

// Adds row vector v (shape [n]) to every row of a (shape [m x n]).
NodePtr add_rowvec(const NodePtr& a, const NodePtr& v);

// Multiplies every element of a by the scalar node s (shape [1]).
NodePtr scalar_mul(const NodePtr& s, const NodePtr& a);

// Stable log(sum(exp(row))) per row of an [m x n] matrix -> [m].
NodePtr row_logsumexp(const NodePtr& a);

// Diagonal of a square matrix -> [n].
NodePtr take_diag(const NodePtr& a);

// Vertical concatenation of two matrices with equal column counts.
NodePtr concat_rows(const NodePtr& a, const NodePtr& b);

// Unit-normalizes a rank-1 vector, or every row of a rank-2 matrix.
// Throws ErrorCode::degenerate when a norm falls below 1e-12 (encoder
// collapse signal per the training contract).
NodePtr l2_normalize(const NodePtr& a);

// Reverse sweep from a scalar root. Repeated calls accumulate into grads.
void backward(const NodePtr& loss);

}  // namespace wordspot
