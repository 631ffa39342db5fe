#include "wordspot/tensor.hpp"

#include <cmath>
#include <sstream>

namespace wordspot {

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) raise(ErrorCode::dimension, "tensor shape entries must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
    if (shape_numel(shape) != data.size()) {
        raise(ErrorCode::dimension,
              "tensor data length " + std::to_string(data.size()) +
                  " does not match shape " + shape_str());
    }
}

Tensor Tensor::zeros(const std::vector<int>& shape) {
    return Tensor(shape, std::vector<double>(shape_numel(shape), 0.0));
}

Tensor Tensor::full(const std::vector<int>& shape, double value) {
    return Tensor(shape, std::vector<double>(shape_numel(shape), value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::identity(int n) {
    Tensor t = zeros({n, n});
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

int Tensor::rows() const {
    if (ndim() == 1) return 1;
    if (ndim() == 2) return shape[0];
    raise(ErrorCode::dimension, "rows() on tensor of rank " + std::to_string(ndim()));
}

int Tensor::cols() const {
    if (ndim() == 1) return shape[0];
    if (ndim() == 2) return shape[1];
    raise(ErrorCode::dimension, "cols() on tensor of rank " + std::to_string(ndim()));
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

void Tensor::fill(double value) {
    for (double& x : data) x = value;
}

void Tensor::ensure_finite(const std::string& what) const {
    for (double x : data) {
        if (!std::isfinite(x)) {
            raise(ErrorCode::degenerate, what + ": non-finite value encountered");
        }
    }
}

}  // namespace wordspot
