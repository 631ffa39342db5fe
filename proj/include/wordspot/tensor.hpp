#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "wordspot/common.hpp"

namespace wordspot {

// Dense row-major tensor of 64-bit reals. Rank 1 and 2 are the only shapes
// the rest of the library produces; no broadcasting beyond the explicit
// bias-over-rows op in the autograd layer.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> shape_in, std::vector<double> data_in);

    static Tensor zeros(const std::vector<int>& shape);
    static Tensor full(const std::vector<int>& shape, double value);
    static Tensor scalar(double value);
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(int rows, int cols, std::vector<double> values);
    static Tensor identity(int n);

    int ndim() const { return static_cast<int>(shape.size()); }
    std::size_t numel() const { return data.size(); }
    bool is_scalar() const { return numel() == 1; }

    int rows() const;
    int cols() const;

    double& at(int i) { return data[static_cast<std::size_t>(i)]; }
    double at(int i) const { return data[static_cast<std::size_t>(i)]; }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    std::string shape_str() const;

    void fill(double value);
    void ensure_finite(const std::string& what) const;
};

std::size_t shape_numel(const std::vector<int>& shape);

}  // namespace wordspot
