#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "wordspot/autograd.hpp"
#include "wordspot/common.hpp"
#include "wordspot/tensor.hpp"

namespace testutil {

// Central finite differences at h = 1e-5 against the analytic gradient of
// `build` (which must construct a scalar loss over the given parameter
// nodes). Returns the worst relative error across all parameter entries.
inline double gradient_check(
    const std::function<wordspot::NodePtr(const std::vector<wordspot::NodePtr>&)>& build,
    std::vector<wordspot::Tensor> param_values, double h = 1e-5) {
    using namespace wordspot;
    std::vector<NodePtr> params;
    for (const Tensor& t : param_values) params.push_back(parameter(t));
    const NodePtr loss = build(params);
    backward(loss);

    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < param_values[p].data.size(); ++i) {
            auto eval_at = [&](double delta) {
                std::vector<NodePtr> shifted;
                for (std::size_t q = 0; q < param_values.size(); ++q) {
                    Tensor t = param_values[q];
                    if (q == p) t.data[i] += delta;
                    shifted.push_back(parameter(t));
                }
                return build(shifted)->value.data[0];
            };
            const double numeric = (eval_at(h) - eval_at(-h)) / (2.0 * h);
            const double analytic = params[p]->grad.data[i];
            const double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1e-6});
            worst = std::max(worst, std::fabs(numeric - analytic) / denom);
        }
    }
    return worst;
}

inline wordspot::Tensor random_tensor(const std::vector<int>& shape, wordspot::Rng& rng,
                                      double lo = -1.0, double hi = 1.0) {
    wordspot::Tensor t = wordspot::Tensor::zeros(shape);
    for (double& x : t.data) x = rng.uniform(lo, hi);
    return t;
}

inline wordspot::Tensor random_unit_rows(int n, int d, wordspot::Rng& rng) {
    wordspot::Tensor t = wordspot::Tensor::zeros({n, d});
    for (int i = 0; i < n; ++i) {
        double sq = 0.0;
        for (int j = 0; j < d; ++j) {
            t.at(i, j) = rng.normal();
            sq += t.at(i, j) * t.at(i, j);
        }
        const double norm = std::sqrt(sq);
        for (int j = 0; j < d; ++j) t.at(i, j) /= norm;
    }
    return t;
}

// Exponential-time reference edit distance for short strings.
inline int levenshtein_bruteforce(const std::string& a, const std::string& b) {
    if (a.empty()) return static_cast<int>(b.size());
    if (b.empty()) return static_cast<int>(a.size());
    const int del = levenshtein_bruteforce(a.substr(1), b) + 1;
    const int ins = levenshtein_bruteforce(a, b.substr(1)) + 1;
    const int sub = levenshtein_bruteforce(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 1 : 0);
    return std::min({del, ins, sub});
}

// Unique scratch directory under the build tree; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("wordspot_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string str() const { return path_.string(); }
    std::filesystem::path path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline double cosine(const wordspot::Tensor& a, const wordspot::Tensor& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        dot += a.data[i] * b.data[i];
        na += a.data[i] * a.data[i];
        nb += b.data[i] * b.data[i];
    }
    return dot / std::sqrt(na * nb);
}

}  // namespace testutil
