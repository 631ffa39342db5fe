#pragma once

#include <cstdint>
#include <vector>

#include "wordspot/dataset.hpp"

namespace wordspot {

// Category-aligned co-occurrence sampling: every drawn class contributes at
// least min_instances_per_class samples, rotated across languages so
// cross-lingual synonym pairs co-occur within the batch.
struct SamplerConfig {
    int batch_size = 0;  // 0 = align to category magnitude: min(2*C, pool size)
    int min_instances_per_class = 2;
    bool language_balance = true;
    uint64_t seed = 3;
};

class BatchSampler {
public:
    // `pool` holds dataset indices of the split being trained on.
    BatchSampler(const Dataset& dataset, std::vector<int> pool, const SamplerConfig& cfg);

    // Indices into the dataset's sample vector; no duplicates within a batch.
    std::vector<int> next_batch();

    int batch_size() const { return batch_size_; }

private:
    const Dataset& dataset_;
    std::vector<int> pool_;
    SamplerConfig cfg_;
    int batch_size_ = 0;
    Rng rng_;
    // per (class, language-index) sample index lists within the pool
    std::vector<std::vector<std::vector<int>>> cells_;
    std::vector<int> drawable_classes_;
};

}  // namespace wordspot
