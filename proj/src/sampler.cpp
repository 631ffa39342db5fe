#include "wordspot/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace wordspot {

BatchSampler::BatchSampler(const Dataset& dataset, std::vector<int> pool,
                           const SamplerConfig& cfg)
    : dataset_(dataset), pool_(std::move(pool)), cfg_(cfg), rng_(hash_combine(cfg.seed, 0xba7c)) {
    if (cfg_.min_instances_per_class < 2) {
        raise(ErrorCode::config, "sampler: min_instances_per_class must be >= 2");
    }
    const int num_classes = dataset_.lexicon.num_classes();
    const int num_langs = static_cast<int>(dataset_.lexicon.languages().size());
    cells_.assign(static_cast<std::size_t>(num_classes),
                  std::vector<std::vector<int>>(static_cast<std::size_t>(num_langs)));
    for (int idx : pool_) {
        const Sample& s = dataset_.samples[static_cast<std::size_t>(idx)];
        const int li = dataset_.lexicon.language_index(s.language);
        cells_[static_cast<std::size_t>(s.semantic_id)][static_cast<std::size_t>(li)].push_back(idx);
    }
    for (int y = 0; y < num_classes; ++y) {
        std::size_t total = 0;
        for (const auto& cell : cells_[static_cast<std::size_t>(y)]) total += cell.size();
        if (total >= static_cast<std::size_t>(cfg_.min_instances_per_class)) {
            drawable_classes_.push_back(y);
        }
    }
    if (drawable_classes_.empty()) {
        raise(ErrorCode::infeasible, "sampler: no class has enough instances in this split");
    }

    batch_size_ = cfg_.batch_size;
    if (batch_size_ == 0) {
        batch_size_ = std::min(2 * num_classes, static_cast<int>(pool_.size()));
    }
    if (batch_size_ < 2 * cfg_.min_instances_per_class ||
        batch_size_ > static_cast<int>(pool_.size())) {
        raise(ErrorCode::infeasible,
              "sampler: batch size " + std::to_string(batch_size_) +
                  " infeasible for a pool of " + std::to_string(pool_.size()));
    }
}

std::vector<int> BatchSampler::next_batch() {
    const int num_langs = static_cast<int>(dataset_.lexicon.languages().size());
    const int quota_classes =
        std::min(batch_size_ / cfg_.min_instances_per_class,
                 static_cast<int>(drawable_classes_.size()));

    std::vector<int> classes = drawable_classes_;
    // Fisher-Yates prefix shuffle for the class draw.
    for (int i = 0; i < quota_classes; ++i) {
        const int j = i + static_cast<int>(rng_.below(classes.size() - static_cast<std::size_t>(i)));
        std::swap(classes[static_cast<std::size_t>(i)], classes[static_cast<std::size_t>(j)]);
    }
    classes.resize(static_cast<std::size_t>(quota_classes));

    std::vector<int> batch;
    batch.reserve(static_cast<std::size_t>(batch_size_));
    std::unordered_set<int> used;
    // Rotating language cursor; consecutive picks of one class land on
    // different languages, and counts stay balanced across the batch.
    int cursor = cfg_.language_balance ? static_cast<int>(rng_.below(
                                             static_cast<uint64_t>(num_langs)))
                                       : -1;

    auto draw_from_cell = [&](int y, int li) -> int {
        const auto& cell = cells_[static_cast<std::size_t>(y)][static_cast<std::size_t>(li)];
        // Collect unused candidates; cells are tiny at desk scale.
        std::vector<int> free;
        for (int idx : cell)
            if (!used.count(idx)) free.push_back(idx);
        if (free.empty()) return -1;
        return free[rng_.below(free.size())];
    };

    for (int y : classes) {
        for (int k = 0; k < cfg_.min_instances_per_class; ++k) {
            int picked = -1;
            if (cursor >= 0) {
                for (int attempt = 0; attempt < num_langs && picked < 0; ++attempt) {
                    picked = draw_from_cell(y, (cursor + attempt) % num_langs);
                    if (picked >= 0) cursor = (cursor + attempt + 1) % num_langs;
                }
            } else {
                // language_balance off: any unused instance of the class
                std::vector<int> free;
                for (const auto& cell : cells_[static_cast<std::size_t>(y)])
                    for (int idx : cell)
                        if (!used.count(idx)) free.push_back(idx);
                if (!free.empty()) picked = free[rng_.below(free.size())];
            }
            if (picked < 0) {
                raise(ErrorCode::infeasible,
                      "sampler: class " + std::to_string(y) + " ran out of unused instances");
            }
            used.insert(picked);
            batch.push_back(picked);
        }
    }

    // Remainder filled uniformly from unused instances of the drawn classes,
    // so every class present in the batch keeps >= min_instances.
    if (static_cast<int>(batch.size()) < batch_size_) {
        std::vector<int> rest;
        for (int y : classes)
            for (const auto& cell : cells_[static_cast<std::size_t>(y)])
                for (int idx : cell)
                    if (!used.count(idx)) rest.push_back(idx);
        while (static_cast<int>(batch.size()) < batch_size_) {
            if (rest.empty()) {
                raise(ErrorCode::infeasible, "sampler: pool exhausted while filling batch");
            }
            const std::size_t j = rng_.below(rest.size());
            batch.push_back(rest[j]);
            used.insert(rest[j]);
            rest[j] = rest.back();
            rest.pop_back();
        }
    }
    return batch;
}

}  // namespace wordspot
