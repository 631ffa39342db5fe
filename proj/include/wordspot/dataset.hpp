#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wordspot/lexicon.hpp"
#include "wordspot/render.hpp"

namespace wordspot {

enum class Split { train, finetune, id_eval, ood_eval };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

// One quadruplet (image, transcription, semantic id, language) plus the
// style/split bookkeeping.
struct Sample {
    Image image;
    std::string text;
    int semantic_id = 0;
    std::string language;
    int style_id = 0;
    Split split = Split::train;
};

// Inclusive-exclusive style id ranges per split. train/id_eval/ood_eval are
// pairwise disjoint; the fine-tune split reuses the train style range but
// renders with widened distortions (the real-world stand-in).
struct StyleSplitSpec {
    int train_begin = 0, train_end = 15;
    int id_eval_begin = 15, id_eval_end = 20;
    int ood_eval_begin = 20, ood_eval_end = 28;

    void validate() const;
    std::pair<int, int> range(Split s) const;
};

struct GenerateConfig {
    int train_per_class_per_lang = 10;
    int finetune_per_class_per_lang = 5;
    int id_eval_per_class_per_lang = 3;
    int ood_eval_per_class_per_lang = 5;
    int canvas_height = 24;
    int canvas_width = 72;
    StyleSplitSpec styles;
    double distortion_scale = 1.5;  // applied to ood_eval and finetune splits
    uint64_t seed = 1;

    int count_for(Split s) const;
};

struct ManifestRecord {
    std::string image_path;  // relative to the manifest directory
    std::string text;
    int semantic_id = 0;
    std::string language;
    int style_id = 0;
    Split split = Split::train;
};

struct DatasetManifest {
    uint64_t seed = 0;
    uint64_t lexicon_seed = 0;
    int num_classes = 0;
    std::vector<std::string> languages;
    int canvas_height = 0;
    int canvas_width = 0;
    std::map<std::string, int> counts;  // "<language>/<split>" -> tally
    uint64_t checksum = 0;              // FNV-1a over the serialized records
    std::vector<ManifestRecord> records;
};

struct Dataset {
    Lexicon lexicon;
    DatasetManifest manifest;
    std::vector<Sample> samples;

    std::vector<int> indices_of(Split split) const;
};

// Portable graymap I/O (P5, maxval 255).
void write_pgm(const std::string& path, const Image& image);
Image read_pgm(const std::string& path);

// Renders and writes the full dataset under out_dir (images/ + manifest.jsonl).
// Every sample is a pure function of (config, lexicon, seed); sample images
// are snapped to the 8-bit grid so write -> read round-trips bit-for-bit.
DatasetManifest generate_dataset(const Lexicon& lexicon, const GenerateConfig& cfg,
                                 const std::string& out_dir);

DatasetManifest read_manifest(const std::string& manifest_path);
Dataset read_dataset(const std::string& manifest_path);

std::string manifest_path_for(const std::string& dataset_dir);

}  // namespace wordspot
