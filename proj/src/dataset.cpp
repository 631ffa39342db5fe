#include "wordspot/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace wordspot {

namespace {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

uint64_t fnv1a(uint64_t h, const std::string& bytes) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

json record_to_json(const ManifestRecord& r) {
    return json{{"image", r.image_path},     {"text", r.text},
                {"semantic_id", r.semantic_id}, {"language", r.language},
                {"style_id", r.style_id},    {"split", split_name(r.split)}};
}

ManifestRecord record_from_json(const json& j, std::size_t index) {
    ManifestRecord r;
    try {
        r.image_path = j.at("image").get<std::string>();
        r.text = j.at("text").get<std::string>();
        r.semantic_id = j.at("semantic_id").get<int>();
        r.language = j.at("language").get<std::string>();
        r.style_id = j.at("style_id").get<int>();
        r.split = split_from_name(j.at("split").get<std::string>());
    } catch (const json::exception& e) {
        raise(ErrorCode::format,
              "manifest: malformed record " + std::to_string(index) + ": " + e.what());
    }
    return r;
}

const Split kSplitOrder[] = {Split::train, Split::finetune, Split::id_eval, Split::ood_eval};

}  // namespace

std::string split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::finetune: return "finetune";
        case Split::id_eval: return "id_eval";
        case Split::ood_eval: return "ood_eval";
    }
    raise(ErrorCode::internal, "split_name: unknown split");
}

Split split_from_name(const std::string& name) {
    for (Split s : kSplitOrder) {
        if (split_name(s) == name) return s;
    }
    raise(ErrorCode::format, "unknown split name '" + name + "'");
}

void StyleSplitSpec::validate() const {
    auto check_range = [](const char* what, int b, int e) {
        if (b < 0 || e <= b) {
            raise(ErrorCode::config, std::string("style split: invalid range for ") + what);
        }
    };
    check_range("train", train_begin, train_end);
    check_range("id_eval", id_eval_begin, id_eval_end);
    check_range("ood_eval", ood_eval_begin, ood_eval_end);
    auto overlap = [](int b0, int e0, int b1, int e1) { return b0 < e1 && b1 < e0; };
    if (overlap(train_begin, train_end, id_eval_begin, id_eval_end) ||
        overlap(train_begin, train_end, ood_eval_begin, ood_eval_end) ||
        overlap(id_eval_begin, id_eval_end, ood_eval_begin, ood_eval_end)) {
        raise(ErrorCode::config, "style split: ranges must be pairwise disjoint");
    }
}

std::pair<int, int> StyleSplitSpec::range(Split s) const {
    switch (s) {
        case Split::train: return {train_begin, train_end};
        case Split::finetune: return {train_begin, train_end};  // widened distortions instead
        case Split::id_eval: return {id_eval_begin, id_eval_end};
        case Split::ood_eval: return {ood_eval_begin, ood_eval_end};
    }
    raise(ErrorCode::internal, "style split: unknown split");
}

int GenerateConfig::count_for(Split s) const {
    switch (s) {
        case Split::train: return train_per_class_per_lang;
        case Split::finetune: return finetune_per_class_per_lang;
        case Split::id_eval: return id_eval_per_class_per_lang;
        case Split::ood_eval: return ood_eval_per_class_per_lang;
    }
    raise(ErrorCode::internal, "generate: unknown split");
}

void write_pgm(const std::string& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(image.width));
    for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c < image.width; ++c) {
            row[static_cast<std::size_t>(c)] =
                static_cast<unsigned char>(std::lround(image.at(r, c) * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), image.width);
    }
    if (!out) raise(ErrorCode::io, "failed writing '" + path + "'");
}

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open image file '" + path + "'");
    std::string magic;
    int width = 0, height = 0, maxval = 0;
    in >> magic >> width >> height >> maxval;
    if (magic != "P5" || maxval != 255 || width <= 0 || height <= 0) {
        raise(ErrorCode::format, "'" + path + "' is not a maxval-255 P5 graymap");
    }
    in.get();  // single whitespace after the header
    std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        raise(ErrorCode::io, "image file '" + path + "' is truncated");
    }
    Image img;
    img.height = height;
    img.width = width;
    img.pixels.resize(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = bytes[i] / 255.0;
    return img;
}

std::string manifest_path_for(const std::string& dataset_dir) {
    return (fs::path(dataset_dir) / "manifest.jsonl").string();
}

DatasetManifest generate_dataset(const Lexicon& lexicon, const GenerateConfig& cfg,
                                 const std::string& out_dir) {
    cfg.styles.validate();
    if (cfg.seed == 0) raise(ErrorCode::config, "generate: seed must be nonzero");

    fs::create_directories(fs::path(out_dir) / "images");

    DatasetManifest manifest;
    manifest.seed = cfg.seed;
    manifest.lexicon_seed = lexicon.seed();
    manifest.num_classes = lexicon.num_classes();
    manifest.languages = lexicon.languages();
    manifest.canvas_height = cfg.canvas_height;
    manifest.canvas_width = cfg.canvas_width;

    uint64_t record_index = 0;
    std::ostringstream record_lines;
    for (Split split : kSplitOrder) {
        const auto [style_lo, style_hi] = cfg.styles.range(split);
        const double distortion =
            (split == Split::ood_eval || split == Split::finetune) ? cfg.distortion_scale : 1.0;
        const int per_cell = cfg.count_for(split);
        for (int y = 0; y < lexicon.num_classes(); ++y) {
            for (const std::string& lang : lexicon.languages()) {
                for (int k = 0; k < per_cell; ++k, ++record_index) {
                    // Independent per-record stream: parallel generation
                    // would produce identical bytes.
                    const uint64_t stream = hash_combine(cfg.seed, record_index);
                    Rng rec_rng(stream);
                    const int style_id = style_lo + static_cast<int>(rec_rng.below(
                                                        static_cast<uint64_t>(style_hi - style_lo)));
                    const StyleParams style = style_from_id(style_id, cfg.seed);
                    const std::string& text = lexicon.word(y, lang);
                    const Image img =
                        render_word(text, lang, style, cfg.canvas_height, cfg.canvas_width,
                                    rec_rng.next_u64(), distortion);

                    char name[32];
                    std::snprintf(name, sizeof(name), "images/%06llu.pgm",
                                  static_cast<unsigned long long>(record_index));
                    write_pgm((fs::path(out_dir) / name).string(), img);

                    ManifestRecord rec;
                    rec.image_path = name;
                    rec.text = text;
                    rec.semantic_id = y;
                    rec.language = lang;
                    rec.style_id = style_id;
                    rec.split = split;
                    manifest.records.push_back(rec);
                    manifest.counts[lang + "/" + split_name(split)] += 1;
                    record_lines << record_to_json(rec).dump() << "\n";
                }
            }
        }
    }

    manifest.checksum = fnv1a(kFnvOffset, record_lines.str());

    json header{{"type", "header"},
                {"format", "wordspot-dataset"},
                {"version", 1},
                {"seed", manifest.seed},
                {"lexicon_seed", manifest.lexicon_seed},
                {"num_classes", manifest.num_classes},
                {"languages", manifest.languages},
                {"canvas_height", manifest.canvas_height},
                {"canvas_width", manifest.canvas_width},
                {"counts", manifest.counts},
                {"checksum", manifest.checksum}};

    const std::string path = manifest_path_for(out_dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << header.dump() << "\n" << record_lines.str();
    if (!out) raise(ErrorCode::io, "failed writing '" + path + "'");
    return manifest;
}

DatasetManifest read_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open manifest '" + manifest_path + "'");
    std::string line;
    if (!std::getline(in, line)) raise(ErrorCode::format, "manifest is empty");

    DatasetManifest manifest;
    try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != "wordspot-dataset") {
            raise(ErrorCode::format, "manifest header: unexpected format tag");
        }
        manifest.seed = header.at("seed").get<uint64_t>();
        manifest.lexicon_seed = header.at("lexicon_seed").get<uint64_t>();
        manifest.num_classes = header.at("num_classes").get<int>();
        manifest.languages = header.at("languages").get<std::vector<std::string>>();
        manifest.canvas_height = header.at("canvas_height").get<int>();
        manifest.canvas_width = header.at("canvas_width").get<int>();
        manifest.counts = header.at("counts").get<std::map<std::string, int>>();
        manifest.checksum = header.at("checksum").get<uint64_t>();
    } catch (const json::exception& e) {
        raise(ErrorCode::format, std::string("manifest header: ") + e.what());
    }

    uint64_t checksum = kFnvOffset;
    std::map<std::string, int> tallies;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            raise(ErrorCode::format,
                  "manifest: record " + std::to_string(index) + " is not valid JSON: " + e.what());
        }
        ManifestRecord rec = record_from_json(j, index);
        checksum = fnv1a(checksum, j.dump() + "\n");
        tallies[rec.language + "/" + split_name(rec.split)] += 1;
        manifest.records.push_back(std::move(rec));
        ++index;
    }
    if (checksum != manifest.checksum) {
        raise(ErrorCode::format, "manifest: content checksum mismatch");
    }
    if (tallies != manifest.counts) {
        raise(ErrorCode::format, "manifest: header counts do not match record tallies");
    }
    return manifest;
}

Dataset read_dataset(const std::string& manifest_path) {
    Dataset ds;
    ds.manifest = read_manifest(manifest_path);
    ds.lexicon = Lexicon::build(ds.manifest.num_classes, ds.manifest.languages,
                                ds.manifest.lexicon_seed);
    const fs::path root = fs::path(manifest_path).parent_path();
    ds.samples.reserve(ds.manifest.records.size());
    for (std::size_t i = 0; i < ds.manifest.records.size(); ++i) {
        const ManifestRecord& rec = ds.manifest.records[i];
        if (!ds.lexicon.has_language(rec.language)) {
            raise(ErrorCode::format, "manifest: record " + std::to_string(i) +
                                         " references unknown language '" + rec.language + "'");
        }
        if (ds.lexicon.word(rec.semantic_id, rec.language) != rec.text) {
            raise(ErrorCode::format, "manifest: record " + std::to_string(i) +
                                         " transcription disagrees with the lexicon");
        }
        Sample s;
        try {
            s.image = read_pgm((root / rec.image_path).string());
        } catch (const Error& e) {
            raise(e.code(), "record " + std::to_string(i) + ": " + e.what());
        }
        if (s.image.height != ds.manifest.canvas_height ||
            s.image.width != ds.manifest.canvas_width) {
            raise(ErrorCode::format,
                  "record " + std::to_string(i) + ": image shape differs from manifest canvas");
        }
        s.text = rec.text;
        s.semantic_id = rec.semantic_id;
        s.language = rec.language;
        s.style_id = rec.style_id;
        s.split = rec.split;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

std::vector<int> Dataset::indices_of(Split split) const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].split == split) idx.push_back(static_cast<int>(i));
    }
    return idx;
}

}  // namespace wordspot
