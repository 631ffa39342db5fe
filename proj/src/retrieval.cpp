#include "wordspot/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wordspot {

Protocol Protocol::within(const std::string& language) {
    Protocol p;
    p.kind = Kind::within;
    p.query_language = language;
    return p;
}

Protocol Protocol::mixed() {
    Protocol p;
    p.kind = Kind::mixed;
    return p;
}

Protocol Protocol::cross(const std::string& query_lang, const std::string& target_lang) {
    Protocol p;
    p.kind = Kind::cross;
    p.query_language = query_lang;
    p.target_language = target_lang;
    return p;
}

std::string Protocol::name() const {
    switch (kind) {
        case Kind::within: return "within(" + query_language + ")";
        case Kind::mixed: return "mixed";
        case Kind::cross: return "cross(" + query_language + "->" + target_language + ")";
    }
    raise(ErrorCode::internal, "protocol: unknown kind");
}

Gallery build_gallery(const Lexicon& lexicon, const std::vector<std::string>& languages_in_scope,
                      const ModelParams& params) {
    Gallery g;
    g.languages_in_scope = languages_in_scope;
    for (const std::string& lang : languages_in_scope) {
        if (!lexicon.has_language(lang)) {
            raise(ErrorCode::invalid_argument,
                  "gallery: language '" + lang + "' is not in the lexicon");
        }
    }
    for (int y = 0; y < lexicon.num_classes(); ++y) {
        for (const std::string& lang : languages_in_scope) {
            GalleryEntry e;
            e.semantic_id = y;
            e.language = lang;
            e.text = lexicon.word(y, lang);
            e.embedding = encode_text(y, lang, params);
            g.entries.push_back(std::move(e));
        }
    }
    return g;
}

namespace {

RetrievalResult rank_scores(const std::vector<double>& scores, const Gallery& gallery,
                            int top_k, int query_semantic_id,
                            const std::optional<std::string>& gt_language) {
    const int n = static_cast<int>(gallery.entries.size());
    if (n == 0) raise(ErrorCode::invalid_argument, "retrieve: empty gallery");
    if (top_k > n) raise(ErrorCode::invalid_argument, "retrieve: K exceeds gallery size");

    RetrievalResult result;
    result.ranking.resize(static_cast<std::size_t>(n));
    std::iota(result.ranking.begin(), result.ranking.end(), 0);
    std::sort(result.ranking.begin(), result.ranking.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        }
        const GalleryEntry& ea = gallery.entries[static_cast<std::size_t>(a)];
        const GalleryEntry& eb = gallery.entries[static_cast<std::size_t>(b)];
        if (ea.semantic_id != eb.semantic_id) return ea.semantic_id < eb.semantic_id;
        return ea.language < eb.language;
    });

    result.top1_text = gallery.entries[static_cast<std::size_t>(result.ranking[0])].text;
    result.rank_of_ground_truth = 0;
    for (int r = 0; r < n; ++r) {
        const GalleryEntry& e = gallery.entries[static_cast<std::size_t>(result.ranking[r])];
        const bool match = gt_language ? (e.semantic_id == query_semantic_id &&
                                          e.language == *gt_language)
                                       : (e.semantic_id == query_semantic_id);
        if (match) {
            result.rank_of_ground_truth = r + 1;
            result.ground_truth_text = e.text;
            break;
        }
    }
    if (result.rank_of_ground_truth == 0) {
        raise(ErrorCode::invalid_argument,
              "retrieve: ground-truth entry absent from the gallery");
    }
    if (top_k < n) result.ranking.resize(static_cast<std::size_t>(top_k));
    return result;
}

}  // namespace

RetrievalResult retrieve(const Tensor& query_embedding, const Gallery& gallery, int top_k,
                         int query_semantic_id, const std::optional<std::string>& gt_language) {
    const int n = static_cast<int>(gallery.entries.size());
    if (n == 0) raise(ErrorCode::invalid_argument, "retrieve: empty gallery");
    std::vector<double> scores(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Tensor& z = gallery.entries[static_cast<std::size_t>(j)].embedding;
        if (z.numel() != query_embedding.numel()) {
            raise(ErrorCode::dimension, "retrieve: query/gallery dimensions differ");
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < z.data.size(); ++k) acc += query_embedding.data[k] * z.data[k];
        scores[static_cast<std::size_t>(j)] = acc;
    }
    return rank_scores(scores, gallery, top_k, query_semantic_id, gt_language);
}

namespace {

std::vector<int> protocol_queries(const Dataset& dataset, Split split, const Protocol& protocol) {
    std::vector<int> queries;
    for (int idx : dataset.indices_of(split)) {
        const Sample& s = dataset.samples[static_cast<std::size_t>(idx)];
        if (protocol.kind == Protocol::Kind::mixed || s.language == protocol.query_language) {
            queries.push_back(idx);
        }
    }
    if (queries.empty()) {
        raise(ErrorCode::invalid_argument, "eval: protocol " + protocol.name() +
                                               " selects no queries in split '" +
                                               split_name(split) + "'");
    }
    return queries;
}

std::vector<std::string> protocol_gallery_languages(const Protocol& protocol,
                                                    const std::vector<std::string>& all) {
    switch (protocol.kind) {
        case Protocol::Kind::within: return {protocol.query_language};
        case Protocol::Kind::cross: return {protocol.target_language};
        case Protocol::Kind::mixed: return all;
    }
    raise(ErrorCode::internal, "protocol: unknown kind");
}

std::optional<std::string> protocol_gt_language(const Protocol& protocol,
                                                const std::string& query_language) {
    switch (protocol.kind) {
        case Protocol::Kind::within: return query_language;
        case Protocol::Kind::cross: return protocol.target_language;
        case Protocol::Kind::mixed: return std::nullopt;
    }
    raise(ErrorCode::internal, "protocol: unknown kind");
}

}  // namespace

std::vector<RetrievalResult> eval_protocol(const Dataset& dataset, Split split,
                                           const Protocol& protocol, const ModelParams& params) {
    return eval_protocol_with(dataset, split, protocol, params,
                              [&params](const Image& img) { return encode_image(img, params); });
}

std::vector<RetrievalResult> eval_protocol_with(const Dataset& dataset, Split split,
                                                const Protocol& protocol,
                                                const ModelParams& gallery_params,
                                                const ImageEncoder& encoder) {
    const ModelParams& params = gallery_params;
    if (protocol.kind != Protocol::Kind::mixed) {
        if (!dataset.lexicon.has_language(protocol.query_language)) {
            raise(ErrorCode::invalid_argument,
                  "eval: protocol references unknown language '" + protocol.query_language + "'");
        }
    }
    if (protocol.kind == Protocol::Kind::cross &&
        !dataset.lexicon.has_language(protocol.target_language)) {
        raise(ErrorCode::invalid_argument,
              "eval: protocol references unknown language '" + protocol.target_language + "'");
    }
    const Gallery gallery = build_gallery(
        dataset.lexicon, protocol_gallery_languages(protocol, dataset.lexicon.languages()),
        params);
    const int top_k = std::min(5, static_cast<int>(gallery.entries.size()));

    std::vector<RetrievalResult> results;
    for (int idx : protocol_queries(dataset, split, protocol)) {
        const Sample& s = dataset.samples[static_cast<std::size_t>(idx)];
        const Tensor v = encoder(s.image);
        RetrievalResult r = retrieve(v, gallery, top_k, s.semantic_id,
                                     protocol_gt_language(protocol, s.language));
        r.query_id = idx;
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<RetrievalResult> eval_protocol_random(const Dataset& dataset, Split split,
                                                  const Protocol& protocol,
                                                  const Lexicon& lexicon,
                                                  const std::vector<std::string>& languages,
                                                  uint64_t seed) {
    // Gallery embeddings are irrelevant for the random ranker; reuse the
    // entry layout with placeholder similarities drawn uniformly.
    Gallery gallery;
    gallery.languages_in_scope = protocol_gallery_languages(protocol, languages);
    for (int y = 0; y < lexicon.num_classes(); ++y) {
        for (const std::string& lang : gallery.languages_in_scope) {
            GalleryEntry e;
            e.semantic_id = y;
            e.language = lang;
            e.text = lexicon.word(y, lang);
            e.embedding = Tensor::zeros({1});
            gallery.entries.push_back(std::move(e));
        }
    }
    const int top_k = std::min(5, static_cast<int>(gallery.entries.size()));
    Rng rng(hash_combine(seed, 0x4a4d));
    std::vector<RetrievalResult> results;
    for (int idx : protocol_queries(dataset, split, protocol)) {
        const Sample& s = dataset.samples[static_cast<std::size_t>(idx)];
        std::vector<double> scores(gallery.entries.size());
        for (double& x : scores) x = rng.uniform();
        RetrievalResult r = rank_scores(scores, gallery, top_k, s.semantic_id,
                                        protocol_gt_language(protocol, s.language));
        r.query_id = idx;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace wordspot
