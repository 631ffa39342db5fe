#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wordspot/dataset.hpp"
#include "wordspot/model.hpp"

namespace wordspot {

// Text-anchor gallery: one entry per (semantic_id, language) in scope.
struct GalleryEntry {
    int semantic_id = 0;
    std::string language;
    std::string text;
    Tensor embedding;  // [D], unit norm
};

struct Gallery {
    std::vector<GalleryEntry> entries;
    std::vector<std::string> languages_in_scope;
};

struct RetrievalResult {
    int query_id = 0;
    std::vector<int> ranking;  // permutation of gallery indices, best first
    int rank_of_ground_truth = 0;  // 1-based
    std::string top1_text;
    std::string ground_truth_text;
};

// Image -> text retrieval protocols. within(l): same-language gallery.
// cross(a -> b): queries of language a against the language-b gallery only.
// mixed: full gallery, any same-class entry counts as correct.
struct Protocol {
    enum class Kind { within, mixed, cross } kind = Kind::within;
    std::string query_language;   // within: the language; cross: the query side
    std::string target_language;  // cross only

    static Protocol within(const std::string& language);
    static Protocol mixed();
    static Protocol cross(const std::string& query_lang, const std::string& target_lang);
    std::string name() const;
};

Gallery build_gallery(const Lexicon& lexicon, const std::vector<std::string>& languages_in_scope,
                      const ModelParams& params);

// Full descending-similarity sort; ties broken by ascending
// (semantic_id, language). ground_truth selects the entry whose rank is
// reported (mixed: best-ranked same-class entry).
RetrievalResult retrieve(const Tensor& query_embedding, const Gallery& gallery, int top_k,
                         int query_semantic_id, const std::optional<std::string>& gt_language);

std::vector<RetrievalResult> eval_protocol(const Dataset& dataset, Split split,
                                           const Protocol& protocol, const ModelParams& params);

// Same protocol machinery with a custom image encoder (the quantized path
// evaluates through this; the gallery side stays on the float params).
using ImageEncoder = std::function<Tensor(const Image&)>;
std::vector<RetrievalResult> eval_protocol_with(const Dataset& dataset, Split split,
                                                const Protocol& protocol,
                                                const ModelParams& gallery_params,
                                                const ImageEncoder& encoder);

// Uniform-random ranker behind the same result interface (the "Random"
// baseline row). Expected Acc@1 = 1 / |gallery|.
std::vector<RetrievalResult> eval_protocol_random(const Dataset& dataset, Split split,
                                                  const Protocol& protocol,
                                                  const Lexicon& lexicon,
                                                  const std::vector<std::string>& languages,
                                                  uint64_t seed);

}  // namespace wordspot
