#include "wordspot/lexicon.hpp"

#include <algorithm>
#include <unordered_set>

namespace wordspot {

namespace {

// Disjoint single-byte ranges; the visual "script" of a language comes from
// its glyph table, these are just stable identifiers.
const struct {
    const char* tag;
    const char* chars;
} kAlphabets[] = {
    {"en", "abcdefghijklmnopqr"},
    {"zh", "ABCDEFGHIJKLMNOPQR"},
    {"es", "stuvwxyz0123456789"},
};

constexpr int kMinWordLen = 3;
constexpr int kMaxWordLen = 6;
constexpr int kMaxDrawAttempts = 4096;

}  // namespace

std::string Lexicon::alphabet(const std::string& language) {
    for (const auto& entry : kAlphabets) {
        if (language == entry.tag) return entry.chars;
    }
    raise(ErrorCode::invalid_argument, "lexicon: unsupported language tag '" + language + "'");
}

Lexicon Lexicon::build(int num_classes, const std::vector<std::string>& languages,
                       uint64_t seed) {
    if (num_classes < 2) raise(ErrorCode::invalid_argument, "lexicon: need at least 2 classes");
    if (languages.empty()) raise(ErrorCode::invalid_argument, "lexicon: need at least 1 language");

    Lexicon lex;
    lex.num_classes_ = num_classes;
    lex.languages_ = languages;
    lex.seed_ = seed;
    lex.words_.resize(static_cast<std::size_t>(num_classes) * languages.size());

    for (std::size_t li = 0; li < languages.size(); ++li) {
        const std::string chars = alphabet(languages[li]);
        if (chars.size() < 8) {
            raise(ErrorCode::invalid_argument,
                  "lexicon: alphabet of '" + languages[li] + "' is smaller than 8");
        }
        Rng rng(hash_str(hash_combine(seed, 0x11ce), languages[li]));
        std::unordered_set<std::string> used;
        for (int y = 0; y < num_classes; ++y) {
            std::string word;
            int attempts = 0;
            do {
                if (++attempts > kMaxDrawAttempts) {
                    raise(ErrorCode::capacity,
                          "lexicon: cannot draw " + std::to_string(num_classes) +
                              " collision-free words for language '" + languages[li] + "'");
                }
                const int len = rng.uniform_int(kMinWordLen, kMaxWordLen);
                word.clear();
                for (int k = 0; k < len; ++k)
                    word.push_back(chars[rng.below(chars.size())]);
            } while (!used.insert(word).second);
            lex.words_[static_cast<std::size_t>(y) * languages.size() + li] = word;
        }
    }
    return lex;
}

bool Lexicon::has_language(const std::string& language) const {
    return std::find(languages_.begin(), languages_.end(), language) != languages_.end();
}

int Lexicon::language_index(const std::string& language) const {
    const auto it = std::find(languages_.begin(), languages_.end(), language);
    if (it == languages_.end()) {
        raise(ErrorCode::invalid_argument, "lexicon: unknown language '" + language + "'");
    }
    return static_cast<int>(it - languages_.begin());
}

const std::string& Lexicon::word(int semantic_id, const std::string& language) const {
    return word(semantic_id, language_index(language));
}

const std::string& Lexicon::word(int semantic_id, int language_index) const {
    if (semantic_id < 0 || semantic_id >= num_classes_) {
        raise(ErrorCode::invalid_argument,
              "lexicon: semantic_id " + std::to_string(semantic_id) + " out of range");
    }
    if (language_index < 0 || language_index >= static_cast<int>(languages_.size())) {
        raise(ErrorCode::invalid_argument, "lexicon: language index out of range");
    }
    return words_[static_cast<std::size_t>(semantic_id) * languages_.size() +
                  static_cast<std::size_t>(language_index)];
}

}  // namespace wordspot
