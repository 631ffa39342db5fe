#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wordspot/common.hpp"

namespace wordspot {

// Fixed semantic vocabulary: C classes x L languages -> word strings.
// Languages are emulated as disjoint synthetic scripts; each language owns a
// disjoint character set so cross-script words share no characters.
class Lexicon {
public:
    Lexicon() = default;

    static Lexicon build(int num_classes, const std::vector<std::string>& languages,
                         uint64_t seed);

    int num_classes() const { return num_classes_; }
    const std::vector<std::string>& languages() const { return languages_; }
    uint64_t seed() const { return seed_; }

    bool has_language(const std::string& language) const;
    int language_index(const std::string& language) const;  // throws on unknown

    const std::string& word(int semantic_id, const std::string& language) const;
    const std::string& word(int semantic_id, int language_index) const;

    // Character inventory a language's words are drawn from.
    static std::string alphabet(const std::string& language);

private:
    int num_classes_ = 0;
    std::vector<std::string> languages_;
    uint64_t seed_ = 0;
    std::vector<std::string> words_;  // [class * L + language_index]
};

}  // namespace wordspot
