#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pc/chunker.hpp"
#include "pc/rng.hpp"

namespace pc {

using AttrNounPair = std::pair<std::string, std::string>;  // (attribute, noun)
using AttrNounSet = std::set<AttrNounPair>;

struct FlipPolicy {
  double flip_probability = 0.5;  // per eligible color/size token
  std::size_t min_flips = 1;
  bool exclude_image_attributes = false;

  void validate() const;  // throws pc::ConfigError
};

// Replace exactly one color/size attribute token with a different word from
// the same lexicon category. Throws pc::NotFlippableError when no eligible
// token exists or the category has no alternative word.
AttributePhrase flip_phrase(const AttributePhrase& phrase, const Lexicon& lex,
                            Rng& rng);

// Flip each eligible token independently with policy.flip_probability and
// force extra flips until min_flips is reached. Structure (length, nouns,
// spans, categories) is preserved.
std::vector<AttributePhrase> make_negative(
    const std::vector<AttributePhrase>& phrases, const Lexicon& lex,
    const FlipPolicy& policy, Rng& rng,
    const AttrNounSet* image_attributes = nullptr);

// Ablation negative: the ground-truth phrases of a different, uniformly
// sampled image. Throws pc::DataError on a single-image dataset.
std::vector<AttributePhrase> sample_mismatch(
    const std::map<std::string, std::vector<AttributePhrase>>& dataset,
    const std::string& image_id, Rng& rng);

}  // namespace pc
