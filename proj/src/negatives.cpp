#include "pc/negatives.hpp"

#include <algorithm>

#include "pc/errors.hpp"

namespace pc {

namespace {

bool eligible(const AttrToken& t) {
  return t.category == AttrCategory::Color || t.category == AttrCategory::Size;
}

// Replacement candidates: same category, different word, optionally avoiding
// (word, noun) pairs the image actually has. Sorted for determinism.
std::vector<std::string> replacement_pool(const AttrToken& token,
                                          const std::string& head_noun,
                                          const Lexicon& lex,
                                          const AttrNounSet* image_attributes) {
  const auto& category = lex.category_set(token.category);
  std::vector<std::string> pool;
  pool.reserve(category.size());
  for (const std::string& w : category) {
    if (w == token.word) continue;
    if (image_attributes && image_attributes->count({w, head_noun})) continue;
    pool.push_back(w);
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

bool flip_token(AttrToken& token, const std::string& head_noun, const Lexicon& lex,
                Rng& rng, const AttrNounSet* image_attributes) {
  const auto pool = replacement_pool(token, head_noun, lex, image_attributes);
  if (pool.empty()) return false;
  token.word = pool[rng.below(pool.size())];
  return true;
}

}  // namespace

void FlipPolicy::validate() const {
  if (!(flip_probability > 0.0) || flip_probability > 1.0)
    throw ConfigError("flip_probability must be in (0, 1]");
  if (min_flips < 1) throw ConfigError("min_flips must be >= 1");
}

AttributePhrase flip_phrase(const AttributePhrase& phrase, const Lexicon& lex,
                            Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < phrase.attribute_tokens.size(); ++i)
    if (eligible(phrase.attribute_tokens[i])) candidates.push_back(i);
  if (candidates.empty())
    throw NotFlippableError("flip_phrase: no color/size attribute in '" +
                            phrase.text() + "'");

  AttributePhrase out = phrase;
  const std::size_t idx = candidates[rng.below(candidates.size())];
  if (!flip_token(out.attribute_tokens[idx], out.head_noun, lex, rng, nullptr))
    throw NotFlippableError("flip_phrase: no alternative word in category for '" +
                            phrase.attribute_tokens[idx].word + "'");
  return out;
}

std::vector<AttributePhrase> make_negative(
    const std::vector<AttributePhrase>& phrases, const Lexicon& lex,
    const FlipPolicy& policy, Rng& rng, const AttrNounSet* image_attributes) {
  policy.validate();
  const AttrNounSet* exclude =
      policy.exclude_image_attributes ? image_attributes : nullptr;

  struct Pos {
    std::size_t phrase, token;
  };
  std::vector<Pos> eligible_positions;
  for (std::size_t p = 0; p < phrases.size(); ++p)
    for (std::size_t t = 0; t < phrases[p].attribute_tokens.size(); ++t)
      if (eligible(phrases[p].attribute_tokens[t])) eligible_positions.push_back({p, t});
  if (eligible_positions.empty())
    throw NotFlippableError("make_negative: no color/size attribute in any phrase");

  std::vector<AttributePhrase> out = phrases;
  std::vector<bool> flipped(eligible_positions.size(), false);
  std::size_t flips = 0;
  for (std::size_t k = 0; k < eligible_positions.size(); ++k) {
    if (rng.uniform() >= policy.flip_probability) continue;
    const Pos pos = eligible_positions[k];
    if (flip_token(out[pos.phrase].attribute_tokens[pos.token],
                   out[pos.phrase].head_noun, lex, rng, exclude)) {
      flipped[k] = true;
      ++flips;
    }
  }

  // Force additional flips until the minimum is met.
  std::vector<std::size_t> remaining;
  for (std::size_t k = 0; k < eligible_positions.size(); ++k)
    if (!flipped[k]) remaining.push_back(k);
  while (flips < policy.min_flips) {
    if (remaining.empty())
      throw NotFlippableError("make_negative: cannot reach min_flips = " +
                              std::to_string(policy.min_flips));
    const std::size_t pick = rng.below(remaining.size());
    const std::size_t k = remaining[pick];
    remaining.erase(remaining.begin() + static_cast<long>(pick));
    const Pos pos = eligible_positions[k];
    if (flip_token(out[pos.phrase].attribute_tokens[pos.token],
                   out[pos.phrase].head_noun, lex, rng, exclude))
      ++flips;
  }
  return out;
}

std::vector<AttributePhrase> sample_mismatch(
    const std::map<std::string, std::vector<AttributePhrase>>& dataset,
    const std::string& image_id, Rng& rng) {
  if (dataset.size() < 2)
    throw DataError("sample_mismatch: need at least two images");
  std::vector<const std::vector<AttributePhrase>*> others;
  for (const auto& [id, phrases] : dataset)
    if (id != image_id) others.push_back(&phrases);
  return *others[rng.below(others.size())];
}

}  // namespace pc
