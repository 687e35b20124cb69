#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace pc {

enum class AttrCategory { Color, Size, Other };

std::string to_string(AttrCategory c);
AttrCategory attr_category_from_string(const std::string& s);

struct AttrToken {
  std::string word;
  AttrCategory category;

  bool operator==(const AttrToken&) const = default;
};

// An attribute-adjective run plus its head noun, with the token span it was
// extracted from (begin = first attribute token, end = head noun, inclusive).
struct AttributePhrase {
  std::vector<AttrToken> attribute_tokens;
  std::string head_noun;
  std::size_t span_begin = 0;
  std::size_t span_end = 0;

  // Canonical join key: "attr ... attr noun", single spaces, lowercase.
  std::string text() const;

  bool operator==(const AttributePhrase&) const = default;
};

struct TokenSequence {
  std::vector<std::string> tokens;
  std::string source;
};

// Word lists driving the chunker. The four sets must be pairwise disjoint,
// lowercase, nonempty single tokens.
struct Lexicon {
  std::unordered_set<std::string> color;
  std::unordered_set<std::string> size;
  std::unordered_set<std::string> other_attributes;
  std::unordered_set<std::string> stopwords;

  std::optional<AttrCategory> attribute_category(const std::string& word) const;
  bool is_stopword(const std::string& word) const { return stopwords.count(word) > 0; }
  const std::unordered_set<std::string>& category_set(AttrCategory c) const;

  // Throws pc::FormatError if the invariants do not hold.
  void validate() const;

  static Lexicon load(const std::string& path);
  void save(const std::string& path) const;

  // The bird-domain default shipped with the project.
  static Lexicon builtin();
};

// Lowercase, strip .,;:!?"'() characters, split on whitespace. Hyphens are
// preserved. Throws pc::FormatError on invalid UTF-8.
TokenSequence tokenize(const std::string& sentence);

// Left-to-right scan: a phrase is a maximal run of consecutive attribute
// words immediately followed by a non-stopword, non-attribute head noun.
// Runs with no following noun are dropped. Output is in sentence order and
// non-overlapping.
std::vector<AttributePhrase> chunk_phrases(const TokenSequence& tokens,
                                           const Lexicon& lex);

}  // namespace pc
