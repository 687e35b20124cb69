#include "pc/chunker.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pc/errors.hpp"

namespace pc {

using nlohmann::json;

std::string to_string(AttrCategory c) {
  switch (c) {
    case AttrCategory::Color: return "color";
    case AttrCategory::Size: return "size";
    case AttrCategory::Other: return "other";
  }
  return "other";
}

AttrCategory attr_category_from_string(const std::string& s) {
  if (s == "color") return AttrCategory::Color;
  if (s == "size") return AttrCategory::Size;
  if (s == "other") return AttrCategory::Other;
  throw FormatError("unknown attribute category: " + s);
}

std::string AttributePhrase::text() const {
  std::string out;
  for (const AttrToken& t : attribute_tokens) {
    out += t.word;
    out += ' ';
  }
  out += head_noun;
  return out;
}

std::optional<AttrCategory> Lexicon::attribute_category(const std::string& word) const {
  if (color.count(word)) return AttrCategory::Color;
  if (size.count(word)) return AttrCategory::Size;
  if (other_attributes.count(word)) return AttrCategory::Other;
  return std::nullopt;
}

const std::unordered_set<std::string>& Lexicon::category_set(AttrCategory c) const {
  switch (c) {
    case AttrCategory::Color: return color;
    case AttrCategory::Size: return size;
    default: return other_attributes;
  }
}

namespace {

void check_word_list(const std::unordered_set<std::string>& words,
                     const std::string& list_name) {
  for (const std::string& w : words) {
    if (w.empty()) throw FormatError("lexicon " + list_name + ": empty entry");
    for (char c : w) {
      if (std::isspace(static_cast<unsigned char>(c)))
        throw FormatError("lexicon " + list_name + ": multi-token entry '" + w + "'");
      if (std::isupper(static_cast<unsigned char>(c)))
        throw FormatError("lexicon " + list_name + ": non-lowercase entry '" + w + "'");
    }
  }
}

void check_disjoint(const std::unordered_set<std::string>& a, const std::string& an,
                    const std::unordered_set<std::string>& b, const std::string& bn) {
  for (const std::string& w : a)
    if (b.count(w))
      throw FormatError("lexicon lists " + an + " and " + bn + " both contain '" + w + "'");
}

bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    if (c < 0x80) extra = 0;
    else if ((c >> 5) == 0x6) extra = 1;
    else if ((c >> 4) == 0xe) extra = 2;
    else if ((c >> 3) == 0x1e) extra = 3;
    else return false;
    if (i + extra >= s.size() && extra > 0) return false;
    for (std::size_t k = 1; k <= extra; ++k)
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    i += extra + 1;
  }
  return true;
}

std::unordered_set<std::string> read_list(const json& doc, const std::string& key,
                                          const std::string& path) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw FormatError(path + ": missing word list '" + key + "'");
  std::unordered_set<std::string> out;
  for (const auto& entry : doc[key]) {
    if (!entry.is_string()) throw FormatError(path + ": non-string entry in '" + key + "'");
    out.insert(entry.get<std::string>());
  }
  return out;
}

json sorted_list(const std::unordered_set<std::string>& words) {
  std::vector<std::string> v(words.begin(), words.end());
  std::sort(v.begin(), v.end());
  return json(v);
}

}  // namespace

void Lexicon::validate() const {
  check_word_list(color, "color");
  check_word_list(size, "size");
  check_word_list(other_attributes, "other_attributes");
  check_word_list(stopwords, "stopwords");
  check_disjoint(color, "color", size, "size");
  check_disjoint(color, "color", other_attributes, "other_attributes");
  check_disjoint(color, "color", stopwords, "stopwords");
  check_disjoint(size, "size", other_attributes, "other_attributes");
  check_disjoint(size, "size", stopwords, "stopwords");
  check_disjoint(other_attributes, "other_attributes", stopwords, "stopwords");
}

Lexicon Lexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  Lexicon lex;
  lex.color = read_list(doc, "color", path);
  lex.size = read_list(doc, "size", path);
  lex.other_attributes = read_list(doc, "other_attributes", path);
  lex.stopwords = read_list(doc, "stopwords", path);
  lex.validate();
  return lex;
}

void Lexicon::save(const std::string& path) const {
  json doc;
  doc["color"] = sorted_list(color);
  doc["size"] = sorted_list(size);
  doc["other_attributes"] = sorted_list(other_attributes);
  doc["stopwords"] = sorted_list(stopwords);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write lexicon file: " + path);
  out << doc.dump(2) << "\n";
}

Lexicon Lexicon::builtin() {
  Lexicon lex;
  lex.color = {"red", "black", "white", "yellow", "blue", "green", "brown",
               "gray", "grey", "orange", "purple", "pink", "golden", "tan",
               "rufous"};
  lex.size = {"long", "short", "large", "small", "big", "tiny", "thick", "thin"};
  lex.other_attributes = {"pointy", "pointed", "spotted", "striped", "speckled",
                          "curved", "hooked", "rounded", "bright", "dark",
                          "light", "sharp", "webbed", "fluffy"};
  lex.stopwords = {"the", "a",     "an",    "is",    "are",   "was",  "were",
                   "be",  "been",  "has",   "have",  "had",   "with", "and",
                   "or",  "of",    "on",    "in",    "at",    "to",   "it",
                   "its", "this",  "that",  "these", "those", "there", "very",
                   "which", "while", "from", "as",   "by",    "for"};
  return lex;
}

TokenSequence tokenize(const std::string& sentence) {
  if (!valid_utf8(sentence)) throw FormatError("tokenize: invalid UTF-8 input");
  static const std::string kStrip = ".,;:!?\"'()";
  TokenSequence seq;
  seq.source = sentence;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      seq.tokens.push_back(current);
      current.clear();
    }
  };
  for (char ch : sentence) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else if (kStrip.find(ch) != std::string::npos) {
      // stripped anywhere in the token
    } else {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  flush();
  return seq;
}

std::vector<AttributePhrase> chunk_phrases(const TokenSequence& tokens,
                                           const Lexicon& lex) {
  std::vector<AttributePhrase> phrases;
  const auto& toks = tokens.tokens;
  std::size_t i = 0;
  while (i < toks.size()) {
    const auto cat = lex.attribute_category(toks[i]);
    if (!cat) {
      ++i;
      continue;
    }
    // maximal attribute run starting at i
    AttributePhrase phrase;
    phrase.span_begin = i;
    std::size_t j = i;
    while (j < toks.size()) {
      const auto c = lex.attribute_category(toks[j]);
      if (!c) break;
      phrase.attribute_tokens.push_back({toks[j], *c});
      ++j;
    }
    if (j < toks.size() && !lex.is_stopword(toks[j])) {
      phrase.head_noun = toks[j];
      phrase.span_end = j;
      phrases.push_back(std::move(phrase));
      i = j + 1;
    } else {
      // run with no head noun: discard, resume after it
      i = j;
    }
  }
  return phrases;
}

}  // namespace pc
