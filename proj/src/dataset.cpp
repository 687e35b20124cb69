#include "pc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "json.hpp"
#include "pc/errors.hpp"
#include "pc/rng.hpp"

namespace pc {

using nlohmann::json;

namespace {

json parse_line(const std::string& path, std::size_t line_no, const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(path, line_no, e.what());
  }
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    fn(line_no, parse_line(path, line_no, line));
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  return out;
}

}  // namespace

const ImageRecord* Dataset::find_image(const std::string& image_id) const {
  for (const ImageRecord& img : images)
    if (img.image_id == image_id) return &img;
  return nullptr;
}

std::vector<ImageRecord> load_images(const std::string& path) {
  std::vector<ImageRecord> images;
  std::set<std::string> seen;
  for_each_line(path, [&](std::size_t line_no, const json& row) {
    try {
      ImageRecord img;
      img.image_id = row.at("image_id").get<std::string>();
      img.width = row.at("width").get<int>();
      img.height = row.at("height").get<int>();
      if (img.width <= 0 || img.height <= 0)
        throw FormatError(path, line_no, "image dimensions must be positive");
      for (const auto& a : row.at("attributes"))
        img.attributes.emplace_back(a.at("attr").get<std::string>(),
                                    a.at("noun").get<std::string>());
      if (!seen.insert(img.image_id).second)
        throw FormatError(path, line_no, "duplicate image_id '" + img.image_id + "'");
      images.push_back(std::move(img));
    } catch (const json::exception& e) {
      throw FormatError(path, line_no, e.what());
    }
  });
  return images;
}

void save_images(const std::string& path, const std::vector<ImageRecord>& images) {
  auto out = open_out(path);
  for (const ImageRecord& img : images) {
    json row;
    row["image_id"] = img.image_id;
    row["width"] = img.width;
    row["height"] = img.height;
    json attrs = json::array();
    for (const auto& [attr, noun] : img.attributes)
      attrs.push_back({{"attr", attr}, {"noun", noun}});
    row["attributes"] = std::move(attrs);
    out << row.dump() << "\n";
  }
}

std::vector<ExplanationCandidate> load_candidates(const std::string& path) {
  std::vector<ExplanationCandidate> candidates;
  for_each_line(path, [&](std::size_t line_no, const json& row) {
    try {
      ExplanationCandidate c;
      c.image_id = row.at("image_id").get<std::string>();
      c.sentence = row.at("sentence").get<std::string>();
      c.log_prob = row.at("log_prob").get<double>();
      c.candidate_index = row.at("candidate_index").get<int>();
      if (c.log_prob > 0.0)
        throw FormatError(path, line_no, "log_prob must be <= 0");
      c.tokens = tokenize(c.sentence);
      candidates.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw FormatError(path, line_no, e.what());
    }
  });
  return candidates;
}

void save_candidates(const std::string& path,
                     const std::vector<ExplanationCandidate>& candidates) {
  auto out = open_out(path);
  for (const ExplanationCandidate& c : candidates) {
    json row;
    row["image_id"] = c.image_id;
    row["sentence"] = c.sentence;
    row["log_prob"] = c.log_prob;
    row["candidate_index"] = c.candidate_index;
    out << row.dump() << "\n";
  }
}

Dataset load_dataset(const std::string& images_path, const std::string& candidates_path,
                     const std::string& lexicon_path) {
  Dataset ds;
  ds.images = load_images(images_path);
  ds.lexicon = Lexicon::load(lexicon_path);

  std::set<std::string> ids;
  for (const ImageRecord& img : ds.images) ids.insert(img.image_id);

  for (ExplanationCandidate& c : load_candidates(candidates_path)) {
    if (!ids.count(c.image_id))
      throw DataError(candidates_path + ": candidate references unknown image '" +
                      c.image_id + "'");
    auto& list = ds.candidates[c.image_id];
    for (const ExplanationCandidate& prev : list)
      if (prev.candidate_index == c.candidate_index)
        throw DataError(candidates_path + ": duplicate candidate_index " +
                        std::to_string(c.candidate_index) + " for image '" +
                        c.image_id + "'");
    list.push_back(std::move(c));
  }
  return ds;
}

namespace {

json encode_real(double v) {
  // nlohmann encodes non-finite reals as null; make the sentinel explicit.
  if (std::isfinite(v)) return json(v);
  return json(nullptr);
}

double decode_real(const json& v) {
  if (v.is_null()) return -std::numeric_limits<double>::infinity();
  return v.get<double>();
}

}  // namespace

void save_ranked(const std::string& path, const std::vector<RankedRecord>& records) {
  auto out = open_out(path);
  for (const RankedRecord& r : records) {
    json row;
    row["image_id"] = r.image_id;
    row["rank"] = r.rank;
    row["sentence"] = r.sentence;
    row["S_r"] = r.relevance ? json(*r.relevance) : json(nullptr);
    row["S_f"] = r.log_prob;
    row["combined"] = encode_real(r.combined);
    json phrases = json::array();
    for (const PhraseAnnotation& p : r.phrases)
      phrases.push_back({{"text", p.text},
                         {"box", {p.box.x, p.box.y, p.box.w, p.box.h}},
                         {"s_i", p.score}});
    row["phrases"] = std::move(phrases);
    out << row.dump() << "\n";
  }
}

std::vector<RankedRecord> load_ranked(const std::string& path) {
  std::vector<RankedRecord> records;
  for_each_line(path, [&](std::size_t line_no, const json& row) {
    try {
      RankedRecord r;
      r.image_id = row.at("image_id").get<std::string>();
      r.rank = row.at("rank").get<std::size_t>();
      r.sentence = row.at("sentence").get<std::string>();
      if (!row.at("S_r").is_null()) r.relevance = row.at("S_r").get<double>();
      r.log_prob = row.at("S_f").get<double>();
      r.combined = decode_real(row.at("combined"));
      for (const auto& p : row.at("phrases")) {
        PhraseAnnotation ann;
        ann.text = p.at("text").get<std::string>();
        const auto& box = p.at("box");
        ann.box = {box.at(0).get<double>(), box.at(1).get<double>(),
                   box.at(2).get<double>(), box.at(3).get<double>()};
        ann.score = p.at("s_i").get<double>();
        r.phrases.push_back(std::move(ann));
      }
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError(path, line_no, e.what());
    }
  });
  return records;
}

RankedRecord to_record(const std::string& image_id, const RankedExplanation& r) {
  RankedRecord rec;
  rec.image_id = image_id;
  rec.rank = r.rank;
  rec.sentence = r.candidate.sentence;
  rec.relevance = r.relevance;
  rec.log_prob = r.candidate.log_prob;
  rec.combined = r.combined;
  for (const Grounding& g : r.groundings)
    rec.phrases.push_back({g.phrase.text(), g.box, g.score});
  return rec;
}

double attribute_relevance(const std::string& sentence, const ImageRecord& image,
                           const Lexicon& lex) {
  const auto phrases = chunk_phrases(tokenize(sentence), lex);
  std::size_t mentioned = 0;
  std::size_t present = 0;
  for (const AttributePhrase& p : phrases) {
    for (const AttrToken& t : p.attribute_tokens) {
      ++mentioned;
      if (image.has_attribute(t.word, p.head_noun)) ++present;
    }
  }
  if (mentioned == 0) return 0.0;
  return static_cast<double>(present) / static_cast<double>(mentioned);
}

EvalReport evaluate_ranked(const std::vector<RankedRecord>& records,
                           const std::vector<ImageRecord>& images, const Lexicon& lex) {
  std::map<std::string, const ImageRecord*> by_id;
  for (const ImageRecord& img : images) by_id[img.image_id] = &img;

  std::map<std::string, std::vector<const RankedRecord*>> per_image;
  for (const RankedRecord& r : records) {
    if (!by_id.count(r.image_id))
      throw DataError("ranked output references unknown image '" + r.image_id + "'");
    per_image[r.image_id].push_back(&r);
  }

  EvalReport report;
  for (const auto& [image_id, recs] : per_image) {
    const ImageRecord& img = *by_id.at(image_id);

    const RankedRecord* critic_top = nullptr;
    for (const RankedRecord* r : recs)
      if (r->rank == 1) critic_top = r;
    if (!critic_top)
      throw DataError("ranked output for image '" + image_id + "' has no rank-1 record");

    // Fluency-only baseline over the same candidate set (ties to lower rank).
    const RankedRecord* fluency_top = recs.front();
    for (const RankedRecord* r : recs) {
      if (r->log_prob > fluency_top->log_prob ||
          (r->log_prob == fluency_top->log_prob && r->rank < fluency_top->rank))
        fluency_top = r;
    }

    report.critic_relevance += attribute_relevance(critic_top->sentence, img, lex);
    report.fluency_relevance += attribute_relevance(fluency_top->sentence, img, lex);
    ++report.images;
  }
  if (report.images > 0) {
    report.critic_relevance /= static_cast<double>(report.images);
    report.fluency_relevance /= static_cast<double>(report.images);
  }
  return report;
}

namespace {

const std::vector<std::string>& noun_pool() {
  static const std::vector<std::string> nouns = {
      "beak", "belly", "head", "eye",   "neck",  "wing",   "breast",
      "tail", "face",  "body", "crown", "throat", "leg",   "back"};
  return nouns;
}

const std::vector<std::string>& plain_sentences() {
  static const std::vector<std::string> sents = {
      "this is a bird.",
      "a photo of a bird.",
      "the bird is in the image.",
      "this bird is here.",
  };
  return sents;
}

std::vector<std::string> sorted_words(const std::unordered_set<std::string>& set) {
  std::vector<std::string> v(set.begin(), set.end());
  std::sort(v.begin(), v.end());
  return v;
}

std::string phrases_to_sentence(const std::vector<AttributePhrase>& phrases) {
  std::string s = "this bird has";
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    s += (i == 0) ? " a " : " and a ";
    s += phrases[i].text();
  }
  s += ".";
  return s;
}

ImageRecord make_image(const std::string& id, const SynthConfig& config,
                       const std::vector<std::string>& colors,
                       const std::vector<std::string>& sizes, Rng& rng) {
  ImageRecord img;
  img.image_id = id;
  img.width = config.image_width;
  img.height = config.image_height;
  std::vector<std::string> nouns = noun_pool();
  for (std::size_t k = 0; k < config.attributes_per_image && !nouns.empty(); ++k) {
    const std::size_t pick = rng.below(nouns.size());
    const std::string noun = nouns[pick];
    nouns.erase(nouns.begin() + static_cast<long>(pick));
    const bool use_color = rng.uniform() < 0.7;
    const auto& pool = use_color ? colors : sizes;
    img.attributes.emplace_back(pool[rng.below(pool.size())], noun);
  }
  return img;
}

std::vector<ExplanationCandidate> make_candidates(const ImageRecord& img,
                                                  const Lexicon& lex,
                                                  const SynthConfig& config, Rng& rng) {
  // Ground-truth phrases in the same shape the chunker will re-extract.
  std::vector<AttributePhrase> gt;
  for (const auto& [attr, noun] : img.attributes) {
    AttributePhrase p;
    p.attribute_tokens.push_back({attr, *lex.attribute_category(attr)});
    p.head_noun = noun;
    gt.push_back(std::move(p));
  }

  auto sample_subset = [&](std::size_t k) {
    std::vector<AttributePhrase> subset;
    std::vector<std::size_t> idx(gt.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < k && !idx.empty(); ++i) {
      const std::size_t pick = rng.below(idx.size());
      subset.push_back(gt[idx[pick]]);
      idx.erase(idx.begin() + static_cast<long>(pick));
    }
    return subset;
  };

  FlipPolicy policy;  // defaults: p = 0.5, min_flips = 1

  std::vector<ExplanationCandidate> out;
  const std::size_t n = config.candidates_per_image;
  const std::size_t n_plain = std::min<std::size_t>(4, n);
  const std::size_t n_gt = std::min<std::size_t>(5, n - n_plain);
  for (std::size_t i = 0; i < n; ++i) {
    ExplanationCandidate c;
    c.image_id = img.image_id;
    c.candidate_index = static_cast<int>(i);
    if (i < n_gt) {
      c.sentence = phrases_to_sentence(sample_subset(3));
      c.log_prob = rng.uniform(-3.0, -1.0);
    } else if (i < n - n_plain) {
      const auto subset = sample_subset(3);
      c.sentence = phrases_to_sentence(make_negative(subset, lex, policy, rng));
      c.log_prob = rng.uniform(-3.0, -1.0);
    } else {
      c.sentence = plain_sentences()[rng.below(plain_sentences().size())];
      c.log_prob = rng.uniform(-9.0, -6.0);
    }
    c.tokens = tokenize(c.sentence);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

SynthBenchmark generate_synth(const SynthConfig& config) {
  if (config.attributes_per_image < 1 || config.candidates_per_image < 1 ||
      config.train_images < 1 || config.test_images < 1)
    throw ConfigError("synth-gen: all counts must be >= 1");
  if (config.attributes_per_image > noun_pool().size())
    throw ConfigError("synth-gen: attributes_per_image exceeds the noun pool (" +
                      std::to_string(noun_pool().size()) + ")");

  SynthBenchmark bench;
  bench.lexicon = Lexicon::builtin();
  const auto colors = sorted_words(bench.lexicon.color);
  const auto sizes = sorted_words(bench.lexicon.size);

  Rng rng(config.seed);
  for (std::size_t i = 0; i < config.train_images + config.test_images; ++i) {
    const bool is_test = i >= config.train_images;
    const std::string id = (is_test ? "test_" : "train_") +
                           std::to_string(is_test ? i - config.train_images : i);
    ImageRecord img = make_image(id, config, colors, sizes, rng);
    auto candidates = make_candidates(img, bench.lexicon, config, rng);
    if (is_test) {
      bench.test_images.push_back(std::move(img));
      for (auto& c : candidates) bench.test_candidates.push_back(std::move(c));
    } else {
      bench.train_images.push_back(std::move(img));
      for (auto& c : candidates) bench.train_candidates.push_back(std::move(c));
    }
  }
  return bench;
}

void write_synth(const SynthBenchmark& bench, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  save_images((dir / "images_train.jsonl").string(), bench.train_images);
  save_images((dir / "images_test.jsonl").string(), bench.test_images);
  save_candidates((dir / "candidates_train.jsonl").string(), bench.train_candidates);
  save_candidates((dir / "candidates_test.jsonl").string(), bench.test_candidates);
  bench.lexicon.save((dir / "lexicon.json").string());
}

}  // namespace pc
