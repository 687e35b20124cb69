#include "pc/grounding.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pc/errors.hpp"
#include "pc/rng.hpp"

namespace pc {

using nlohmann::json;

bool ImageRecord::has_attribute(const std::string& attr, const std::string& noun) const {
  for (const auto& [a, n] : attributes)
    if (a == attr && n == noun) return true;
  return false;
}

AttrNounSet ImageRecord::attribute_set() const {
  return AttrNounSet(attributes.begin(), attributes.end());
}

std::unique_ptr<FileGrounder> FileGrounder::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open groundings file: " + path);
  auto grounder = std::make_unique<FileGrounder>();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path, line_no, e.what());
    }
    try {
      const auto image_id = row.at("image_id").get<std::string>();
      const auto phrase_text = row.at("phrase").get<std::string>();
      const auto& box = row.at("box");
      if (!box.is_array() || box.size() != 4)
        throw FormatError(path, line_no, "box must be [x, y, w, h]");
      Grounding g;
      g.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
               box[3].get<double>()};
      g.score = row.at("score").get<double>();
      g.features = row.at("features").get<Vector>();
      // The phrase structure is not stored in the file; queries are keyed by
      // normalized text, and ground() reattaches the caller's phrase.
      if (grounder->table_.empty()) {
        grounder->feature_dim_ = g.features.size();
      } else if (g.features.size() != grounder->feature_dim_) {
        throw FormatError(path, line_no,
                          "feature dimension " + std::to_string(g.features.size()) +
                              " differs from earlier rows (" +
                              std::to_string(grounder->feature_dim_) + ")");
      }
      grounder->table_[{image_id, phrase_text}] = std::move(g);
    } catch (const json::exception& e) {
      throw FormatError(path, line_no, e.what());
    }
  }
  return grounder;
}

Grounding FileGrounder::ground(const std::string& image_id,
                               const AttributePhrase& phrase) const {
  auto it = table_.find({image_id, phrase.text()});
  if (it == table_.end())
    throw MissingGroundingError("no grounding for image '" + image_id +
                                "', phrase '" + phrase.text() + "'");
  Grounding g = it->second;
  g.phrase = phrase;
  return g;
}

void save_groundings(const std::string& path,
                     const std::vector<std::pair<std::string, Grounding>>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write groundings file: " + path);
  for (const auto& [image_id, g] : rows) {
    json row;
    row["image_id"] = image_id;
    row["phrase"] = g.phrase.text();
    row["box"] = {g.box.x, g.box.y, g.box.w, g.box.h};
    row["score"] = g.score;
    row["features"] = g.features;
    out << row.dump() << "\n";
  }
}

Grounding SyntheticGrounder::ground(const std::string& image_id,
                                    const AttributePhrase& phrase) const {
  auto it = images_.find(image_id);
  if (it == images_.end())
    throw MissingGroundingError("synthetic grounder: unknown image '" + image_id + "'");
  const ImageRecord& image = it->second;

  bool matched = true;
  for (const AttrToken& t : phrase.attribute_tokens)
    if (!image.has_attribute(t.word, phrase.head_noun)) matched = false;

  Grounding g;
  g.phrase = phrase;

  // Features depend only on phrase content and the match flag.
  std::uint64_t feat_seed = fnv1a(phrase.head_noun);
  for (const AttrToken& t : phrase.attribute_tokens) feat_seed = fnv1a(t.word, feat_seed);
  feat_seed = fnv1a(matched ? "+" : "-", feat_seed);
  g.features.resize(config_.feature_dim);
  double norm_sq = 0.0;
  for (double& v : g.features) {
    v = 2.0 * splitmix_uniform(feat_seed) - 1.0;
    norm_sq += v * v;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (double& v : g.features) v /= norm;

  // Score and box vary with the image as well.
  std::uint64_t img_seed = fnv1a(phrase.text(), fnv1a(image_id));
  const double base = matched ? config_.base_match : config_.base_miss;
  g.score = base + (2.0 * splitmix_uniform(img_seed) - 1.0) * config_.sigma;

  const double W = static_cast<double>(image.width);
  const double H = static_cast<double>(image.height);
  g.box.x = splitmix_uniform(img_seed) * W * 0.5;
  g.box.y = splitmix_uniform(img_seed) * H * 0.5;
  g.box.w = W * 0.25 + splitmix_uniform(img_seed) * (W * 0.5 - g.box.x * 0.5);
  g.box.h = H * 0.25 + splitmix_uniform(img_seed) * (H * 0.5 - g.box.y * 0.5);
  g.box.w = std::min(g.box.w, W - g.box.x);
  g.box.h = std::min(g.box.h, H - g.box.y);
  return g;
}

std::vector<Grounding> ground_all(const Grounder& grounder,
                                  const std::string& image_id,
                                  const std::vector<AttributePhrase>& phrases) {
  if (phrases.empty())
    throw std::invalid_argument("ground_all: empty phrase list");
  std::vector<Grounding> out;
  out.reserve(phrases.size());
  for (const AttributePhrase& p : phrases) {
    try {
      out.push_back(grounder.ground(image_id, p));
    } catch (const MissingGroundingError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError("grounding failed for phrase '" + p.text() + "': " + e.what());
    }
  }
  return out;
}

}  // namespace pc
