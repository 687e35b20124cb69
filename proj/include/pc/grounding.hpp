#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pc/chunker.hpp"
#include "pc/negatives.hpp"
#include "pc/tensor.hpp"

namespace pc {

struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool operator==(const BoundingBox&) const = default;
};

// A grounded attribute phrase: region box, region features, raw grounder
// confidence. Scores are passed through unnormalized; normalizing them is
// the critic's job.
struct Grounding {
  AttributePhrase phrase;
  BoundingBox box;
  Vector features;
  double score = 0.0;

  bool operator==(const Grounding&) const = default;
};

struct ImageRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  // (attribute word, noun) pairs, in file order.
  std::vector<AttrNounPair> attributes;

  bool has_attribute(const std::string& attr, const std::string& noun) const;
  AttrNounSet attribute_set() const;

  bool operator==(const ImageRecord&) const = default;
};

class Grounder {
 public:
  virtual ~Grounder() = default;
  // Deterministic: same (image_id, phrase) always yields the same Grounding.
  virtual Grounding ground(const std::string& image_id,
                           const AttributePhrase& phrase) const = 0;
  virtual std::size_t feature_dim() const = 0;
};

// Replays precomputed groundings from a line-delimited file. Each line is a
// JSON object {image_id, phrase, box: [x,y,w,h], score, features: [...]}.
class FileGrounder : public Grounder {
 public:
  static std::unique_ptr<FileGrounder> load(const std::string& path);

  Grounding ground(const std::string& image_id,
                   const AttributePhrase& phrase) const override;
  std::size_t feature_dim() const override { return feature_dim_; }

 private:
  std::size_t feature_dim_ = 0;
  std::map<std::pair<std::string, std::string>, Grounding> table_;
};

// Writes rows in the format FileGrounder::load reads back.
void save_groundings(const std::string& path,
                     const std::vector<std::pair<std::string, Grounding>>& rows);

struct SyntheticGrounderConfig {
  std::size_t feature_dim = 64;
  double sigma = 0.0;  // deterministic noise amplitude on the score
  double base_match = 0.8;
  double base_miss = 0.2;
};

// Deterministic stand-in for a real grounding model. A phrase "matches" when
// every (attribute, noun) pair it mentions is among the image's true
// attributes; the score is base_match or base_miss plus hash-seeded noise in
// [-sigma, sigma]. Features are a unit-norm vector derived from hashing the
// phrase content and the match flag.
class SyntheticGrounder : public Grounder {
 public:
  SyntheticGrounder(std::map<std::string, ImageRecord> images,
                    SyntheticGrounderConfig config)
      : images_(std::move(images)), config_(config) {}

  Grounding ground(const std::string& image_id,
                   const AttributePhrase& phrase) const override;
  std::size_t feature_dim() const override { return config_.feature_dim; }

 private:
  std::map<std::string, ImageRecord> images_;
  SyntheticGrounderConfig config_;
};

// Grounds phrases in order; errors name the offending phrase. An empty
// phrase list is an std::invalid_argument.
std::vector<Grounding> ground_all(const Grounder& grounder,
                                  const std::string& image_id,
                                  const std::vector<AttributePhrase>& phrases);

}  // namespace pc
