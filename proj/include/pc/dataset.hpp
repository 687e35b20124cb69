#pragma once

#include <map>
#include <string>
#include <vector>

#include "pc/ranker.hpp"

namespace pc {

struct Dataset {
  std::vector<ImageRecord> images;
  std::map<std::string, std::vector<ExplanationCandidate>> candidates;
  Lexicon lexicon;

  const ImageRecord* find_image(const std::string& image_id) const;
};

// Line-delimited image records: {image_id, width, height,
// attributes: [{attr, noun}]}.
std::vector<ImageRecord> load_images(const std::string& path);
void save_images(const std::string& path, const std::vector<ImageRecord>& images);

// Line-delimited candidates: {image_id, sentence, log_prob, candidate_index}.
std::vector<ExplanationCandidate> load_candidates(const std::string& path);
void save_candidates(const std::string& path,
                     const std::vector<ExplanationCandidate>& candidates);

// Loads and cross-validates the three inputs; a candidate referencing an
// unknown image is a referential-integrity error.
Dataset load_dataset(const std::string& images_path, const std::string& candidates_path,
                     const std::string& lexicon_path);

// One line per ranked candidate in cmd_rank's output file.
struct PhraseAnnotation {
  std::string text;
  BoundingBox box;
  double score = 0.0;  // grounder confidence s_i

  bool operator==(const PhraseAnnotation&) const = default;
};

struct RankedRecord {
  std::string image_id;
  std::size_t rank = 0;
  std::string sentence;
  std::optional<double> relevance;  // S_r; absent for zero-phrase candidates
  double log_prob = 0.0;            // S_f
  double combined = 0.0;            // -inf encoded as null
  std::vector<PhraseAnnotation> phrases;

  bool operator==(const RankedRecord&) const = default;
};

std::vector<RankedRecord> load_ranked(const std::string& path);
void save_ranked(const std::string& path, const std::vector<RankedRecord>& records);

RankedRecord to_record(const std::string& image_id, const RankedExplanation& r);

// Fraction of (attribute, noun) pairs mentioned by `sentence` that are in the
// image's true attributes; 0.0 when the sentence mentions none.
double attribute_relevance(const std::string& sentence, const ImageRecord& image,
                           const Lexicon& lex);

struct EvalReport {
  double critic_relevance = 0.0;   // mean over images, top-1 of the given ranking
  double fluency_relevance = 0.0;  // mean over images, top-1 by S_f alone
  std::size_t images = 0;
};

// Compares the shipped ranking's top-1 against a fluency-only rerank of the
// same candidate set.
EvalReport evaluate_ranked(const std::vector<RankedRecord>& records,
                           const std::vector<ImageRecord>& images, const Lexicon& lex);

// Seeded synthetic benchmark: images with known attributes plus candidate
// sentences mixing ground-truth-derived, attribute-flipped, and
// attribute-free forms with assigned log-probabilities.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t train_images = 40;
  std::size_t test_images = 10;
  std::size_t attributes_per_image = 6;
  std::size_t candidates_per_image = 20;
  int image_width = 640;
  int image_height = 480;
};

struct SynthBenchmark {
  std::vector<ImageRecord> train_images;
  std::vector<ImageRecord> test_images;
  std::vector<ExplanationCandidate> train_candidates;
  std::vector<ExplanationCandidate> test_candidates;
  Lexicon lexicon;
};

SynthBenchmark generate_synth(const SynthConfig& config);

// Writes images_{train,test}.jsonl, candidates_{train,test}.jsonl, and
// lexicon.json under `out_dir`.
void write_synth(const SynthBenchmark& bench, const std::string& out_dir);

}  // namespace pc
