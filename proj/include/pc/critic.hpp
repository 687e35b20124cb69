#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pc/adam.hpp"
#include "pc/grounding.hpp"
#include "pc/lstm.hpp"
#include "pc/mlp.hpp"
#include "pc/negatives.hpp"
#include "pc/rng.hpp"

namespace pc {

struct CriticDims {
  std::size_t d_w = 32;      // word embedding width
  std::size_t d_r = 64;      // region feature width
  std::size_t d_h = 64;      // LSTM hidden width
  std::size_t d_hidden = 32; // regressor hidden width
  std::size_t buckets = 4096;

  bool operator==(const CriticDims&) const = default;
};

// The trainable phrase critic: hashed word embeddings, an LSTM encoder over
// per-phrase (text, features, score) tuples, and a two-layer regressor that
// maps the final hidden state to the relevance score.
struct CriticModel {
  CriticDims dims;
  Matrix embedding;  // buckets x d_w
  LstmCellParams lstm;
  TwoLayerParams regressor;

  static CriticModel init(const CriticDims& dims, std::uint64_t seed);

  std::vector<ParamRef> params();
  GradStore zero_grads() const;
};

struct TrainPair {
  std::string image_id;
  std::vector<Grounding> positive;
  std::vector<Grounding> negative;
};

struct TrainConfig {
  double margin = 1.0;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t negatives_per_image = 5;
  FlipPolicy flip_policy;
  std::size_t patience = 0;  // 0 disables early stopping

  void validate() const;  // throws pc::ConfigError
};

std::size_t embedding_bucket(const std::string& word, std::size_t buckets);

// Mean of bucket-hashed embeddings over attribute words + head noun.
Vector embed_phrase(const CriticModel& model, const AttributePhrase& phrase);

// [embed_phrase; features; score], length d_w + d_r + 1.
Vector encode_step_input(const CriticModel& model, const Grounding& g);

// Saved forward pass of critic_score, consumed by critic_backward.
struct CriticTape {
  std::vector<Grounding> groundings;
  std::vector<LstmStepCache> steps;
  TwoLayerCache regressor;
  double score = 0.0;
  bool valid = false;
};

double critic_score(const CriticModel& model, const std::vector<Grounding>& groundings,
                    CriticTape* tape = nullptr);

// Adds d(score)/d(theta) * upstream into grads. Throws pc::StateError if the
// tape has not been filled by a forward pass.
void critic_backward(const CriticModel& model, const CriticTape& tape,
                     double upstream, GradStore& grads);

double train_pair_loss(const CriticModel& model, const TrainPair& pair, double margin);

// Loss and gradients for one pair in a single pass.
double train_pair_loss_backward(const CriticModel& model, const TrainPair& pair,
                                double margin, GradStore& grads);

// Pair-at-a-time Adam training over flipped-attribute negatives; images with
// no flippable attribute fall back to mismatch sampling. Returns the
// per-epoch mean loss history. Deterministic given config.seed.
std::vector<double> train(CriticModel& model,
                          const std::vector<ImageRecord>& images,
                          const Grounder& grounder, const Lexicon& lex,
                          const TrainConfig& config);

// Builds the same kind of pairs train() consumes, for evaluation.
std::vector<TrainPair> build_pairs(const std::vector<ImageRecord>& images,
                                   const Grounder& grounder, const Lexicon& lex,
                                   const FlipPolicy& policy,
                                   std::size_t pairs_per_image, Rng& rng);

// Ground-truth phrases of an image, in attribute file order.
std::vector<AttributePhrase> image_phrases(const ImageRecord& image,
                                           const Lexicon& lex);

// Fraction of pairs with score(pos) > score(neg); ties count as failures.
double pairwise_accuracy(const CriticModel& model, const std::vector<TrainPair>& pairs);

// Versioned checkpoint with dims, seed, and every named parameter tensor.
void save_checkpoint(const CriticModel& model, std::uint64_t seed,
                     const std::string& path);
CriticModel load_checkpoint(const std::string& path, std::uint64_t* seed = nullptr);

}  // namespace pc
