#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pc/critic.hpp"

namespace pc {

struct ExplanationCandidate {
  std::string image_id;
  std::string sentence;
  TokenSequence tokens;
  double log_prob = 0.0;  // S_f = log P(w_0..T), <= 0
  int candidate_index = 0;
};

struct RankedExplanation {
  ExplanationCandidate candidate;
  std::vector<AttributePhrase> phrases;
  std::vector<Grounding> groundings;
  std::optional<double> relevance;  // absent for zero-phrase candidates
  double combined = 0.0;            // -inf sentinel when relevance is absent
  bool grounding_failed = false;
  std::size_t rank = 0;  // 1-based
};

// S_r + lambda * S_f. Throws std::invalid_argument for lambda < 0.
double combined_score(double relevance, double fluency, double lambda);

// Chunk, ground, and score each candidate, then sort by combined score
// descending with ties broken by ascending candidate_index. Candidates with
// no extractable phrases (or a failed grounding) get a -inf combined score
// and sink to the bottom in index order.
std::vector<RankedExplanation> rank(const std::vector<ExplanationCandidate>& candidates,
                                    const CriticModel& model, const Grounder& grounder,
                                    const Lexicon& lex, double lambda);

const RankedExplanation& select_best(const std::vector<RankedExplanation>& ranked);

}  // namespace pc
