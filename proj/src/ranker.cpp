#include "pc/ranker.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "pc/errors.hpp"

namespace pc {

double combined_score(double relevance, double fluency, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("combined_score: lambda must be >= 0");
  return relevance + lambda * fluency;
}

std::vector<RankedExplanation> rank(const std::vector<ExplanationCandidate>& candidates,
                                    const CriticModel& model, const Grounder& grounder,
                                    const Lexicon& lex, double lambda) {
  if (candidates.empty()) throw std::invalid_argument("rank: empty candidate list");
  if (lambda < 0.0) throw std::invalid_argument("rank: lambda must be >= 0");

  std::vector<RankedExplanation> out;
  out.reserve(candidates.size());
  for (const ExplanationCandidate& cand : candidates) {
    RankedExplanation r;
    r.candidate = cand;
    r.phrases = chunk_phrases(cand.tokens, lex);
    if (r.phrases.empty()) {
      r.combined = -std::numeric_limits<double>::infinity();
      out.push_back(std::move(r));
      continue;
    }
    try {
      r.groundings = ground_all(grounder, cand.image_id, r.phrases);
      r.relevance = critic_score(model, r.groundings);
      r.combined = combined_score(*r.relevance, cand.log_prob, lambda);
    } catch (const MissingGroundingError&) {
      r.grounding_failed = true;
      r.groundings.clear();
      r.relevance.reset();
      r.combined = -std::numeric_limits<double>::infinity();
    }
    out.push_back(std::move(r));
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const RankedExplanation& a, const RankedExplanation& b) {
                     if (a.combined != b.combined) return a.combined > b.combined;
                     return a.candidate.candidate_index < b.candidate.candidate_index;
                   });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

const RankedExplanation& select_best(const std::vector<RankedExplanation>& ranked) {
  if (ranked.empty()) throw std::invalid_argument("select_best: empty ranking");
  return ranked.front();
}

}  // namespace pc
