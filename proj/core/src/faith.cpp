#include "pmif/faith.hpp"

#include <algorithm>
#include <stdexcept>

namespace pmif {

double normalize_score(double raw, const NormalizationBounds& bounds) {
  if (!(bounds.max > bounds.min)) {
    throw std::invalid_argument("degenerate bounds: max must exceed min");
  }
  const double scaled = (raw - bounds.min) / (bounds.max - bounds.min);
  return std::clamp(scaled, 0.0, 1.0);
}

FaithScore pmi_faith(const LanguageModel& lm, const GroundedExample& example,
                     const PromptTemplate& tmpl, const NormalizationBounds& bounds) {
  if (!example.response.has_value()) {
    throw std::invalid_argument("empty response (example " + example.id + ")");
  }
  std::vector<TokenId> response = lm.tokenize_text(*example.response);
  if (response.empty()) {
    throw std::invalid_argument("empty response (example " + example.id + ")");
  }
  response.push_back(kEosId);

  const std::vector<TokenId> with_doc = build_prompt(lm, example, tmpl, true);
  const std::vector<TokenId> without_doc = build_prompt(lm, example, tmpl, false);

  FaithScore score;
  score.logprob_with_doc = sequence_logprob(lm, with_doc, response);
  score.logprob_without_doc = sequence_logprob(lm, without_doc, response);
  score.raw = score.logprob_with_doc - score.logprob_without_doc;
  score.normalized = normalize_score(score.raw, bounds);
  score.num_scored_tokens = response.size();
  return score;
}

double token_cpmi(const LanguageModel& lm, TokenId candidate,
                  const GroundedExample& example,
                  std::span<const TokenId> partial_response,
                  const PromptTemplate& tmpl) {
  std::vector<TokenId> with_doc = build_prompt(lm, example, tmpl, true);
  with_doc.insert(with_doc.end(), partial_response.begin(), partial_response.end());
  std::vector<TokenId> without_doc = build_prompt(lm, example, tmpl, false);
  without_doc.insert(without_doc.end(), partial_response.begin(), partial_response.end());

  const LogProbVector with_dist = lm.next_logprobs(with_doc);
  const LogProbVector without_dist = lm.next_logprobs(without_doc);
  if (candidate >= with_dist.size()) {
    throw std::out_of_range("token id out of range: " + std::to_string(candidate));
  }
  return with_dist[candidate] - without_dist[candidate];
}

double per_token_raw(const FaithScore& score) {
  if (score.num_scored_tokens == 0) return 0.0;
  return score.raw / static_cast<double>(score.num_scored_tokens);
}

}  // namespace pmif
