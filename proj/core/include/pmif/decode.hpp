#pragma once

#include <vector>

#include "pmif/dialog.hpp"
#include "pmif/faith.hpp"
#include "pmif/lm.hpp"
#include "pmif/prompt.hpp"

namespace pmif {

enum class Strategy { kGreedy, kBeam };
enum class Objective { kLikelihood, kPmi };

struct DecodeConfig {
  Strategy strategy = Strategy::kGreedy;
  Objective objective = Objective::kLikelihood;
  /// Weight of the token-level CPMI term in the combined per-step score.
  double alpha = 0.25;
  /// Mask size; 1.0 disables masking.
  double top_p = 0.6;
  int beam_width = 4;
  int max_len = 64;
  int min_len = 1;

  void validate() const;
};

struct Hypothesis {
  /// Response tokens; the terminating <eos> is reflected in `finished`, not
  /// stored here.
  std::vector<TokenId> tokens;
  /// Left-to-right sum of per-step combined scores of the chosen tokens
  /// (including the <eos> step when finished).
  double combined_score = 0.0;
  /// Same accumulation of the log-likelihood term alone.
  double loglik = 0.0;
  bool finished = false;
};

/// Minimum-cardinality set of highest-probability tokens whose mass reaches p.
struct TopPMask {
  /// Ascending token id order.
  std::vector<TokenId> members;
  bool contains(TokenId id) const;
};

/// Ties in probability are broken by ascending token id; the likelihood
/// argmax is always a member.
TopPMask top_p_mask(const LogProbVector& dist, double p);

/// Per-step additive score of a candidate continuation token:
/// (1-alpha) * log Pr(v|d,h,r) + alpha * CPMI(v; d | h, r) for the pmi
/// objective, plain log-likelihood otherwise.
double step_score(const LanguageModel& lm, TokenId candidate, const Hypothesis& state,
                  const GroundedExample& example, const DecodeConfig& config,
                  const PromptTemplate& tmpl = {});

/// Argmax of step_score over the top-p mask of the with-document likelihood
/// distribution; <eos> is suppressed while the response is shorter than
/// min_len. Ties break toward the lowest token id.
TokenId decode_step(const LanguageModel& lm, const Hypothesis& state,
                    const GroundedExample& example, const DecodeConfig& config,
                    const PromptTemplate& tmpl = {});

/// Greedy or beam search over the combined objective. The example's response
/// field is ignored. Beam search keeps the best beam_width expansions per
/// step, sets finished ones aside, and returns the best finished hypothesis
/// (falling back to the best full-length one); scores are never
/// length-normalized.
Hypothesis decode(const LanguageModel& lm, const GroundedExample& example,
                  const DecodeConfig& config, const PromptTemplate& tmpl = {});

}  // namespace pmif
