#pragma once

#include <span>

#include "pmif/dialog.hpp"
#include "pmif/lm.hpp"
#include "pmif/prompt.hpp"

namespace pmif {

/// Linear rescale bounds for raw scores. The defaults are dev-set-calibrated
/// constants; recomputing them from a scored split (its min/max raw values)
/// is up to callers.
struct NormalizationBounds {
  double min = -2.1;
  double max = 6.4;
};

/// clamp((raw - min) / (max - min), 0, 1). Throws on max <= min.
double normalize_score(double raw, const NormalizationBounds& bounds);

struct FaithScore {
  /// log Pr(r|d,h) - log Pr(r|h), in nats.
  double raw = 0.0;
  double normalized = 0.0;
  double logprob_with_doc = 0.0;
  double logprob_without_doc = 0.0;
  /// Response tokens plus the terminating <eos>.
  std::size_t num_scored_tokens = 0;
};

/// Sequence-level conditional PMI between the response and the document given
/// the history. The response is scored with a terminating <eos> so that
/// length is modeled symmetrically in both conditionals.
FaithScore pmi_faith(const LanguageModel& lm, const GroundedExample& example,
                     const PromptTemplate& tmpl = {},
                     const NormalizationBounds& bounds = {});

/// Token-level term of the same quantity:
/// log Pr(candidate | d,h,partial) - log Pr(candidate | h,partial).
/// Summing it over a response's tokens (plus <eos>) telescopes back to
/// pmi_faith(...).raw.
double token_cpmi(const LanguageModel& lm, TokenId candidate,
                  const GroundedExample& example,
                  std::span<const TokenId> partial_response,
                  const PromptTemplate& tmpl = {});

/// raw / num_scored_tokens; the per-token-mean variant, off by default in all
/// pipelines.
double per_token_raw(const FaithScore& score);

}  // namespace pmif
