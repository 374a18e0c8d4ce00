#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pmif/tokenizer.hpp"

namespace pmif {

/// Natural-log next-token distribution over the full vocabulary.
/// Contract: logsumexp(values) == 0 within 1e-6 and no entry is -inf.
using LogProbVector = std::vector<double>;

/// Probabilities are floored at this value before renormalization so that
/// log-ratios never divide by zero.
inline constexpr double kMinTokenProb = 1e-12;

double log_prob_floor();

double log_sum_exp(std::span<const double> values);

/// Floors every entry at log(1e-12), then shifts so logsumexp == 0.
void floor_and_renormalize(LogProbVector& logprobs);

/// Uniform interface over the conditional distributions Pr(next token | context).
/// Backends own their tokenization: the in-process n-gram uses its vocabulary,
/// a remote server tokenizes on its side.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::size_t vocab_size() const = 0;

  /// Normalized natural-log distribution over the full vocabulary.
  virtual LogProbVector next_logprobs(std::span<const TokenId> context) const = 0;

  virtual std::vector<TokenId> tokenize_text(std::string_view text) const = 0;

  /// Inverse mapping used to render decoded token ids as text.
  virtual std::string detokenize_tokens(std::span<const TokenId> ids) const = 0;
};

/// log Pr(continuation | context), accumulated strictly left to right.
/// An empty continuation yields 0.
double sequence_logprob(const LanguageModel& lm, std::span<const TokenId> context,
                        std::span<const TokenId> continuation);

}  // namespace pmif
