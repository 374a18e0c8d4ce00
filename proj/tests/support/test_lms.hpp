#pragma once

// Test-only backends and oracles. These stay independent of the decoding and
// scoring paths they are used to check.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pmif/decode.hpp"
#include "pmif/dialog.hpp"
#include "pmif/lm.hpp"
#include "pmif/prompt.hpp"
#include "pmif/tokenizer.hpp"

namespace pmif::testing {

/// Backend with two fixed distributions, switched on whether the context
/// contains a marker token (by default the id of "document", which only the
/// with-document prompt contains).
class TableLm final : public LanguageModel {
 public:
  TableLm(Vocabulary vocab, LogProbVector with_doc_logprobs,
          LogProbVector without_doc_logprobs, TokenId marker)
      : vocab_(std::move(vocab)),
        with_(std::move(with_doc_logprobs)),
        without_(std::move(without_doc_logprobs)),
        marker_(marker) {}

  std::size_t vocab_size() const override { return vocab_.size(); }

  LogProbVector next_logprobs(std::span<const TokenId> context) const override {
    for (TokenId id : context) {
      if (id == marker_) return with_;
    }
    return without_;
  }

  std::vector<TokenId> tokenize_text(std::string_view text) const override {
    return tokenize(vocab_, text);
  }

  std::string detokenize_tokens(std::span<const TokenId> ids) const override {
    return detokenize(vocab_, ids);
  }

 private:
  Vocabulary vocab_;
  LogProbVector with_;
  LogProbVector without_;
  TokenId marker_;
};

/// Builds a normalized log distribution from sparse probabilities; unlisted
/// tokens share the leftover mass (or get floored when none is left).
inline LogProbVector make_dist(std::size_t vocab_size,
                               const std::map<TokenId, double>& probs) {
  double listed = 0.0;
  for (const auto& [id, p] : probs) listed += p;
  const double leftover = std::max(0.0, 1.0 - listed);
  const double rest = vocab_size > probs.size()
                          ? leftover / static_cast<double>(vocab_size - probs.size())
                          : 0.0;
  LogProbVector logprobs(vocab_size);
  for (std::size_t v = 0; v < vocab_size; ++v) {
    const auto it = probs.find(static_cast<TokenId>(v));
    const double p = it != probs.end() ? it->second : rest;
    logprobs[v] = std::log(p);
  }
  floor_and_renormalize(logprobs);
  return logprobs;
}

/// Builds the small vocabulary fixtures share: reserved tokens, the prompt
/// template words, then the given content words.
inline Vocabulary fixture_vocab(std::vector<std::string> content_words) {
  std::vector<std::string> words = {"document", ":", "agent", "user"};
  for (std::string& w : content_words) words.push_back(std::move(w));
  return Vocabulary::from_content_tokens(std::move(words));
}

/// Deterministic pseudo-random backend: the distribution is a pure function
/// of (seed, context). Different contexts, in particular with- and
/// without-document prompts, get unrelated distributions.
class RandomCtxLm final : public LanguageModel {
 public:
  RandomCtxLm(std::uint64_t seed, Vocabulary vocab)
      : seed_(seed), vocab_(std::move(vocab)) {}

  std::size_t vocab_size() const override { return vocab_.size(); }

  LogProbVector next_logprobs(std::span<const TokenId> context) const override {
    std::uint64_t h = seed_ ^ 0x9e3779b97f4a7c15ull;
    for (TokenId id : context) {
      h ^= id + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    std::mt19937_64 engine(h);
    LogProbVector logprobs(vocab_.size());
    for (double& v : logprobs) {
      const double u =
          (static_cast<double>(engine() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
      v = -std::log(u);  // exponential draw; normalized below
    }
    double sum = 0.0;
    for (double v : logprobs) sum += v;
    for (double& v : logprobs) v = std::log(v / sum);
    floor_and_renormalize(logprobs);
    return logprobs;
  }

  std::vector<TokenId> tokenize_text(std::string_view text) const override {
    return tokenize(vocab_, text);
  }

  std::string detokenize_tokens(std::span<const TokenId> ids) const override {
    return detokenize(vocab_, ids);
  }

 private:
  std::uint64_t seed_;
  Vocabulary vocab_;
};

inline GroundedExample simple_example(std::string id, std::string document,
                                      std::string response) {
  GroundedExample example;
  example.id = std::move(id);
  example.document = std::move(document);
  example.response = std::move(response);
  return example;
}

/// Direct evaluation of the combined decoding objective of a full sequence,
/// by stepping the backend token by token; independent of decode()'s
/// incremental bookkeeping.
inline double sequence_objective(const LanguageModel& lm, const GroundedExample& example,
                                 const DecodeConfig& config, const PromptTemplate& tmpl,
                                 const std::vector<TokenId>& tokens, bool finished) {
  std::vector<TokenId> ctx_with = build_prompt(lm, example, tmpl, true);
  std::vector<TokenId> ctx_without = build_prompt(lm, example, tmpl, false);
  const bool use_cpmi = config.objective == Objective::kPmi && config.alpha != 0.0;

  std::vector<TokenId> all = tokens;
  if (finished) all.push_back(kEosId);

  double score = 0.0;
  for (TokenId token : all) {
    const LogProbVector with_dist = lm.next_logprobs(ctx_with);
    const double w = with_dist[token];
    if (use_cpmi) {
      const LogProbVector without_dist = lm.next_logprobs(ctx_without);
      score += (1.0 - config.alpha) * w + config.alpha * (w - without_dist[token]);
    } else {
      score += w;
    }
    ctx_with.push_back(token);
    ctx_without.push_back(token);
  }
  return score;
}

struct OracleDecode {
  double best_score = 0.0;
  std::vector<TokenId> tokens;
};

/// Exhaustive maximization of the combined objective over all terminated
/// sequences with lengths in [min_len, max_len - 1]. Mirrors the search
/// space of an unmasked exhaustive-width beam.
inline OracleDecode brute_force_decode(const LanguageModel& lm,
                                       const GroundedExample& example,
                                       const DecodeConfig& config,
                                       const PromptTemplate& tmpl = {}) {
  OracleDecode best;
  bool have_best = false;

  std::vector<TokenId> current;
  const auto consider = [&](const std::vector<TokenId>& tokens) {
    const double score = sequence_objective(lm, example, config, tmpl, tokens, true);
    if (!have_best || score > best.best_score) {
      have_best = true;
      best.best_score = score;
      best.tokens = tokens;
    }
  };

  const std::size_t vocab = lm.vocab_size();
  const auto recurse = [&](auto&& self, int depth) -> void {
    if (static_cast<int>(current.size()) >= config.min_len &&
        static_cast<int>(current.size()) <= config.max_len - 1) {
      consider(current);
    }
    if (depth >= config.max_len - 1) return;  // deeper sequences cannot terminate
    for (TokenId v = 0; v < vocab; ++v) {
      if (v == kEosId) continue;
      current.push_back(v);
      self(self, depth + 1);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

}  // namespace pmif::testing
