#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pmif/lm.hpp"
#include "pmif/tokenizer.hpp"

namespace pmif {

struct NGramOptions {
  int order = 3;
  double add_k = 0.1;
  /// One weight per order 1..n, nonnegative, summing to 1.
  std::vector<double> lambdas;
  /// Weight of the in-context cache component. 0 disables it, giving a plain
  /// interpolated add-k n-gram. With a weight > 0 the model mixes in k-gram
  /// estimates computed from the query context itself, which makes the
  /// distribution sensitive to a document placed earlier in the context --
  /// a fixed-window model alone cannot see past the last n-1 tokens.
  double cache_lambda = 0.0;
  double cache_add_k = 0.01;

  /// Throws std::invalid_argument when any constraint is violated.
  void validate() const;
};

/// Interpolated add-k n-gram language model. Immutable after training;
/// queries are pure functions of (counts, options, context) and are
/// bit-reproducible.
class NGramLm final : public LanguageModel {
 public:
  /// Counts are collected over each line framed as <bos> tokens <eos>;
  /// every framed position except <bos> is a prediction target.
  static NGramLm train(std::span<const std::string> corpus, Vocabulary vocab,
                       NGramOptions options);

  std::size_t vocab_size() const override { return vocab_.size(); }
  LogProbVector next_logprobs(std::span<const TokenId> context) const override;
  std::vector<TokenId> tokenize_text(std::string_view text) const override;
  std::string detokenize_tokens(std::span<const TokenId> ids) const override;

  const Vocabulary& vocab() const { return vocab_; }
  const NGramOptions& options() const { return options_; }

  /// Writes the model as JSON next to a companion vocabulary file
  /// (<model stem>.vocab, referenced by relative path).
  void save(const std::filesystem::path& model_path) const;
  static NGramLm load(const std::filesystem::path& model_path);

 private:
  NGramLm(Vocabulary vocab, NGramOptions options);

  struct ContextKeyHash {
    std::size_t operator()(const std::vector<TokenId>& key) const;
  };
  struct ContextCounts {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> next;
  };
  using CountTable =
      std::unordered_map<std::vector<TokenId>, ContextCounts, ContextKeyHash>;

  void add_interpolated(std::span<const TokenId> context, double weight,
                        const CountTable& table, double add_k,
                        std::vector<double>& probs) const;

  Vocabulary vocab_;
  NGramOptions options_;
  CountTable counts_;
};

}  // namespace pmif
