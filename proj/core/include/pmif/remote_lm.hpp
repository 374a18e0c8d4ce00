#pragma once

#include <chrono>
#include <string>

#include "pmif/lm.hpp"

namespace pmif {

/// HTTP client for the logits wire protocol:
///   GET  /v1/info          -> {"vocab_size": <int>, "model": <string>}
///   POST /v1/tokenize      {"text": s}           -> {"ids": [...]}
///   POST /v1/next_logprobs {"context_ids": [..]} -> {"logprobs": [...; vocab_size]}
/// Errors are non-200 responses with {"error": <string>} bodies. The server
/// owns tokenization; ids follow the reserved-id convention (pad/bos/eos/unk
/// = 0..3). Requests are stateless beyond the cached vocab_size, so
/// concurrent in-flight calls are fine.
class RemoteLmClient final : public LanguageModel {
 public:
  explicit RemoteLmClient(std::string base_url,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

  /// Fetches and caches vocab_size and the model name; must be called before
  /// queries. Subsequent logprob responses of a different length are rejected.
  std::size_t handshake();

  std::size_t vocab_size() const override;
  LogProbVector next_logprobs(std::span<const TokenId> context) const override;
  std::vector<TokenId> tokenize_text(std::string_view text) const override;
  /// POST /v1/detokenize {"ids": [..]} -> {"text": s}; an optional endpoint
  /// servers implement when decoded output must be rendered as text.
  std::string detokenize_tokens(std::span<const TokenId> ids) const override;

  const std::string& base_url() const { return base_url_; }
  const std::string& model_name() const { return model_name_; }

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
  std::size_t vocab_size_ = 0;
  std::string model_name_;
};

}  // namespace pmif
