#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pmif {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kBosId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr std::size_t kNumReserved = 4;

/// The literal spellings used for the reserved ids in vocabulary files.
std::span<const std::string_view> reserved_literals();

/// NFC-normalizes, lowercases and splits text into word tokens. Runs of
/// punctuation/symbol characters come out as their own tokens, so "A cat."
/// yields {"a", "cat", "."}.
std::vector<std::string> split_tokens(std::string_view text);

/// True for tokens made of punctuation/symbol characters (as produced by
/// split_tokens, which never mixes the two classes in one token).
bool is_punctuation_token(std::string_view token);

/// Immutable token-string <-> id mapping. Ids 0..3 are always the reserved
/// <pad>, <bos>, <eos>, <unk> tokens, in that order.
class Vocabulary {
 public:
  Vocabulary();

  /// Builds a vocabulary from content tokens (reserved tokens are prepended).
  /// Throws std::invalid_argument on duplicate tokens.
  static Vocabulary from_content_tokens(std::vector<std::string> content_tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  std::span<const std::string> tokens() const { return tokens_; }

  /// One token per line, line number == id.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> index_;
};

/// Collects every normalized token occurring at least min_count times,
/// ordered by descending count then lexicographic. Throws on an empty corpus.
Vocabulary build_vocab(std::span<const std::string> corpus, std::uint64_t min_count);

/// Maps text to token ids; unknown tokens become kUnkId. Never emits
/// pad/bos/eos.
std::vector<TokenId> tokenize(const Vocabulary& vocab, std::string_view text);

/// Joins token strings with single spaces, omitting reserved tokens.
/// Throws std::out_of_range("unknown token id") on an invalid id.
std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids);

}  // namespace pmif
