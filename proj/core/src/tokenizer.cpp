#include "pmif/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf16.h>

namespace pmif {

namespace {

constexpr std::array<std::string_view, kNumReserved> kReserved = {
    "<pad>", "<bos>", "<eos>", "<unk>"};

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* instance = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || instance == nullptr) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  return *instance;
}

bool is_separator(UChar32 c) {
  if (u_ispunct(c)) return true;
  switch (u_charType(c)) {
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::span<const std::string_view> reserved_literals() {
  return {kReserved.data(), kReserved.size()};
}

std::vector<std::string> split_tokens(std::string_view text) {
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode status = U_ZERO_ERROR;
  us = nfc().normalize(us, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error("unicode normalization failed");
  }
  us.toLower(icu::Locale::getRoot());

  std::vector<std::string> out;
  icu::UnicodeString current;
  bool current_is_separator = false;

  auto flush = [&] {
    if (current.isEmpty()) return;
    std::string utf8;
    current.toUTF8String(utf8);
    out.push_back(std::move(utf8));
    current.remove();
  };

  for (int32_t i = 0; i < us.length();) {
    UChar32 c;
    U16_NEXT(us, i, us.length(), c);
    if (u_isUWhiteSpace(c)) {
      flush();
      continue;
    }
    const bool sep = is_separator(c);
    if (!current.isEmpty() && sep != current_is_separator) {
      flush();
    }
    current_is_separator = sep;
    current.append(c);
  }
  flush();
  return out;
}

bool is_punctuation_token(std::string_view token) {
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(token.data(), static_cast<int32_t>(token.size())));
  if (us.isEmpty()) return false;
  UChar32 first = us.char32At(0);
  return is_separator(first);
}

Vocabulary::Vocabulary() {
  tokens_.reserve(kNumReserved);
  for (std::string_view literal : kReserved) {
    index_.emplace(std::string(literal), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(literal);
  }
}

Vocabulary Vocabulary::from_content_tokens(std::vector<std::string> content_tokens) {
  Vocabulary vocab;
  for (std::string& token : content_tokens) {
    TokenId id = static_cast<TokenId>(vocab.tokens_.size());
    auto [it, inserted] = vocab.index_.emplace(token, id);
    if (!inserted) {
      throw std::invalid_argument("duplicate token: " + token);
    }
    vocab.tokens_.push_back(std::move(token));
  }
  return vocab;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw std::out_of_range("unknown token id: " + std::to_string(id));
  }
  return tokens_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ostringstream body;
  for (const std::string& token : tokens_) {
    body << token << '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open vocabulary file for writing: " + path.string());
  }
  out << body.str();
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open vocabulary file: " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  if (lines.size() < kNumReserved) {
    throw std::runtime_error("vocabulary file too short: " + path.string());
  }
  for (std::size_t i = 0; i < kNumReserved; ++i) {
    if (lines[i] != kReserved[i]) {
      throw std::runtime_error("vocabulary file missing reserved token line " +
                               std::to_string(i) + ": " + path.string());
    }
  }
  return from_content_tokens(
      std::vector<std::string>(lines.begin() + kNumReserved, lines.end()));
}

Vocabulary build_vocab(std::span<const std::string> corpus, std::uint64_t min_count) {
  if (min_count < 1) {
    throw std::invalid_argument("min_count must be >= 1");
  }
  if (corpus.empty()) {
    throw std::runtime_error("empty corpus");
  }
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const std::string& line : corpus) {
    for (std::string& token : split_tokens(line)) {
      ++counts[std::move(token)];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  kept.reserve(counts.size());
  for (auto& [token, count] : counts) {
    if (count >= min_count) {
      kept.emplace_back(token, count);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [token, count] : kept) {
    tokens.push_back(std::move(token));
  }
  return Vocabulary::from_content_tokens(std::move(tokens));
}

std::vector<TokenId> tokenize(const Vocabulary& vocab, std::string_view text) {
  std::vector<TokenId> ids;
  for (const std::string& token : split_tokens(text)) {
    ids.push_back(vocab.find(token).value_or(kUnkId));
  }
  return ids;
}

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string out;
  for (TokenId id : ids) {
    const std::string& token = vocab.token(id);
    if (id < kNumReserved) continue;
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

}  // namespace pmif
