#include "pmif/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pmif/dataio.hpp"

namespace pmif {

namespace {

std::vector<TokenId> parse_context_key(const std::string& key) {
  std::vector<TokenId> context;
  std::istringstream in(key);
  std::uint64_t id = 0;
  while (in >> id) {
    context.push_back(static_cast<TokenId>(id));
  }
  return context;
}

std::string format_context_key(std::span<const TokenId> context) {
  std::string key;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i > 0) key += ' ';
    key += std::to_string(context[i]);
  }
  return key;
}

}  // namespace

void NGramOptions::validate() const {
  if (order < 1) {
    throw std::invalid_argument("order must be >= 1");
  }
  if (add_k < 0.0) {
    throw std::invalid_argument("add_k must be >= 0");
  }
  if (lambdas.size() != static_cast<std::size_t>(order)) {
    throw std::invalid_argument("lambdas length must equal order");
  }
  double sum = 0.0;
  for (double l : lambdas) {
    if (l < 0.0) {
      throw std::invalid_argument("lambdas must be nonnegative");
    }
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("lambdas must sum to 1");
  }
  if (cache_lambda < 0.0 || cache_lambda >= 1.0) {
    throw std::invalid_argument("cache_lambda must be in [0, 1)");
  }
  if (cache_lambda > 0.0 && cache_add_k <= 0.0) {
    throw std::invalid_argument("cache_add_k must be > 0 when the cache is enabled");
  }
}

std::size_t NGramLm::ContextKeyHash::operator()(const std::vector<TokenId>& key) const {
  std::uint64_t h = 1469598103934665603ull;
  for (TokenId id : key) {
    h ^= id;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

NGramLm::NGramLm(Vocabulary vocab, NGramOptions options)
    : vocab_(std::move(vocab)), options_(std::move(options)) {
  options_.validate();
}

NGramLm NGramLm::train(std::span<const std::string> corpus, Vocabulary vocab,
                       NGramOptions options) {
  NGramLm lm(std::move(vocab), std::move(options));
  const int order = lm.options_.order;
  for (const std::string& line : corpus) {
    std::vector<TokenId> framed;
    framed.push_back(kBosId);
    for (TokenId id : tokenize(lm.vocab_, line)) {
      framed.push_back(id);
    }
    framed.push_back(kEosId);
    for (std::size_t t = 1; t < framed.size(); ++t) {
      const TokenId target = framed[t];
      const std::size_t max_len = std::min<std::size_t>(order - 1, t);
      for (std::size_t j = 0; j <= max_len; ++j) {
        std::vector<TokenId> key(framed.begin() + (t - j), framed.begin() + t);
        ContextCounts& cc = lm.counts_[std::move(key)];
        cc.total += 1;
        cc.next[target] += 1;
      }
    }
  }
  return lm;
}

void NGramLm::add_interpolated(std::span<const TokenId> context, double weight,
                               const CountTable& table, double add_k,
                               std::vector<double>& probs) const {
  const std::size_t vocab_count = vocab_.size();
  for (int k = 1; k <= options_.order; ++k) {
    const double lambda = weight * options_.lambdas[static_cast<std::size_t>(k - 1)];
    if (lambda == 0.0) continue;
    const std::size_t window =
        std::min<std::size_t>(static_cast<std::size_t>(k - 1), context.size());
    const std::vector<TokenId> key(context.end() - window, context.end());
    const auto it = table.find(key);
    const std::uint64_t total = it != table.end() ? it->second.total : 0;
    const double denom = static_cast<double>(total) + add_k * static_cast<double>(vocab_count);
    if (denom <= 0.0) continue;
    const double base = lambda * add_k / denom;
    if (base != 0.0) {
      for (double& p : probs) p += base;
    }
    if (it != table.end()) {
      for (const auto& [token, count] : it->second.next) {
        probs[token] += lambda * static_cast<double>(count) / denom;
      }
    }
  }
}

LogProbVector NGramLm::next_logprobs(std::span<const TokenId> context) const {
  const std::size_t vocab_count = vocab_.size();
  for (TokenId id : context) {
    if (id >= vocab_count) {
      throw std::out_of_range("token id out of range: " + std::to_string(id));
    }
  }
  std::vector<double> probs(vocab_count, 0.0);
  const double cache_lambda = options_.cache_lambda;
  add_interpolated(context, 1.0 - cache_lambda, counts_, options_.add_k, probs);

  if (cache_lambda > 0.0) {
    // k-gram estimates computed from the query context itself.
    for (int k = 1; k <= options_.order; ++k) {
      const double lambda = cache_lambda * options_.lambdas[static_cast<std::size_t>(k - 1)];
      if (lambda == 0.0) continue;
      const std::size_t window =
          std::min<std::size_t>(static_cast<std::size_t>(k - 1), context.size());
      std::span<const TokenId> suffix = context.subspan(context.size() - window);
      std::uint64_t total = 0;
      std::unordered_map<TokenId, std::uint64_t> continuations;
      for (std::size_t i = window; i < context.size(); ++i) {
        if (std::equal(suffix.begin(), suffix.end(), context.begin() + (i - window))) {
          total += 1;
          continuations[context[i]] += 1;
        }
      }
      const double denom = static_cast<double>(total) +
                           options_.cache_add_k * static_cast<double>(vocab_count);
      if (denom <= 0.0) continue;
      const double base = lambda * options_.cache_add_k / denom;
      for (double& p : probs) p += base;
      for (const auto& [token, count] : continuations) {
        probs[token] += lambda * static_cast<double>(count) / denom;
      }
    }
  }

  LogProbVector logprobs(vocab_count);
  for (std::size_t v = 0; v < vocab_count; ++v) {
    logprobs[v] = std::log(probs[v]);
  }
  floor_and_renormalize(logprobs);
  return logprobs;
}

std::vector<TokenId> NGramLm::tokenize_text(std::string_view text) const {
  return tokenize(vocab_, text);
}

std::string NGramLm::detokenize_tokens(std::span<const TokenId> ids) const {
  return detokenize(vocab_, ids);
}

void NGramLm::save(const std::filesystem::path& model_path) const {
  std::filesystem::path vocab_path = model_path;
  vocab_path.replace_extension(".vocab");

  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [key, cc] : counts_) {
    nlohmann::json next = nlohmann::json::object();
    for (const auto& [token, count] : cc.next) {
      next[std::to_string(token)] = count;
    }
    counts[format_context_key(key)] = std::move(next);
  }

  nlohmann::json model = {
      {"version", 1},
      {"order", options_.order},
      {"add_k", options_.add_k},
      {"lambdas", options_.lambdas},
      {"cache_lambda", options_.cache_lambda},
      {"cache_add_k", options_.cache_add_k},
      {"vocab_file", vocab_path.filename().string()},
      {"counts", std::move(counts)},
  };

  std::ostringstream vocab_body;
  for (const std::string& token : vocab_.tokens()) {
    vocab_body << token << '\n';
  }
  write_file_atomic(vocab_path, vocab_body.str());
  write_file_atomic(model_path, model.dump() + "\n");
}

NGramLm NGramLm::load(const std::filesystem::path& model_path) {
  std::ifstream in(model_path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open model file: " + model_path.string());
  }
  nlohmann::json model;
  try {
    in >> model;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("cannot parse model file " + model_path.string() + ": " +
                             e.what());
  }
  if (!model.contains("version") || model["version"].get<int>() != 1) {
    throw std::runtime_error("unsupported model version in " + model_path.string());
  }

  NGramOptions options;
  options.order = model.at("order").get<int>();
  options.add_k = model.at("add_k").get<double>();
  options.lambdas = model.at("lambdas").get<std::vector<double>>();
  options.cache_lambda = model.value("cache_lambda", 0.0);
  options.cache_add_k = model.value("cache_add_k", 0.01);

  const std::filesystem::path vocab_path =
      model_path.parent_path() / model.at("vocab_file").get<std::string>();
  Vocabulary vocab = Vocabulary::load(vocab_path);

  NGramLm lm(std::move(vocab), std::move(options));
  for (const auto& [key, next] : model.at("counts").items()) {
    std::vector<TokenId> context = parse_context_key(key);
    ContextCounts& cc = lm.counts_[std::move(context)];
    for (const auto& [token, count] : next.items()) {
      const TokenId id = static_cast<TokenId>(std::stoul(token));
      const std::uint64_t n = count.get<std::uint64_t>();
      cc.next[id] = n;
      cc.total += n;
    }
  }
  return lm;
}

}  // namespace pmif
