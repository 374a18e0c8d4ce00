#include "pmif/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "pmif/tokenizer.hpp"

namespace pmif {

namespace {

std::vector<std::string> metric_tokens(std::string_view text, bool strip_punct) {
  std::vector<std::string> tokens = split_tokens(text);
  if (strip_punct) {
    std::erase_if(tokens, [](const std::string& t) { return is_punctuation_token(t); });
  }
  return tokens;
}

std::map<std::string, std::size_t> counts_of(const std::vector<std::string>& tokens) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& t : tokens) ++counts[t];
  return counts;
}

double f1_from(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::size_t> prev(m + 1, 0);
  std::vector<std::size_t> curr(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (a[i - 1] == b[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

}  // namespace

double unigram_f1(std::string_view candidate, std::string_view reference) {
  const std::vector<std::string> cand = metric_tokens(candidate, /*strip_punct=*/true);
  const std::vector<std::string> ref = metric_tokens(reference, /*strip_punct=*/true);
  if (cand.empty() || ref.empty()) return 0.0;

  const auto cand_counts = counts_of(cand);
  const auto ref_counts = counts_of(ref);
  std::size_t overlap = 0;
  for (const auto& [token, count] : cand_counts) {
    const auto it = ref_counts.find(token);
    if (it != ref_counts.end()) {
      overlap += std::min(count, it->second);
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(cand.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(ref.size());
  return f1_from(precision, recall);
}

double bleu4(std::string_view candidate, std::string_view reference) {
  const std::vector<std::string> cand = metric_tokens(candidate, /*strip_punct=*/false);
  const std::vector<std::string> ref = metric_tokens(reference, /*strip_punct=*/false);
  if (cand.empty()) return 0.0;

  double log_precision_sum = 0.0;
  std::size_t included_orders = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    if (cand.size() < n) break;  // t_n == 0: order excluded
    const std::size_t t_n = cand.size() - n + 1;

    const auto join = [](const std::vector<std::string>& tokens, std::size_t start,
                         std::size_t n_len) {
      std::string out;
      for (std::size_t i = 0; i < n_len; ++i) {
        if (i > 0) out += '\x1f';
        out += tokens[start + i];
      }
      return out;
    };
    std::map<std::string, std::size_t> ref_ngrams;
    if (ref.size() >= n) {
      for (std::size_t i = 0; i + n <= ref.size(); ++i) {
        ++ref_ngrams[join(ref, i, n)];
      }
    }
    std::map<std::string, std::size_t> cand_ngrams;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) {
      ++cand_ngrams[join(cand, i, n)];
    }
    std::size_t matches = 0;
    for (const auto& [gram, count] : cand_ngrams) {
      const auto it = ref_ngrams.find(gram);
      if (it != ref_ngrams.end()) {
        matches += std::min(count, it->second);
      }
    }

    const double p_n = matches > 0
                           ? static_cast<double>(matches) / static_cast<double>(t_n)
                           : 0.1 / static_cast<double>(t_n);
    log_precision_sum += std::log(p_n);
    ++included_orders;
  }
  if (included_orders == 0) return 0.0;

  const double ratio = static_cast<double>(ref.size()) / static_cast<double>(cand.size());
  const double brevity_penalty = std::min(1.0, std::exp(1.0 - ratio));
  return 100.0 * brevity_penalty *
         std::exp(log_precision_sum / static_cast<double>(included_orders));
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const std::vector<std::string> cand = metric_tokens(candidate, /*strip_punct=*/false);
  const std::vector<std::string> ref = metric_tokens(reference, /*strip_punct=*/false);
  if (cand.empty() || ref.empty()) return 0.0;

  const std::size_t lcs = lcs_length(cand, ref);
  if (lcs == 0) return 0.0;
  const double precision = static_cast<double>(lcs) / static_cast<double>(cand.size());
  const double recall = static_cast<double>(lcs) / static_cast<double>(ref.size());
  return f1_from(precision, recall);
}

MetricReport lexical_metrics(std::string_view candidate, std::string_view reference_document,
                             std::string_view reference_response) {
  return MetricReport{
      .unigram_f1 = unigram_f1(candidate, reference_document),
      .bleu4 = bleu4(candidate, reference_response),
      .rouge_l = rouge_l(candidate, reference_response),
  };
}

}  // namespace pmif
