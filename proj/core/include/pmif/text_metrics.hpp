#pragma once

#include <string_view>

namespace pmif {

struct MetricReport {
  double unigram_f1 = 0.0;  // [0, 1]
  double bleu4 = 0.0;       // [0, 100]
  double rouge_l = 0.0;     // [0, 1]
};

/// Harmonic mean of clipped unigram precision/recall. Both texts are
/// normalized and punctuation tokens are removed entirely. 0 when either side
/// is empty or nothing overlaps.
double unigram_f1(std::string_view candidate, std::string_view reference);

/// Sentence BLEU-4 on a [0, 100] scale with a fully specified smoothing rule:
/// orders with no available n-grams are excluded from the geometric mean and
/// zero-match orders use p_n = 0.1 / t_n. Punctuation tokens are retained.
double bleu4(std::string_view candidate, std::string_view reference);

/// LCS-based F1 (beta = 1). Punctuation tokens are retained.
double rouge_l(std::string_view candidate, std::string_view reference);

MetricReport lexical_metrics(std::string_view candidate, std::string_view reference_document,
                             std::string_view reference_response);

}  // namespace pmif
