#include "pmif/eval.hpp"

#include <algorithm>
#include <stdexcept>

#include "pmif/parallel.hpp"
#include "pmif/text_metrics.hpp"

namespace pmif {

DecodeEvalTable evaluate_decodes(std::span<const GroundedExample> examples,
                                 const std::map<std::string, std::string>& generated,
                                 const LanguageModel& lm, const NormalizationBounds& bounds,
                                 const PromptTemplate& tmpl, int workers, bool allow_empty) {
  DecodeEvalTable table;
  table.mean.id = "mean";
  if (examples.empty()) {
    if (allow_empty) return table;
    throw std::invalid_argument("no examples to evaluate");
  }

  std::string missing;
  std::size_t missing_count = 0;
  for (const GroundedExample& example : examples) {
    if (generated.find(example.id) == generated.end()) {
      ++missing_count;
      if (missing_count <= 10) {
        if (!missing.empty()) missing += ", ";
        missing += example.id;
      }
    }
  }
  if (missing_count > 0) {
    if (missing_count > 10) missing += ", ...";
    throw std::invalid_argument("missing generated responses for ids: " + missing);
  }
  for (const GroundedExample& example : examples) {
    if (!example.response.has_value()) {
      throw std::invalid_argument("example " + example.id + " has no gold response");
    }
  }

  table.rows.resize(examples.size());
  parallel_for(examples.size(), workers, [&](std::size_t i) {
    const GroundedExample& example = examples[i];
    const std::string& hypothesis = generated.at(example.id);

    GroundedExample scored = example;
    scored.response = hypothesis;

    DecodeEvalRow row;
    row.id = example.id;
    row.pmi_faith_normalized = pmi_faith(lm, scored, tmpl, bounds).normalized;
    row.unigram_f1 = unigram_f1(hypothesis, example.document);
    row.bleu4 = bleu4(hypothesis, *example.response);
    row.rouge_l = rouge_l(hypothesis, *example.response);
    table.rows[i] = std::move(row);
  });

  std::sort(table.rows.begin(), table.rows.end(),
            [](const DecodeEvalRow& a, const DecodeEvalRow& b) { return a.id < b.id; });

  for (const DecodeEvalRow& row : table.rows) {
    table.mean.pmi_faith_normalized += row.pmi_faith_normalized;
    table.mean.unigram_f1 += row.unigram_f1;
    table.mean.bleu4 += row.bleu4;
    table.mean.rouge_l += row.rouge_l;
  }
  const double n = static_cast<double>(table.rows.size());
  table.mean.pmi_faith_normalized /= n;
  table.mean.unigram_f1 /= n;
  table.mean.bleu4 /= n;
  table.mean.rouge_l /= n;
  return table;
}

}  // namespace pmif
