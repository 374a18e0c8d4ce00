#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pmif/dialog.hpp"
#include "pmif/faith.hpp"
#include "pmif/lm.hpp"

namespace pmif {

/// One row of the decode-evaluation table: faithfulness of the generated
/// response against the document, relevance against the gold response.
struct DecodeEvalRow {
  std::string id;
  double pmi_faith_normalized = 0.0;
  double unigram_f1 = 0.0;
  double bleu4 = 0.0;
  double rouge_l = 0.0;
};

struct DecodeEvalTable {
  std::vector<DecodeEvalRow> rows;  // sorted by id
  DecodeEvalRow mean;               // id == "mean"; corpus means of the columns
};

/// Scores each generated response: normalized PMI faithfulness and unigram-F1
/// vs. the document, BLEU-4 and ROUGE-L vs. the gold response. Throws when a
/// generation is missing for any example id, when an example lacks a gold
/// response, or when the example list is empty (unless allow_empty).
DecodeEvalTable evaluate_decodes(std::span<const GroundedExample> examples,
                                 const std::map<std::string, std::string>& generated,
                                 const LanguageModel& lm,
                                 const NormalizationBounds& bounds = {},
                                 const PromptTemplate& tmpl = {}, int workers = 1,
                                 bool allow_empty = false);

}  // namespace pmif
