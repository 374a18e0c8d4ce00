#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmif/dialog.hpp"

namespace pmif {

/// Desk-scale synthetic stand-in for a grounded-dialog benchmark. Documents
/// are random sentences over a fixed word inventory; positives copy a
/// sentence of their own document as the response, negatives take one from
/// another document of the same split. Splits are disjoint by document and
/// labels are balanced within one.
struct SyntheticSplits {
  std::vector<std::string> training_lines;
  std::vector<GroundedExample> dev;
  std::vector<GroundedExample> test;
};

SyntheticSplits make_synthetic_corpus(std::uint64_t seed, int n_docs,
                                      int sentences_per_doc);

}  // namespace pmif
