#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "pmif/dialog.hpp"

namespace pmif {

struct LabeledScore {
  std::string id;
  double score = 0.0;
  bool positive = false;
  std::optional<std::string> dataset_tag;
};

/// fully_attributable is the positive class; generic and
/// not_fully_attributable are negative.
bool binarize_label(Label label);

struct MetricCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
};

/// Zero-denominator precision/recall/F1/accuracy are defined as 0.
struct SplitMetrics {
  MetricCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
};

SplitMetrics compute_metrics(const MetricCounts& counts);

struct ClassificationReport {
  double threshold = 0.0;
  SplitMetrics overall;
  std::map<std::string, SplitMetrics> per_dataset;
};

/// F1 of the "score > threshold" classifier over the given points.
double f1_at_threshold(std::span<const LabeledScore> scores, double threshold);

/// Chooses the threshold maximizing dev F1 among midpoints of consecutive
/// distinct scores plus (min-1) and (max+1); ties break toward the smallest
/// threshold. Throws on a one-class dev set.
double calibrate_threshold(std::span<const LabeledScore> dev);

/// Per-tag calibration over the subsets sharing each dataset_tag.
std::map<std::string, double> calibrate_per_dataset(std::span<const LabeledScore> dev);

/// Counts and derived measures with the strict "score > threshold" rule,
/// overall and grouped by dataset_tag (untagged points count toward the
/// overall row only).
ClassificationReport classification_report(std::span<const LabeledScore> test,
                                           double threshold);

}  // namespace pmif
