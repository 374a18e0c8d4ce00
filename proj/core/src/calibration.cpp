#include "pmif/calibration.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace pmif {

bool binarize_label(Label label) {
  return label == Label::kFullyAttributable;
}

SplitMetrics compute_metrics(const MetricCounts& counts) {
  SplitMetrics m;
  m.counts = counts;
  const std::uint64_t predicted_positive = counts.tp + counts.fp;
  const std::uint64_t actual_positive = counts.tp + counts.fn;
  const std::uint64_t total = counts.tp + counts.fp + counts.tn + counts.fn;
  m.precision = predicted_positive > 0
                    ? static_cast<double>(counts.tp) / static_cast<double>(predicted_positive)
                    : 0.0;
  m.recall = actual_positive > 0
                 ? static_cast<double>(counts.tp) / static_cast<double>(actual_positive)
                 : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.accuracy = total > 0
                   ? static_cast<double>(counts.tp + counts.tn) / static_cast<double>(total)
                   : 0.0;
  return m;
}

double f1_at_threshold(std::span<const LabeledScore> scores, double threshold) {
  MetricCounts counts;
  for (const LabeledScore& s : scores) {
    const bool predicted = s.score > threshold;
    if (predicted && s.positive) ++counts.tp;
    if (predicted && !s.positive) ++counts.fp;
    if (!predicted && s.positive) ++counts.fn;
    if (!predicted && !s.positive) ++counts.tn;
  }
  return compute_metrics(counts).f1;
}

double calibrate_threshold(std::span<const LabeledScore> dev) {
  bool has_positive = false;
  bool has_negative = false;
  for (const LabeledScore& s : dev) {
    (s.positive ? has_positive : has_negative) = true;
  }
  if (!has_positive || !has_negative) {
    throw std::invalid_argument("degenerate dev set: needs both classes");
  }

  std::vector<double> distinct;
  distinct.reserve(dev.size());
  for (const LabeledScore& s : dev) distinct.push_back(s.score);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> candidates;
  candidates.reserve(distinct.size() + 1);
  candidates.push_back(distinct.front() - 1.0);
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
  }
  candidates.push_back(distinct.back() + 1.0);

  double best_threshold = candidates.front();
  double best_f1 = f1_at_threshold(dev, best_threshold);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double f1 = f1_at_threshold(dev, candidates[i]);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_threshold = candidates[i];
    }
  }
  return best_threshold;
}

std::map<std::string, double> calibrate_per_dataset(std::span<const LabeledScore> dev) {
  std::map<std::string, std::vector<LabeledScore>> by_tag;
  for (const LabeledScore& s : dev) {
    if (s.dataset_tag) {
      by_tag[*s.dataset_tag].push_back(s);
    }
  }
  std::map<std::string, double> thresholds;
  for (const auto& [tag, scores] : by_tag) {
    thresholds[tag] = calibrate_threshold(scores);
  }
  return thresholds;
}

ClassificationReport classification_report(std::span<const LabeledScore> test,
                                           double threshold) {
  ClassificationReport report;
  report.threshold = threshold;
  MetricCounts overall;
  std::map<std::string, MetricCounts> per_tag;
  for (const LabeledScore& s : test) {
    const bool predicted = s.score > threshold;
    MetricCounts* groups[2] = {&overall, nullptr};
    if (s.dataset_tag) groups[1] = &per_tag[*s.dataset_tag];
    for (MetricCounts* counts : groups) {
      if (counts == nullptr) continue;
      if (predicted && s.positive) ++counts->tp;
      if (predicted && !s.positive) ++counts->fp;
      if (!predicted && s.positive) ++counts->fn;
      if (!predicted && !s.positive) ++counts->tn;
    }
  }
  report.overall = compute_metrics(overall);
  for (const auto& [tag, counts] : per_tag) {
    report.per_dataset[tag] = compute_metrics(counts);
  }
  return report;
}

}  // namespace pmif
