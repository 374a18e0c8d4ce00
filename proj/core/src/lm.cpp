#include "pmif/lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmif {

double log_prob_floor() {
  static const double floor_value = std::log(kMinTokenProb);
  return floor_value;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double max_value = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(max_value)) {
    return max_value;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += std::exp(v - max_value);
  }
  return max_value + std::log(sum);
}

void floor_and_renormalize(LogProbVector& logprobs) {
  const double floor_value = log_prob_floor();
  for (double& v : logprobs) {
    if (!(v > floor_value)) {
      v = floor_value;
    }
  }
  const double lse = log_sum_exp(logprobs);
  for (double& v : logprobs) {
    v -= lse;
  }
}

double sequence_logprob(const LanguageModel& lm, std::span<const TokenId> context,
                        std::span<const TokenId> continuation) {
  std::vector<TokenId> ctx(context.begin(), context.end());
  ctx.reserve(context.size() + continuation.size());
  double total = 0.0;
  for (TokenId token : continuation) {
    const LogProbVector logprobs = lm.next_logprobs(ctx);
    if (token >= logprobs.size()) {
      throw std::out_of_range("token id out of range: " + std::to_string(token));
    }
    total += logprobs[token];
    ctx.push_back(token);
  }
  return total;
}

}  // namespace pmif
