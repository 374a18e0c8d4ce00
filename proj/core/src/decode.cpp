#include "pmif/decode.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace pmif {

namespace {

struct ScoredCandidate {
  TokenId token = 0;
  double combined = 0.0;
  double loglik = 0.0;
};

/// Shared per-step machinery; prompts are tokenized once per decode.
class StepScorer {
 public:
  StepScorer(const LanguageModel& lm, const GroundedExample& example,
             const DecodeConfig& config, const PromptTemplate& tmpl)
      : lm_(lm),
        config_(config),
        prompt_with_(build_prompt(lm, example, tmpl, true)),
        prompt_without_(build_prompt(lm, example, tmpl, false)) {}

  bool needs_cpmi() const {
    return config_.objective == Objective::kPmi && config_.alpha != 0.0;
  }

  /// Scored candidates for expanding `hyp`, in ascending token id order.
  std::vector<ScoredCandidate> candidates(const Hypothesis& hyp) const {
    std::vector<TokenId> ctx = prompt_with_;
    ctx.insert(ctx.end(), hyp.tokens.begin(), hyp.tokens.end());
    const LogProbVector with_dist = lm_.next_logprobs(ctx);

    TopPMask mask = top_p_mask(with_dist, config_.top_p);
    if (hyp.tokens.size() < static_cast<std::size_t>(config_.min_len)) {
      suppress_eos(mask, with_dist);
    }

    LogProbVector without_dist;
    if (needs_cpmi()) {
      std::vector<TokenId> ctx_without = prompt_without_;
      ctx_without.insert(ctx_without.end(), hyp.tokens.begin(), hyp.tokens.end());
      without_dist = lm_.next_logprobs(ctx_without);
    }

    std::vector<ScoredCandidate> out;
    out.reserve(mask.members.size());
    for (TokenId token : mask.members) {
      const double loglik = with_dist[token];
      double combined = loglik;
      if (needs_cpmi()) {
        combined = (1.0 - config_.alpha) * loglik +
                   config_.alpha * (loglik - without_dist[token]);
      }
      out.push_back({token, combined, loglik});
    }
    return out;
  }

 private:
  /// Removes <eos>; if that empties the mask, falls back to the
  /// highest-likelihood non-eos token.
  void suppress_eos(TopPMask& mask, const LogProbVector& with_dist) const {
    std::erase(mask.members, kEosId);
    if (!mask.members.empty()) return;
    std::optional<TokenId> best;
    for (TokenId v = 0; v < with_dist.size(); ++v) {
      if (v == kEosId) continue;
      if (!best || with_dist[v] > with_dist[*best]) best = v;
    }
    if (!best) {
      throw std::logic_error("vocabulary has no non-eos token");
    }
    mask.members.push_back(*best);
  }

  const LanguageModel& lm_;
  const DecodeConfig& config_;
  std::vector<TokenId> prompt_with_;
  std::vector<TokenId> prompt_without_;
};

const ScoredCandidate& best_candidate(const std::vector<ScoredCandidate>& candidates) {
  // Candidates come in ascending id order, so strict > keeps the lowest id on ties.
  const ScoredCandidate* best = &candidates.front();
  for (const ScoredCandidate& c : candidates) {
    if (c.combined > best->combined) best = &c;
  }
  return *best;
}

Hypothesis decode_greedy(const StepScorer& scorer, const DecodeConfig& config) {
  Hypothesis hyp;
  while (!hyp.finished &&
         hyp.tokens.size() < static_cast<std::size_t>(config.max_len)) {
    const std::vector<ScoredCandidate> candidates = scorer.candidates(hyp);
    const ScoredCandidate& best = best_candidate(candidates);
    hyp.combined_score += best.combined;
    hyp.loglik += best.loglik;
    if (best.token == kEosId) {
      hyp.finished = true;
    } else {
      hyp.tokens.push_back(best.token);
    }
  }
  return hyp;
}

Hypothesis decode_beam(const StepScorer& scorer, const DecodeConfig& config) {
  struct PoolEntry {
    std::size_t parent = 0;
    TokenId token = 0;
    double combined = 0.0;
    double loglik = 0.0;
  };

  std::vector<Hypothesis> beams{Hypothesis{}};
  std::optional<Hypothesis> best_finished;

  for (int step = 0; step < config.max_len && !beams.empty(); ++step) {
    std::vector<PoolEntry> pool;
    for (std::size_t i = 0; i < beams.size(); ++i) {
      for (const ScoredCandidate& c : scorer.candidates(beams[i])) {
        pool.push_back({i, c.token, beams[i].combined_score + c.combined,
                        beams[i].loglik + c.loglik});
      }
    }
    std::sort(pool.begin(), pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
      if (a.combined != b.combined) return a.combined > b.combined;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    const std::size_t keep =
        std::min<std::size_t>(pool.size(), static_cast<std::size_t>(config.beam_width));

    std::vector<Hypothesis> next_beams;
    next_beams.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const PoolEntry& entry = pool[i];
      Hypothesis child = beams[entry.parent];
      child.combined_score = entry.combined;
      child.loglik = entry.loglik;
      if (entry.token == kEosId) {
        child.finished = true;
        if (!best_finished || child.combined_score > best_finished->combined_score) {
          best_finished = std::move(child);
        }
      } else {
        child.tokens.push_back(entry.token);
        next_beams.push_back(std::move(child));
      }
    }
    beams = std::move(next_beams);
  }

  if (best_finished) return *std::move(best_finished);
  if (beams.empty()) {
    throw std::logic_error("beam search ended with no hypotheses");
  }
  return beams.front();
}

}  // namespace

void DecodeConfig::validate() const {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("alpha must be in [0, 1]");
  }
  if (!(top_p > 0.0) || top_p > 1.0) {
    throw std::invalid_argument("top_p must be in (0, 1]");
  }
  if (beam_width < 1) {
    throw std::invalid_argument("beam_width must be >= 1");
  }
  if (max_len < 1) {
    throw std::invalid_argument("max_len must be >= 1");
  }
  if (min_len < 0) {
    throw std::invalid_argument("min_len must be >= 0");
  }
}

bool TopPMask::contains(TokenId id) const {
  return std::binary_search(members.begin(), members.end(), id);
}

TopPMask top_p_mask(const LogProbVector& dist, double p) {
  if (!(p > 0.0) || p > 1.0) {
    throw std::invalid_argument("top_p must be in (0, 1]");
  }
  std::vector<TokenId> order(dist.size());
  for (TokenId v = 0; v < dist.size(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(), [&dist](TokenId a, TokenId b) {
    if (dist[a] != dist[b]) return dist[a] > dist[b];
    return a < b;
  });

  TopPMask mask;
  double cumulative = 0.0;
  for (TokenId v : order) {
    mask.members.push_back(v);
    cumulative += std::exp(dist[v]);
    if (cumulative >= p) break;
  }
  std::sort(mask.members.begin(), mask.members.end());
  return mask;
}

double step_score(const LanguageModel& lm, TokenId candidate, const Hypothesis& state,
                  const GroundedExample& example, const DecodeConfig& config,
                  const PromptTemplate& tmpl) {
  config.validate();
  std::vector<TokenId> ctx = build_prompt(lm, example, tmpl, true);
  ctx.insert(ctx.end(), state.tokens.begin(), state.tokens.end());
  const LogProbVector with_dist = lm.next_logprobs(ctx);
  if (candidate >= with_dist.size()) {
    throw std::out_of_range("token id out of range: " + std::to_string(candidate));
  }
  if (config.objective == Objective::kLikelihood || config.alpha == 0.0) {
    return with_dist[candidate];
  }
  std::vector<TokenId> ctx_without = build_prompt(lm, example, tmpl, false);
  ctx_without.insert(ctx_without.end(), state.tokens.begin(), state.tokens.end());
  const LogProbVector without_dist = lm.next_logprobs(ctx_without);
  return (1.0 - config.alpha) * with_dist[candidate] +
         config.alpha * (with_dist[candidate] - without_dist[candidate]);
}

TokenId decode_step(const LanguageModel& lm, const Hypothesis& state,
                    const GroundedExample& example, const DecodeConfig& config,
                    const PromptTemplate& tmpl) {
  config.validate();
  if (state.finished) {
    throw std::invalid_argument("decode_step on a finished hypothesis");
  }
  if (state.tokens.size() >= static_cast<std::size_t>(config.max_len)) {
    throw std::invalid_argument("decode_step past max_len");
  }
  const StepScorer scorer(lm, example, config, tmpl);
  return best_candidate(scorer.candidates(state)).token;
}

Hypothesis decode(const LanguageModel& lm, const GroundedExample& example,
                  const DecodeConfig& config, const PromptTemplate& tmpl) {
  config.validate();
  const StepScorer scorer(lm, example, config, tmpl);
  if (config.strategy == Strategy::kGreedy) {
    return decode_greedy(scorer, config);
  }
  return decode_beam(scorer, config);
}

}  // namespace pmif
