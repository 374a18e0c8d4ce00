#include <benchmark/benchmark.h>

#include <random>

#include "pmif/decode.hpp"
#include "pmif/faith.hpp"
#include "pmif/ngram_lm.hpp"
#include "pmif/synthetic.hpp"
#include "pmif/text_metrics.hpp"
#include "pmif/tokenizer.hpp"

namespace {

using namespace pmif;

const SyntheticSplits& splits() {
  static const SyntheticSplits s = make_synthetic_corpus(42, 50, 5);
  return s;
}

const NGramLm& trained_lm(double cache_lambda) {
  static const NGramLm plain = [] {
    NGramOptions options;
    options.order = 3;
    options.add_k = 0.1;
    options.lambdas = {0.15, 0.25, 0.6};
    return NGramLm::train(splits().training_lines,
                          build_vocab(splits().training_lines, 1), options);
  }();
  static const NGramLm cached = [] {
    NGramOptions options;
    options.order = 3;
    options.add_k = 0.1;
    options.lambdas = {0.15, 0.25, 0.6};
    options.cache_lambda = 0.4;
    return NGramLm::train(splits().training_lines,
                          build_vocab(splits().training_lines, 1), options);
  }();
  return cache_lambda > 0.0 ? cached : plain;
}

std::vector<TokenId> long_context(const NGramLm& lm) {
  return lm.tokenize_text("document: " + splits().dev.front().document + "\nagent:");
}

void BM_Tokenize(benchmark::State& state) {
  const std::string text = splits().dev.front().document;
  const NGramLm& lm = trained_lm(0.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lm.tokenize_text(text));
  }
}
BENCHMARK(BM_Tokenize);

void BM_NextLogprobsPlain(benchmark::State& state) {
  const NGramLm& lm = trained_lm(0.0);
  const std::vector<TokenId> ctx = long_context(lm);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lm.next_logprobs(ctx));
  }
}
BENCHMARK(BM_NextLogprobsPlain);

void BM_NextLogprobsCached(benchmark::State& state) {
  const NGramLm& lm = trained_lm(0.4);
  const std::vector<TokenId> ctx = long_context(lm);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lm.next_logprobs(ctx));
  }
}
BENCHMARK(BM_NextLogprobsCached);

void BM_TopPMask(benchmark::State& state) {
  const std::size_t vocab = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  LogProbVector dist(vocab);
  for (double& v : dist) {
    v = -static_cast<double>(rng() % 1000) / 100.0;
  }
  floor_and_renormalize(dist);
  for (auto _ : state) {
    benchmark::DoNotOptimize(top_p_mask(dist, 0.6));
  }
}
BENCHMARK(BM_TopPMask)->Arg(1000)->Arg(10000);

void BM_PmiFaithScore(benchmark::State& state) {
  const NGramLm& lm = trained_lm(0.4);
  const GroundedExample& example = splits().dev.front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(pmi_faith(lm, example));
  }
}
BENCHMARK(BM_PmiFaithScore);

void BM_DecodeGreedyPmi(benchmark::State& state) {
  const NGramLm& lm = trained_lm(0.4);
  const GroundedExample& example = splits().test.front();
  DecodeConfig config;
  config.objective = Objective::kPmi;
  config.alpha = 0.25;
  config.top_p = 0.6;
  config.max_len = 16;
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode(lm, example, config));
  }
}
BENCHMARK(BM_DecodeGreedyPmi);

void BM_DecodeBeamPmi(benchmark::State& state) {
  const NGramLm& lm = trained_lm(0.4);
  const GroundedExample& example = splits().test.front();
  DecodeConfig config;
  config.strategy = Strategy::kBeam;
  config.beam_width = 4;
  config.objective = Objective::kPmi;
  config.alpha = 0.25;
  config.top_p = 0.6;
  config.max_len = 16;
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode(lm, example, config));
  }
}
BENCHMARK(BM_DecodeBeamPmi);

void BM_Bleu4(benchmark::State& state) {
  const std::string a = splits().dev[0].document;
  const std::string b = splits().dev[1].document;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bleu4(a, b));
  }
}
BENCHMARK(BM_Bleu4);

void BM_RougeL(benchmark::State& state) {
  const std::string a = splits().dev[0].document;
  const std::string b = splits().dev[1].document;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rouge_l(a, b));
  }
}
BENCHMARK(BM_RougeL);

}  // namespace

BENCHMARK_MAIN();
