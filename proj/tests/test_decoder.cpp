#include <doctest.h>

#include <cmath>
#include <random>

#include "pmif/decode.hpp"
#include "pmif/ngram_lm.hpp"
#include "support/test_lms.hpp"

using namespace pmif;
using namespace pmif::testing;

namespace {

/// with-doc {a:.5, b:.3, c:.2}, without-doc {a:.6, b:.1, c:.3}; everything
/// else floored. a < b < c in id order.
struct StepFixture {
  TableLm lm;
  GroundedExample example;
  TokenId a, b, c;

  static StepFixture make() {
    Vocabulary vocab = fixture_vocab({"d0", "a", "b", "c"});
    const TokenId a = *vocab.find("a");
    const TokenId b = *vocab.find("b");
    const TokenId c = *vocab.find("c");
    const TokenId marker = *vocab.find("document");
    const std::size_t size = vocab.size();
    LogProbVector with_doc = make_dist(size, {{a, 0.5}, {b, 0.3}, {c, 0.2}});
    LogProbVector without_doc = make_dist(size, {{a, 0.6}, {b, 0.1}, {c, 0.3}});
    return StepFixture{
        TableLm(std::move(vocab), std::move(with_doc), std::move(without_doc), marker),
        simple_example("s", "d0", ""), a, b, c};
  }
};

NGramLm document_blind_unigram() {
  const std::vector<std::string> lines = {"a b c d0 document agent :"};
  NGramOptions options;
  options.order = 1;
  options.add_k = 0.5;
  options.lambdas = {1.0};
  return NGramLm::train(lines, build_vocab(lines, 1), std::move(options));
}

NGramLm random_cached_trigram(std::mt19937_64& rng) {
  const std::vector<std::string> pool = {"sun",  "moon", "star", "rock",
                                         "tree", "bird", "."};
  std::vector<std::string> lines;
  const int n_lines = 5 + static_cast<int>(rng() % 6);
  for (int i = 0; i < n_lines; ++i) {
    std::string line;
    const int len = 4 + static_cast<int>(rng() % 8);
    for (int j = 0; j < len; ++j) {
      if (j > 0) line += ' ';
      line += pool[rng() % pool.size()];
    }
    lines.push_back(std::move(line));
  }
  NGramOptions options;
  options.order = 3;
  options.add_k = 0.2;
  options.lambdas = {0.2, 0.3, 0.5};
  options.cache_lambda = rng() % 2 == 0 ? 0.0 : 0.35;
  return NGramLm::train(lines, build_vocab(lines, 1), std::move(options));
}

GroundedExample random_example(std::mt19937_64& rng, const std::string& id) {
  const std::vector<std::string> pool = {"sun",  "moon", "star", "rock",
                                         "tree", "bird", "."};
  std::string doc;
  for (int i = 0; i < 8; ++i) doc += pool[rng() % pool.size()] + std::string(" ");
  GroundedExample example = simple_example(id, doc, "");
  if (rng() % 2 == 0) {
    example.history.push_back({Speaker::kUser, "sun rock tree"});
  }
  return example;
}

double recompute_combined(const LanguageModel& lm, const GroundedExample& example,
                          const DecodeConfig& config, const Hypothesis& result) {
  return sequence_objective(lm, example, config, PromptTemplate{}, result.tokens,
                            result.finished);
}

}  // namespace

TEST_SUITE("decoder") {

TEST_CASE("top_p_mask follows the cumulative rule") {
  const StepFixture f = StepFixture::make();
  const LogProbVector dist =
      f.lm.next_logprobs(f.lm.tokenize_text("document: d0\nagent:"));

  SUBCASE("p = 0.6 keeps {a, b}") {
    const TopPMask mask = top_p_mask(dist, 0.6);
    REQUIRE(mask.members.size() == 2);
    CHECK(mask.contains(f.a));
    CHECK(mask.contains(f.b));
  }
  SUBCASE("p = 1.0 keeps the full support") {
    const TopPMask mask = top_p_mask(dist, 1.0);
    CHECK(mask.members.size() == dist.size());
  }
}

TEST_CASE("top_p_mask breaks probability ties by ascending id") {
  // Two equally likely tokens; a p below their shared mass keeps only the
  // lower id.
  LogProbVector dist = make_dist(8, {{4, 0.5}, {5, 0.5}});
  const TopPMask mask = top_p_mask(dist, 0.45);
  REQUIRE(mask.members.size() == 1);
  CHECK(mask.members[0] == 4);

  const TopPMask both = top_p_mask(dist, 0.75);
  REQUIRE(both.members.size() == 2);
  CHECK(both.members[0] == 4);
  CHECK(both.members[1] == 5);
}

TEST_CASE("top_p_mask always contains the argmax and is minimal") {
  std::mt19937_64 rng(17);
  const Vocabulary vocab = fixture_vocab({"u", "v", "w", "x", "y"});
  const RandomCtxLm lm(3, vocab);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TokenId> ctx;
    for (int i = 0; i < 3; ++i) ctx.push_back(static_cast<TokenId>(rng() % vocab.size()));
    const LogProbVector dist = lm.next_logprobs(ctx);
    const double p = 0.05 + static_cast<double>(rng() % 95) / 100.0;
    const TopPMask mask = top_p_mask(dist, p);

    TokenId argmax = 0;
    for (TokenId v = 1; v < dist.size(); ++v) {
      if (dist[v] > dist[argmax]) argmax = v;
    }
    CHECK(mask.contains(argmax));

    double mass = 0.0;
    double smallest = 1.0;
    for (TokenId v : mask.members) {
      mass += std::exp(dist[v]);
      smallest = std::min(smallest, std::exp(dist[v]));
    }
    CHECK(mass >= p - 1e-12);
    if (mask.members.size() > 1) {
      CHECK(mass - smallest < p);  // dropping the weakest member breaks the bound
    }
  }
}

TEST_CASE("step_score reproduces the hand arithmetic") {
  const StepFixture f = StepFixture::make();
  const Hypothesis empty;

  DecodeConfig config;
  config.objective = Objective::kPmi;

  SUBCASE("alpha 0.25 prefers a") {
    config.alpha = 0.25;
    const double sa = step_score(f.lm, f.a, empty, f.example, config);
    const double sb = step_score(f.lm, f.b, empty, f.example, config);
    CHECK(sa == doctest::Approx(-0.5654).epsilon(1e-4));
    CHECK(sb == doctest::Approx(-0.6283).epsilon(1e-4));
    CHECK(sa > sb);
  }
  SUBCASE("alpha 0.5 prefers the document-grounded b") {
    config.alpha = 0.5;
    const double sa = step_score(f.lm, f.a, empty, f.example, config);
    const double sb = step_score(f.lm, f.b, empty, f.example, config);
    CHECK(sa == doctest::Approx(-0.4377).epsilon(1e-4));
    CHECK(sb == doctest::Approx(-0.0527).epsilon(1e-4));
    CHECK(sb > sa);
  }
  SUBCASE("alpha 0 equals the log-likelihood exactly") {
    config.alpha = 0.0;
    const LogProbVector with_dist =
        f.lm.next_logprobs(f.lm.tokenize_text("document: d0\nagent:"));
    CHECK(step_score(f.lm, f.a, empty, f.example, config) == with_dist[f.a]);
  }
}

TEST_CASE("decode_step takes the masked argmax") {
  const StepFixture f = StepFixture::make();
  const Hypothesis empty;
  DecodeConfig config;
  config.objective = Objective::kPmi;
  config.top_p = 0.6;

  config.alpha = 0.25;
  CHECK(decode_step(f.lm, empty, f.example, config) == f.a);
  config.alpha = 0.5;
  CHECK(decode_step(f.lm, empty, f.example, config) == f.b);
  config.alpha = 0.0;
  config.top_p = 1.0;
  CHECK(decode_step(f.lm, empty, f.example, config) == f.a);  // plain greedy argmax
}

TEST_CASE("pmi with alpha 0 and no mask degenerates to likelihood") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const NGramLm lm = random_cached_trigram(rng);
    const GroundedExample example = random_example(rng, "d" + std::to_string(trial));

    DecodeConfig likelihood;
    likelihood.objective = Objective::kLikelihood;
    likelihood.max_len = 8;
    DecodeConfig pmi_zero = likelihood;
    pmi_zero.objective = Objective::kPmi;
    pmi_zero.alpha = 0.0;
    pmi_zero.top_p = 1.0;
    likelihood.top_p = 1.0;

    const Hypothesis a = decode(lm, example, likelihood);
    const Hypothesis b = decode(lm, example, pmi_zero);
    CHECK(a.tokens == b.tokens);
    CHECK(a.finished == b.finished);
    CHECK(a.combined_score == b.combined_score);
    CHECK(b.combined_score == b.loglik);
  }
}

TEST_CASE("beam width 1 is token-identical to greedy") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const NGramLm lm = random_cached_trigram(rng);
    const GroundedExample example = random_example(rng, "b" + std::to_string(trial));

    DecodeConfig config;
    config.objective = trial % 2 == 0 ? Objective::kPmi : Objective::kLikelihood;
    config.alpha = 0.25;
    config.top_p = trial % 3 == 0 ? 1.0 : 0.8;
    config.max_len = 8;

    DecodeConfig greedy = config;
    greedy.strategy = Strategy::kGreedy;
    DecodeConfig beam1 = config;
    beam1.strategy = Strategy::kBeam;
    beam1.beam_width = 1;

    const Hypothesis g = decode(lm, example, greedy);
    const Hypothesis b = decode(lm, example, beam1);
    CHECK(g.tokens == b.tokens);
    CHECK(g.finished == b.finished);
    CHECK(g.combined_score == b.combined_score);
  }
}

TEST_CASE("document-blind backend makes pmi equal to likelihood") {
  const NGramLm lm = document_blind_unigram();
  GroundedExample example = simple_example("db", "d0 a b", "");

  DecodeConfig likelihood;
  likelihood.max_len = 6;
  DecodeConfig pmi = likelihood;
  pmi.objective = Objective::kPmi;
  pmi.alpha = 0.7;

  const Hypothesis a = decode(lm, example, likelihood);
  const Hypothesis b = decode(lm, example, pmi);
  CHECK(a.tokens == b.tokens);
  CHECK(a.finished == b.finished);
}

TEST_CASE("exhaustive beam matches the brute-force objective") {
  std::mt19937_64 rng(47);
  Vocabulary vocab = Vocabulary::from_content_tokens({"v0", "v1", "v2", "v3", "v4"});
  for (int trial = 0; trial < 10; ++trial) {
    const RandomCtxLm lm(rng(), vocab);
    GroundedExample example = simple_example("x" + std::to_string(trial), "v0 v1 v2", "");

    DecodeConfig config;
    config.strategy = Strategy::kBeam;
    config.objective = Objective::kPmi;
    config.alpha = trial % 2 == 0 ? 0.25 : 0.5;
    config.top_p = 1.0;
    config.beam_width = 2000;
    config.max_len = 3;
    config.min_len = 1;

    const Hypothesis result = decode(lm, example, config);
    const OracleDecode oracle = brute_force_decode(lm, example, config);

    CHECK(std::abs(result.combined_score - oracle.best_score) <= 1e-9);
    CHECK(result.finished);
    CHECK(std::abs(recompute_combined(lm, example, config, result) -
                   result.combined_score) <= 1e-9);
  }
}

TEST_CASE("scores accumulate left to right") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const NGramLm lm = random_cached_trigram(rng);
    const GroundedExample example = random_example(rng, "acc" + std::to_string(trial));
    DecodeConfig config;
    config.objective = Objective::kPmi;
    config.alpha = 0.25;
    config.top_p = 0.9;
    config.max_len = 6;

    const Hypothesis result = decode(lm, example, config);
    CHECK(std::abs(recompute_combined(lm, example, config, result) -
                   result.combined_score) <= 1e-9);

    DecodeConfig loglik_view = config;
    loglik_view.objective = Objective::kLikelihood;
    CHECK(std::abs(sequence_objective(lm, example, loglik_view, PromptTemplate{},
                                      result.tokens, result.finished) -
                   result.loglik) <= 1e-9);
  }
}

TEST_CASE("eos is suppressed below min_len") {
  Vocabulary vocab = fixture_vocab({"d0", "a", "b"});
  const TokenId a = *vocab.find("a");
  const TokenId marker = *vocab.find("document");
  const std::size_t size = vocab.size();
  // eos dominates; the p=0.5 mask is {eos} alone, so suppression must fall
  // back to the best non-eos token.
  LogProbVector dist = make_dist(size, {{kEosId, 0.9}, {a, 0.06}});
  const TableLm lm(std::move(vocab), dist, dist, marker);
  const GroundedExample example = simple_example("m", "d0", "");

  DecodeConfig config;
  config.top_p = 0.5;
  config.max_len = 8;

  SUBCASE("min_len 2 forces two tokens") {
    config.min_len = 2;
    const Hypothesis result = decode(lm, example, config);
    CHECK(result.finished);
    CHECK(result.tokens.size() == 2);
    CHECK(result.tokens[0] == a);
  }
  SUBCASE("min_len 0 allows an immediate eos") {
    config.min_len = 0;
    const Hypothesis result = decode(lm, example, config);
    CHECK(result.finished);
    CHECK(result.tokens.empty());
  }
}

TEST_CASE("max_len bounds unfinished decodes") {
  Vocabulary vocab = fixture_vocab({"d0", "a"});
  const TokenId a = *vocab.find("a");
  const TokenId marker = *vocab.find("document");
  LogProbVector dist = make_dist(vocab.size(), {{a, 0.999}});
  const TableLm lm(std::move(vocab), dist, dist, marker);
  const GroundedExample example = simple_example("m", "d0", "");

  DecodeConfig config;
  config.top_p = 1.0;
  config.max_len = 4;
  const Hypothesis result = decode(lm, example, config);
  CHECK_FALSE(result.finished);
  CHECK(result.tokens.size() == 4);
}

TEST_CASE("the document-favored token wins on an up-closed alpha interval") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    const auto draw_logprob = [&rng] {
      return -4.0 + static_cast<double>(rng() % 4000) / 1000.0;  // [-4, 0)
    };
    const double w0 = draw_logprob(), q0 = draw_logprob();
    const double w1 = draw_logprob(), q1 = draw_logprob();
    if (std::abs((w0 - q0) - (w1 - q1)) < 1e-9) continue;  // no favored token
    const int favored = (w0 - q0) > (w1 - q1) ? 0 : 1;

    bool seen_win = false;
    for (int i = 0; i <= 100; ++i) {
      const double alpha = static_cast<double>(i) / 100.0;
      const double s0 = (1.0 - alpha) * w0 + alpha * (w0 - q0);
      const double s1 = (1.0 - alpha) * w1 + alpha * (w1 - q1);
      const bool favored_wins = favored == 0 ? s0 > s1 : s1 > s0;
      if (seen_win) {
        CHECK(favored_wins);  // once it wins, it keeps winning as alpha grows
      }
      seen_win = seen_win || favored_wins;
    }
    CHECK(seen_win);  // at alpha = 1 the higher-cpmi token always wins
  }
}

TEST_CASE("decoding is deterministic") {
  std::mt19937_64 rng(61);
  const NGramLm lm = random_cached_trigram(rng);
  const GroundedExample example = random_example(rng, "det");
  DecodeConfig config;
  config.strategy = Strategy::kBeam;
  config.beam_width = 4;
  config.objective = Objective::kPmi;
  config.alpha = 0.25;
  config.top_p = 0.6;
  config.max_len = 8;

  const Hypothesis a = decode(lm, example, config);
  const Hypothesis b = decode(lm, example, config);
  CHECK(a.tokens == b.tokens);
  CHECK(a.combined_score == b.combined_score);
  CHECK(a.loglik == b.loglik);
}

TEST_CASE("invalid configurations are rejected") {
  DecodeConfig config;
  config.alpha = 1.5;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = DecodeConfig{};
  config.top_p = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = DecodeConfig{};
  config.beam_width = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  CHECK_THROWS_AS(top_p_mask(LogProbVector{-0.5, -1.0}, 1.5), std::invalid_argument);
}

}  // TEST_SUITE
