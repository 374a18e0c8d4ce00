#include <doctest.h>

#include <cmath>
#include <random>

#include "pmif/text_metrics.hpp"

using namespace pmif;

namespace {

std::string relabel(const std::string& text) {
  // Consistent token renaming: each word w -> w + "x".
  std::string out;
  for (char c : text) {
    if (c == ' ') {
      out += "x ";
    } else {
      out += c;
    }
  }
  if (!out.empty()) out += 'x';
  return out;
}

std::string random_sentence(std::mt19937_64& rng, int max_len) {
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f"};
  std::string text;
  const int len = 1 + static_cast<int>(rng() % max_len);
  for (int i = 0; i < len; ++i) {
    if (i > 0) text += ' ';
    text += pool[rng() % pool.size()];
  }
  return text;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("unigram_f1 hand fixture") {
  // overlap {the, cat} = 2; P = 2/3, R = 2/4.
  CHECK(unigram_f1("the cat sat", "the cat ran fast") ==
        doctest::Approx(4.0 / 7.0).epsilon(1e-9));
  CHECK(unigram_f1("the cat sat", "the cat ran fast") ==
        doctest::Approx(0.5714).epsilon(1e-4));
}

TEST_CASE("unigram_f1 identity and disjoint cases") {
  CHECK(unigram_f1("a b c", "a b c") == 1.0);
  CHECK(unigram_f1("a b", "c d") == 0.0);
  CHECK(unigram_f1("", "a") == 0.0);
  CHECK(unigram_f1("a", "") == 0.0);
}

TEST_CASE("unigram_f1 strips punctuation entirely") {
  CHECK(unigram_f1("cat.", "cat !") == 1.0);
  CHECK(unigram_f1("...", "cat") == 0.0);  // candidate empties out
  CHECK(unigram_f1("The Cat.", "the cat") == 1.0);
}

TEST_CASE("unigram_f1 clips repeated words") {
  // candidate has "a" twice but the reference only once.
  const double p = 2.0 / 3.0;  // overlap 2 = min(2,1) for a + 1 for b
  const double r = 2.0 / 2.0;
  CHECK(unigram_f1("a a b", "a b") == doctest::Approx(2 * p * r / (p + r)));
}

TEST_CASE("bleu4 identity is exactly 100") {
  CHECK(bleu4("a b c d", "a b c d") == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bleu4("a", "a") == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("bleu4 short-candidate fixture") {
  // p1 = p2 = 1, orders 3-4 excluded, BP = exp(1 - 3/2).
  CHECK(bleu4("a b", "a b c") == doctest::Approx(100.0 * std::exp(-0.5)).epsilon(1e-9));
  CHECK(bleu4("a b", "a b c") == doctest::Approx(60.65).epsilon(1e-3));
}

TEST_CASE("bleu4 zero-match smoothing") {
  // Disjoint 4-token texts: every order matches 0, p_n = 0.1 / t_n, BP = 1.
  const double expected =
      100.0 * std::exp((std::log(0.1 / 4) + std::log(0.1 / 3) + std::log(0.1 / 2) +
                        std::log(0.1 / 1)) /
                       4.0);
  CHECK(bleu4("a b c d", "e f g h") == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("bleu4 empty candidate is zero") {
  CHECK(bleu4("", "a b") == 0.0);
  CHECK(bleu4(" \t ", "a b") == 0.0);
  // Punctuation is retained for BLEU, so a punctuation-only candidate still scores.
  CHECK(bleu4("...", "a b") > 0.0);
}

TEST_CASE("bleu4 stays within range") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const double value = bleu4(random_sentence(rng, 8), random_sentence(rng, 8));
    CHECK(value >= 0.0);
    CHECK(value <= 100.0 + 1e-9);
  }
}

TEST_CASE("rouge_l hand fixture") {
  // LCS("a b c", "a c") = 2; P = 2/3, R = 1.
  CHECK(rouge_l("a b c", "a c") == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("rouge_l identity and disjoint cases") {
  CHECK(rouge_l("a b c", "a b c") == 1.0);
  CHECK(rouge_l("a b", "c d") == 0.0);
  CHECK(rouge_l("", "a") == 0.0);
}

TEST_CASE("lcs respects length bounds") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const std::string x = random_sentence(rng, 10);
    const std::string y = random_sentence(rng, 10);
    const double value = rouge_l(x, y);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
    CHECK(rouge_l(x, x) == 1.0);
  }
}

TEST_CASE("swapping candidate and reference leaves unigram and rouge F1 unchanged") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const std::string x = random_sentence(rng, 8);
    const std::string y = random_sentence(rng, 8);
    CHECK(unigram_f1(x, y) == doctest::Approx(unigram_f1(y, x)).epsilon(1e-12));
    CHECK(rouge_l(x, y) == doctest::Approx(rouge_l(y, x)).epsilon(1e-12));
  }
}

TEST_CASE("metrics depend only on the token identity pattern") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    const std::string x = random_sentence(rng, 8);
    const std::string y = random_sentence(rng, 8);
    CHECK(unigram_f1(x, y) == doctest::Approx(unigram_f1(relabel(x), relabel(y))));
    CHECK(bleu4(x, y) == doctest::Approx(bleu4(relabel(x), relabel(y))));
    CHECK(rouge_l(x, y) == doctest::Approx(rouge_l(relabel(x), relabel(y))));
  }
}

TEST_CASE("lexical_metrics bundles the three scores") {
  const MetricReport report = lexical_metrics("a b", "a b c", "a b");
  CHECK(report.unigram_f1 == doctest::Approx(unigram_f1("a b", "a b c")));
  CHECK(report.bleu4 == doctest::Approx(100.0));
  CHECK(report.rouge_l == doctest::Approx(1.0));
}

}  // TEST_SUITE
