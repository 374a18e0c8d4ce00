#include "pmif/synthetic.hpp"

#include <array>
#include <random>
#include <stdexcept>

namespace pmif {

namespace {

// Small on purpose: documents end up sharing most words, so lexical overlap
// separates the labels poorly while sequence structure still identifies the
// source document.
constexpr std::array<const char*, 24> kWordInventory = {
    "river",  "stone",  "cloud",  "forest", "meadow",  "harbor",
    "winter", "summer", "lantern", "copper", "silver", "marble",
    "garden", "bridge", "falcon", "willow", "thunder", "ember",
    "valley", "canyon", "orchard", "saddle", "barrel", "candle",
};

// Generic filler replies, deliberately disjoint from the content inventory.
// They give the trained model a high-likelihood document-independent habit,
// the same failure mode PMI-guided decoding is meant to counter.
constexpr std::array<const char*, 2> kGenericReplies = {
    "okay sure thanks .",
    "okay well noted .",
};

/// Bounded draws go through an explicit reduction of the raw engine output so
/// the byte stream does not depend on the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  std::size_t between(std::size_t lo, std::size_t hi) {  // inclusive
    return lo + below(hi - lo + 1);
  }

 private:
  std::mt19937_64 engine_;
};

std::string make_sentence(Rng& rng) {
  const std::size_t length = rng.between(5, 9);
  std::string sentence;
  for (std::size_t i = 0; i < length; ++i) {
    if (i > 0) sentence += ' ';
    sentence += kWordInventory[rng.below(kWordInventory.size())];
  }
  sentence += " .";
  return sentence;
}

std::string join_sentences(const std::vector<std::string>& sentences) {
  std::string document;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) document += ' ';
    document += sentences[i];
  }
  return document;
}

std::vector<GroundedExample> make_split_examples(
    Rng& rng, const std::vector<std::vector<std::string>>& docs,
    const std::vector<std::size_t>& doc_indices, const std::string& id_prefix) {
  std::vector<GroundedExample> examples;
  std::size_t counter = 0;
  for (std::size_t doc_pos = 0; doc_pos < doc_indices.size(); ++doc_pos) {
    const std::size_t doc_index = doc_indices[doc_pos];
    const std::vector<std::string>& sentences = docs[doc_index];
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      const bool positive = counter % 2 == 0;
      GroundedExample example;
      example.id = id_prefix + "-" + std::to_string(counter);
      example.document = join_sentences(sentences);
      example.dataset_tag = doc_index % 2 == 0 ? "synth-a" : "synth-b";
      if (positive) {
        example.response = sentences[s];
        example.label = Label::kFullyAttributable;
      } else {
        std::size_t other_index;
        if (doc_indices.size() >= 2) {
          std::size_t other_pos = rng.below(doc_indices.size() - 1);
          if (other_pos >= doc_pos) ++other_pos;
          other_index = doc_indices[other_pos];
        } else {
          other_index = rng.below(docs.size() - 1);
          if (other_index >= doc_index) ++other_index;
        }
        const std::vector<std::string>& other = docs[other_index];
        example.response = other[rng.below(other.size())];
        example.label = Label::kNotFullyAttributable;
      }
      examples.push_back(std::move(example));
      ++counter;
    }
  }
  return examples;
}

}  // namespace

SyntheticSplits make_synthetic_corpus(std::uint64_t seed, int n_docs,
                                      int sentences_per_doc) {
  if (n_docs < 2) {
    throw std::invalid_argument("n_docs must be >= 2");
  }
  if (sentences_per_doc < 1) {
    throw std::invalid_argument("sentences_per_doc must be >= 1");
  }

  Rng rng(seed);
  std::vector<std::vector<std::string>> docs(static_cast<std::size_t>(n_docs));
  for (auto& sentences : docs) {
    sentences.reserve(static_cast<std::size_t>(sentences_per_doc));
    for (int s = 0; s < sentences_per_doc; ++s) {
      sentences.push_back(make_sentence(rng));
    }
  }

  // Disjoint document pools: ~40% train, ~30% dev, rest test, at least one each.
  const std::size_t total = docs.size();
  std::size_t n_train = std::max<std::size_t>(1, total * 2 / 5);
  std::size_t n_dev = std::max<std::size_t>(1, total * 3 / 10);
  if (n_train + n_dev >= total) {
    n_train = std::max<std::size_t>(1, total - 2);
    n_dev = 1;
  }
  std::vector<std::size_t> train_docs, dev_docs, test_docs;
  for (std::size_t i = 0; i < total; ++i) {
    if (i < n_train) {
      train_docs.push_back(i);
    } else if (i < n_train + n_dev) {
      dev_docs.push_back(i);
    } else {
      test_docs.push_back(i);
    }
  }

  SyntheticSplits splits;
  std::size_t generic_cursor = 0;
  for (std::size_t doc_index : train_docs) {
    const std::string document = join_sentences(docs[doc_index]);
    splits.training_lines.push_back(document);
    for (const std::string& sentence : docs[doc_index]) {
      splits.training_lines.push_back("document : " + document + " agent : " + sentence);
    }
    for (std::size_t g = 0; g < kGenericReplies.size(); ++g) {
      splits.training_lines.push_back(
          "document : " + document + " agent : " +
          kGenericReplies[generic_cursor++ % kGenericReplies.size()]);
    }
  }
  splits.dev = make_split_examples(rng, docs, dev_docs, "dev");
  splits.test = make_split_examples(rng, docs, test_docs, "test");
  return splits;
}

}  // namespace pmif
