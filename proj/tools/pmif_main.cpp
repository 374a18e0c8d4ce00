// pmif: conditional-PMI faithfulness scoring and decoding for
// document-grounded dialog, with an n-gram oracle backend, a remote logits
// protocol, lexical baselines and a threshold-calibration harness.

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pmif/calibration.hpp"
#include "pmif/dataio.hpp"
#include "pmif/decode.hpp"
#include "pmif/eval.hpp"
#include "pmif/faith.hpp"
#include "pmif/ngram_lm.hpp"
#include "pmif/parallel.hpp"
#include "pmif/remote_lm.hpp"
#include "pmif/stub_server.hpp"
#include "pmif/synthetic.hpp"
#include "pmif/tokenizer.hpp"

namespace {

using namespace pmif;

volatile std::sig_atomic_t g_stop_requested = 0;

void handle_stop_signal(int) {
  g_stop_requested = 1;
}

std::vector<std::string> read_corpus_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open corpus file: " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  return lines;
}

std::vector<double> parse_lambdas(const std::string& spec, int order) {
  if (spec.empty()) {
    return std::vector<double>(static_cast<std::size_t>(order),
                               1.0 / static_cast<double>(order));
  }
  std::vector<double> lambdas;
  std::stringstream in(spec);
  std::string part;
  while (std::getline(in, part, ',')) {
    lambdas.push_back(std::stod(part));
  }
  return lambdas;
}

NormalizationBounds parse_bounds(const std::string& spec) {
  NormalizationBounds bounds;
  if (spec.empty()) return bounds;
  const auto comma = spec.find(',');
  if (comma == std::string::npos) {
    throw std::runtime_error("--bounds expects MIN,MAX");
  }
  bounds.min = std::stod(spec.substr(0, comma));
  bounds.max = std::stod(spec.substr(comma + 1));
  return bounds;
}

struct BackendFlags {
  std::string spec;
  long timeout_ms = 5000;
};

void add_backend_flag(CLI::App* cmd, BackendFlags& flags) {
  cmd->add_option("--backend", flags.spec,
                  "Backend: ngram:<model-file> or remote:<base-url>")
      ->required();
  cmd->add_option("--timeout-ms", flags.timeout_ms, "Remote request timeout");
}

std::unique_ptr<LanguageModel> create_backend(const BackendFlags& flags) {
  const std::string& spec = flags.spec;
  if (spec.rfind("ngram:", 0) == 0) {
    return std::make_unique<NGramLm>(NGramLm::load(spec.substr(6)));
  }
  if (spec.rfind("remote:", 0) == 0) {
    auto client = std::make_unique<RemoteLmClient>(
        spec.substr(7), std::chrono::milliseconds(flags.timeout_ms));
    client->handshake();
    return client;
  }
  throw std::runtime_error("backend must start with ngram: or remote: (got '" + spec +
                           "')");
}

void add_template_flags(CLI::App* cmd, PromptTemplate& tmpl) {
  cmd->add_option("--doc-prefix", tmpl.document_prefix, "Document block prefix");
  cmd->add_option("--turn-format", tmpl.turn_format, "History turn format");
  cmd->add_option("--response-cue", tmpl.response_cue, "Response cue");
  cmd->add_option("--separator", tmpl.separator, "Prompt block separator");
}

std::vector<GroundedExample> load_examples(const std::filesystem::path& path) {
  try {
    return read_examples(path);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void require_responses(const std::vector<GroundedExample>& examples) {
  std::string missing;
  std::size_t count = 0;
  for (const GroundedExample& example : examples) {
    if (!example.response || example.response->empty()) {
      ++count;
      if (count <= 10) {
        if (!missing.empty()) missing += ", ";
        missing += example.id;
      }
    }
  }
  if (count > 0) {
    if (count > 10) missing += ", ...";
    throw std::runtime_error("examples missing responses: " + missing);
  }
}

std::vector<LabeledScore> join_labeled_scores(const std::vector<GroundedExample>& examples,
                                              const std::vector<ScoreRecord>& records,
                                              const std::string& field) {
  std::map<std::string, const ScoreRecord*> by_id;
  for (const ScoreRecord& record : records) {
    by_id[record.id] = &record;
  }
  std::vector<LabeledScore> out;
  out.reserve(examples.size());
  for (const GroundedExample& example : examples) {
    if (!example.label) {
      throw std::runtime_error("example " + example.id + " has no label");
    }
    const auto it = by_id.find(example.id);
    if (it == by_id.end()) {
      throw std::runtime_error("no score record for example " + example.id);
    }
    LabeledScore score;
    score.id = example.id;
    score.score = field == "normalized" ? it->second->normalized : it->second->raw;
    score.positive = binarize_label(*example.label);
    score.dataset_tag = example.dataset_tag;
    out.push_back(std::move(score));
  }
  return out;
}

// ---------------------------------------------------------------------------
// train-lm

struct TrainArgs {
  std::string corpus;
  std::string out;
  int order = 3;
  double add_k = 0.1;
  std::string lambdas;
  std::uint64_t min_count = 1;
  double cache_lambda = 0.0;
  double cache_add_k = 0.01;
};

int run_train(const TrainArgs& args) {
  const std::vector<std::string> corpus = read_corpus_lines(args.corpus);
  NGramOptions options;
  options.order = args.order;
  options.add_k = args.add_k;
  options.lambdas = parse_lambdas(args.lambdas, args.order);
  options.cache_lambda = args.cache_lambda;
  options.cache_add_k = args.cache_add_k;
  options.validate();

  Vocabulary vocab = build_vocab(corpus, args.min_count);
  const NGramLm lm = NGramLm::train(corpus, std::move(vocab), std::move(options));
  lm.save(args.out);
  std::cerr << "wrote " << args.out << " (vocab " << lm.vocab_size() << ", order "
            << lm.options().order << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string data;
  BackendFlags backend;
  std::string bounds;
  PromptTemplate tmpl;
  int workers = 1;
  bool per_token = false;
};

int run_score(const ScoreArgs& args) {
  const std::vector<GroundedExample> examples = load_examples(args.data);
  require_responses(examples);
  const NormalizationBounds bounds = parse_bounds(args.bounds);
  const std::unique_ptr<LanguageModel> lm = create_backend(args.backend);

  std::vector<ScoreRecord> records(examples.size());
  parallel_for(examples.size(), args.workers, [&](std::size_t i) {
    const FaithScore score = pmi_faith(*lm, examples[i], args.tmpl, bounds);
    ScoreRecord record;
    record.id = examples[i].id;
    if (args.per_token) {
      record.raw = per_token_raw(score);
      record.normalized = normalize_score(record.raw, bounds);
    } else {
      record.raw = score.raw;
      record.normalized = score.normalized;
    }
    record.logprob_with_doc = score.logprob_with_doc;
    record.logprob_without_doc = score.logprob_without_doc;
    records[i] = std::move(record);
  });

  std::sort(records.begin(), records.end(),
            [](const ScoreRecord& a, const ScoreRecord& b) { return a.id < b.id; });
  for (const ScoreRecord& record : records) {
    std::cout << score_record_json_line(record) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// decode

struct DecodeArgs {
  std::string data;
  BackendFlags backend;
  std::string objective = "likelihood";
  std::string strategy = "greedy";
  DecodeConfig config;
  PromptTemplate tmpl;
  int workers = 1;
};

int run_decode(const DecodeArgs& args) {
  const std::vector<GroundedExample> examples = load_examples(args.data);
  const std::unique_ptr<LanguageModel> lm = create_backend(args.backend);

  DecodeConfig config = args.config;
  config.objective = args.objective == "pmi" ? Objective::kPmi : Objective::kLikelihood;
  config.strategy = args.strategy == "beam" ? Strategy::kBeam : Strategy::kGreedy;
  config.validate();

  std::vector<DecodeRecord> records(examples.size());
  parallel_for(examples.size(), args.workers, [&](std::size_t i) {
    const Hypothesis hyp = decode(*lm, examples[i], config, args.tmpl);
    DecodeRecord record;
    record.id = examples[i].id;
    record.response = lm->detokenize_tokens(hyp.tokens);
    record.combined_score = hyp.combined_score;
    record.loglik = hyp.loglik;
    record.num_tokens = hyp.tokens.size();
    record.config = config;
    records[i] = std::move(record);
  });

  std::sort(records.begin(), records.end(),
            [](const DecodeRecord& a, const DecodeRecord& b) { return a.id < b.id; });
  for (const DecodeRecord& record : records) {
    std::cout << decode_record_json_line(record) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
  std::string dev;
  std::string scores;
  std::string field = "raw";
  bool per_dataset = false;
};

int run_calibrate(const CalibrateArgs& args) {
  const std::vector<GroundedExample> examples = load_examples(args.dev);
  const std::vector<ScoreRecord> records = read_score_records(args.scores);
  const std::vector<LabeledScore> scores =
      join_labeled_scores(examples, records, args.field);

  const double threshold = calibrate_threshold(scores);
  const double dev_f1 = f1_at_threshold(scores, threshold);
  double score_min = scores.front().score;
  double score_max = scores.front().score;
  for (const LabeledScore& s : scores) {
    score_min = std::min(score_min, s.score);
    score_max = std::max(score_max, s.score);
  }
  // score_min/score_max double as recomputed normalization bounds for this split.
  std::cout << "{\"threshold\": " << format_double6(threshold)
            << ", \"dev_f1\": " << format_double6(dev_f1)
            << ", \"score_min\": " << format_double6(score_min)
            << ", \"score_max\": " << format_double6(score_max) << "}\n";

  if (args.per_dataset) {
    for (const auto& [tag, tag_threshold] : calibrate_per_dataset(scores)) {
      std::vector<LabeledScore> subset;
      for (const LabeledScore& s : scores) {
        if (s.dataset_tag == tag) subset.push_back(s);
      }
      std::cout << "{\"dataset\": " << json_quote(tag)
                << ", \"threshold\": " << format_double6(tag_threshold)
                << ", \"dev_f1\": " << format_double6(f1_at_threshold(subset, tag_threshold))
                << "}\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string test;
  std::string scores;
  std::optional<double> threshold;
  std::string field = "raw";
  std::string generated;
  BackendFlags backend;
  std::string bounds;
  PromptTemplate tmpl;
  int workers = 1;
  bool allow_empty = false;
};

std::string split_metrics_json(const SplitMetrics& m) {
  std::string out = "\"precision\": " + format_double6(m.precision);
  out += ", \"recall\": " + format_double6(m.recall);
  out += ", \"f1\": " + format_double6(m.f1);
  out += ", \"accuracy\": " + format_double6(m.accuracy);
  out += ", \"tp\": " + std::to_string(m.counts.tp);
  out += ", \"fp\": " + std::to_string(m.counts.fp);
  out += ", \"tn\": " + std::to_string(m.counts.tn);
  out += ", \"fn\": " + std::to_string(m.counts.fn);
  return out;
}

void print_report(const ClassificationReport& report) {
  const auto print_row = [](const std::string& name, const SplitMetrics& m) {
    std::printf("%-12s %9s %9s %9s %9s %6llu %6llu %6llu %6llu\n", name.c_str(),
                format_double6(m.precision).c_str(), format_double6(m.recall).c_str(),
                format_double6(m.f1).c_str(), format_double6(m.accuracy).c_str(),
                static_cast<unsigned long long>(m.counts.tp),
                static_cast<unsigned long long>(m.counts.fp),
                static_cast<unsigned long long>(m.counts.tn),
                static_cast<unsigned long long>(m.counts.fn));
  };
  std::printf("threshold %s\n", format_double6(report.threshold).c_str());
  std::printf("%-12s %9s %9s %9s %9s %6s %6s %6s %6s\n", "split", "P", "R", "F1", "Acc",
              "tp", "fp", "tn", "fn");
  print_row("all", report.overall);
  for (const auto& [tag, metrics] : report.per_dataset) {
    print_row(tag, metrics);
  }

  std::string machine = "{\"threshold\": " + format_double6(report.threshold);
  machine += ", " + split_metrics_json(report.overall);
  machine += ", \"per_dataset\": {";
  bool first = true;
  for (const auto& [tag, metrics] : report.per_dataset) {
    if (!first) machine += ", ";
    first = false;
    machine += json_quote(tag) + ": {" + split_metrics_json(metrics) + "}";
  }
  machine += "}}";
  std::printf("%s\n", machine.c_str());
}

int run_evaluate(const EvaluateArgs& args) {
  const bool classification_mode = !args.scores.empty();
  const bool decode_eval_mode = !args.generated.empty();
  if (classification_mode == decode_eval_mode) {
    throw std::runtime_error(
        "evaluate needs either --scores with --threshold, or --generated with --backend");
  }

  const std::vector<GroundedExample> examples = load_examples(args.test);

  if (classification_mode) {
    if (!args.threshold) {
      throw std::runtime_error("--threshold is required with --scores");
    }
    const std::vector<ScoreRecord> records = read_score_records(args.scores);
    const std::vector<LabeledScore> scores =
        join_labeled_scores(examples, records, args.field);
    print_report(classification_report(scores, *args.threshold));
    return 0;
  }

  const std::vector<DecodeRecord> generated = read_decode_records(args.generated);
  std::map<std::string, std::string> by_id;
  for (const DecodeRecord& record : generated) {
    by_id[record.id] = record.response;
  }
  const std::unique_ptr<LanguageModel> lm = create_backend(args.backend);
  const DecodeEvalTable table =
      evaluate_decodes(examples, by_id, *lm, parse_bounds(args.bounds), args.tmpl,
                       args.workers, args.allow_empty);

  const auto row_json = [](const DecodeEvalRow& row) {
    std::string out = "{\"id\": " + json_quote(row.id);
    out += ", \"pmi_faith\": " + format_double6(row.pmi_faith_normalized);
    out += ", \"unigram_f1\": " + format_double6(row.unigram_f1);
    out += ", \"bleu4\": " + format_double6(row.bleu4);
    out += ", \"rouge_l\": " + format_double6(row.rouge_l);
    out += "}";
    return out;
  };
  for (const DecodeEvalRow& row : table.rows) {
    std::cout << row_json(row) << '\n';
  }
  std::cout << row_json(table.mean) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// serve-stub

struct ServeArgs {
  std::string model;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string name = "ngram-stub";
};

int run_serve(const ServeArgs& args) {
  auto model = std::make_shared<const NGramLm>(NGramLm::load(args.model));
  StubServer server(model, args.name);
  const int port = server.start(args.port, args.host);
  std::cerr << "serving " << args.model << " on " << args.host << ":" << port << "\n";

  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  while (!g_stop_requested) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  server.stop();
  std::cerr << "stopped\n";
  return 0;
}

// ---------------------------------------------------------------------------
// make-synthetic

struct SyntheticArgs {
  std::uint64_t seed = 42;
  std::string out_dir;
  int n_docs = 50;
  int sentences_per_doc = 5;
};

int run_make_synthetic(const SyntheticArgs& args) {
  const SyntheticSplits splits =
      make_synthetic_corpus(args.seed, args.n_docs, args.sentences_per_doc);

  const std::filesystem::path dir(args.out_dir);
  std::string train;
  for (const std::string& line : splits.training_lines) {
    train += line;
    train += '\n';
  }
  write_file_atomic(dir / "train.txt", train);

  const auto write_examples_file = [&dir](const char* name,
                                          const std::vector<GroundedExample>& examples) {
    std::string body;
    for (const GroundedExample& example : examples) {
      body += example_json_line(example);
      body += '\n';
    }
    write_file_atomic(dir / name, body);
  };
  write_examples_file("dev.jsonl", splits.dev);
  write_examples_file("test.jsonl", splits.test);

  std::cerr << "wrote " << splits.training_lines.size() << " training lines, "
            << splits.dev.size() << " dev examples, " << splits.test.size()
            << " test examples to " << args.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional-PMI faithfulness scoring and decoding toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train-lm", "Train an n-gram model");
  train->add_option("--corpus", train_args.corpus, "Training corpus, one document per line")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--order", train_args.order, "Model order n");
  train->add_option("--add-k", train_args.add_k, "Add-k smoothing constant");
  train->add_option("--lambdas", train_args.lambdas,
                    "Comma-separated interpolation weights (default uniform)");
  train->add_option("--min-count", train_args.min_count, "Vocabulary count cutoff");
  train->add_option("--cache-lambda", train_args.cache_lambda,
                    "In-context cache mixture weight");
  train->add_option("--cache-add-k", train_args.cache_add_k, "Cache smoothing constant");
  train->add_option("--out", train_args.out, "Output model file")->required();

  ScoreArgs score_args;
  CLI::App* score = app.add_subcommand("score", "Score faithfulness of responses");
  score->add_option("--data", score_args.data, "Examples JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  add_backend_flag(score, score_args.backend);
  score->add_option("--bounds", score_args.bounds, "Normalization bounds MIN,MAX");
  score->add_option("--workers", score_args.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  score->add_flag("--per-token", score_args.per_token,
                  "Report per-token mean instead of the sequence sum");
  add_template_flags(score, score_args.tmpl);

  DecodeArgs decode_args;
  CLI::App* decode_cmd = app.add_subcommand("decode", "Generate responses");
  decode_cmd->add_option("--data", decode_args.data, "Examples JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  add_backend_flag(decode_cmd, decode_args.backend);
  decode_cmd->add_option("--objective", decode_args.objective, "likelihood or pmi")
      ->check(CLI::IsMember({"likelihood", "pmi"}));
  decode_cmd->add_option("--strategy", decode_args.strategy, "greedy or beam")
      ->check(CLI::IsMember({"greedy", "beam"}));
  decode_cmd->add_option("--alpha", decode_args.config.alpha, "CPMI weight");
  decode_cmd->add_option("--top-p", decode_args.config.top_p, "Mask size (1.0 disables)");
  decode_cmd->add_option("--beam-width", decode_args.config.beam_width, "Beam width");
  decode_cmd->add_option("--max-len", decode_args.config.max_len, "Maximum response tokens");
  decode_cmd->add_option("--min-len", decode_args.config.min_len, "Minimum response tokens");
  decode_cmd->add_option("--workers", decode_args.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  add_template_flags(decode_cmd, decode_args.tmpl);

  CalibrateArgs calibrate_args;
  CLI::App* calibrate = app.add_subcommand("calibrate", "Pick a threshold by dev F1");
  calibrate->add_option("--dev", calibrate_args.dev, "Labeled dev examples JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--scores", calibrate_args.scores, "Score records JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--field", calibrate_args.field, "Score field: raw or normalized")
      ->check(CLI::IsMember({"raw", "normalized"}));
  calibrate->add_flag("--per-dataset", calibrate_args.per_dataset,
                      "Also calibrate per dataset tag");

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Classification report from scores, or metric table from decodes");
  evaluate->add_option("--test", evaluate_args.test, "Test examples JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--scores", evaluate_args.scores, "Score records JSONL")
      ->check(CLI::ExistingFile);
  double threshold_value = 0.0;
  CLI::Option* threshold_opt =
      evaluate->add_option("--threshold", threshold_value, "Classification threshold");
  evaluate->add_option("--field", evaluate_args.field, "Score field: raw or normalized")
      ->check(CLI::IsMember({"raw", "normalized"}));
  evaluate->add_option("--generated", evaluate_args.generated, "Decode records JSONL")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--backend", evaluate_args.backend.spec,
                       "Backend for faithfulness scoring");
  evaluate->add_option("--timeout-ms", evaluate_args.backend.timeout_ms,
                       "Remote request timeout");
  evaluate->add_option("--bounds", evaluate_args.bounds, "Normalization bounds MIN,MAX");
  evaluate->add_option("--workers", evaluate_args.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  evaluate->add_flag("--allow-empty", evaluate_args.allow_empty,
                     "Emit an empty table instead of failing on no examples");
  add_template_flags(evaluate, evaluate_args.tmpl);

  ServeArgs serve_args;
  CLI::App* serve = app.add_subcommand("serve-stub", "Serve a model over the wire protocol");
  serve->add_option("--model", serve_args.model, "Model file")
      ->required()
      ->check(CLI::ExistingFile);
  serve->add_option("--port", serve_args.port, "Port (0 picks one)");
  serve->add_option("--host", serve_args.host, "Bind host");
  serve->add_option("--name", serve_args.name, "Reported model name");

  SyntheticArgs synthetic_args;
  CLI::App* synthetic = app.add_subcommand("make-synthetic", "Write synthetic splits");
  synthetic->add_option("--seed", synthetic_args.seed, "RNG seed");
  synthetic->add_option("--out-dir", synthetic_args.out_dir, "Output directory")->required();
  synthetic->add_option("--n-docs", synthetic_args.n_docs, "Number of documents");
  synthetic->add_option("--sentences-per-doc", synthetic_args.sentences_per_doc,
                        "Sentences per document");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return run_train(train_args);
    if (score->parsed()) return run_score(score_args);
    if (decode_cmd->parsed()) return run_decode(decode_args);
    if (calibrate->parsed()) return run_calibrate(calibrate_args);
    if (evaluate->parsed()) {
      if (threshold_opt->count() > 0) evaluate_args.threshold = threshold_value;
      return run_evaluate(evaluate_args);
    }
    if (serve->parsed()) return run_serve(serve_args);
    if (synthetic->parsed()) return run_make_synthetic(synthetic_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
