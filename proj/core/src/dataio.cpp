#include "pmif/dataio.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace pmif {

namespace {

using nlohmann::json;

std::string line_error(std::size_t line_number, const std::string& what) {
  return "line " + std::to_string(line_number) + ": " + what;
}

json parse_json_line(const std::string& line, std::size_t line_number) {
  json value = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded() || !value.is_object()) {
    throw std::runtime_error(line_error(line_number, "parse failure"));
  }
  return value;
}

std::string require_string(const json& object, const char* field, std::size_t line_number) {
  const auto it = object.find(field);
  if (it == object.end() || !it->is_string()) {
    throw std::runtime_error(
        line_error(line_number, std::string("missing field '") + field + "'"));
  }
  return it->get<std::string>();
}

GroundedExample parse_example(const json& object, std::size_t line_number) {
  GroundedExample example;
  example.id = require_string(object, "id", line_number);
  example.document = require_string(object, "document", line_number);

  if (const auto it = object.find("history"); it != object.end() && !it->is_null()) {
    if (!it->is_array()) {
      throw std::runtime_error(line_error(line_number, "field 'history' must be an array"));
    }
    for (const json& turn_json : *it) {
      if (!turn_json.is_object()) {
        throw std::runtime_error(line_error(line_number, "history turn must be an object"));
      }
      Turn turn;
      try {
        turn.speaker = parse_speaker(require_string(turn_json, "speaker", line_number));
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error(line_error(line_number, e.what()));
      }
      turn.text = require_string(turn_json, "text", line_number);
      example.history.push_back(std::move(turn));
    }
  }
  if (const auto it = object.find("response"); it != object.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw std::runtime_error(line_error(line_number, "field 'response' must be a string"));
    }
    example.response = it->get<std::string>();
  }
  if (const auto it = object.find("label"); it != object.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw std::runtime_error(line_error(line_number, "field 'label' must be a string"));
    }
    try {
      example.label = parse_label(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(line_error(line_number, e.what()));
    }
  }
  if (const auto it = object.find("dataset_tag"); it != object.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw std::runtime_error(
          line_error(line_number, "field 'dataset_tag' must be a string"));
    }
    example.dataset_tag = it->get<std::string>();
  }
  return example;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
  }
  return lines;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path dir = path.parent_path();
  if (dir.empty()) dir = ".";
  std::filesystem::create_directories(dir);

  std::random_device rd;
  const std::filesystem::path tmp =
      dir / (path.filename().string() + ".tmp." + std::to_string(rd()));

  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open temporary file: " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string());
  }
}

std::string format_double6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string json_quote(std::string_view text) {
  return json(std::string(text)).dump();
}

std::vector<GroundedExample> read_examples(const std::filesystem::path& path) {
  std::vector<GroundedExample> examples;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const json object = parse_json_line(lines[i], i + 1);
    examples.push_back(parse_example(object, i + 1));
  }
  return examples;
}

std::string example_json_line(const GroundedExample& example) {
  std::string out = "{";
  out += "\"id\": " + json_quote(example.id);
  out += ", \"document\": " + json_quote(example.document);
  out += ", \"history\": [";
  for (std::size_t i = 0; i < example.history.size(); ++i) {
    if (i > 0) out += ", ";
    out += "{\"speaker\": " + json_quote(speaker_name(example.history[i].speaker)) +
           ", \"text\": " + json_quote(example.history[i].text) + "}";
  }
  out += "]";
  if (example.response) {
    out += ", \"response\": " + json_quote(*example.response);
  }
  if (example.label) {
    out += ", \"label\": " + json_quote(label_name(*example.label));
  }
  if (example.dataset_tag) {
    out += ", \"dataset_tag\": " + json_quote(*example.dataset_tag);
  }
  out += "}";
  return out;
}

std::string score_record_json_line(const ScoreRecord& record) {
  std::string out = "{";
  out += "\"id\": " + json_quote(record.id);
  out += ", \"raw\": " + format_double6(record.raw);
  out += ", \"normalized\": " + format_double6(record.normalized);
  out += ", \"logprob_with_doc\": " + format_double6(record.logprob_with_doc);
  out += ", \"logprob_without_doc\": " + format_double6(record.logprob_without_doc);
  out += "}";
  return out;
}

std::vector<ScoreRecord> read_score_records(const std::filesystem::path& path) {
  std::vector<ScoreRecord> records;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const json object = parse_json_line(lines[i], i + 1);
    ScoreRecord record;
    record.id = require_string(object, "id", i + 1);
    try {
      record.raw = object.at("raw").get<double>();
      record.normalized = object.value("normalized", 0.0);
      record.logprob_with_doc = object.value("logprob_with_doc", 0.0);
      record.logprob_without_doc = object.value("logprob_without_doc", 0.0);
    } catch (const json::exception&) {
      throw std::runtime_error(line_error(i + 1, "parse failure"));
    }
    records.push_back(std::move(record));
  }
  return records;
}

namespace {

std::string_view strategy_name(Strategy strategy) {
  return strategy == Strategy::kGreedy ? "greedy" : "beam";
}

std::string_view objective_name(Objective objective) {
  return objective == Objective::kLikelihood ? "likelihood" : "pmi";
}

}  // namespace

std::string decode_record_json_line(const DecodeRecord& record) {
  std::string out = "{";
  out += "\"id\": " + json_quote(record.id);
  out += ", \"response\": " + json_quote(record.response);
  out += ", \"combined_score\": " + format_double6(record.combined_score);
  out += ", \"loglik\": " + format_double6(record.loglik);
  out += ", \"num_tokens\": " + std::to_string(record.num_tokens);
  out += ", \"config\": {";
  out += "\"strategy\": " + json_quote(strategy_name(record.config.strategy));
  out += ", \"objective\": " + json_quote(objective_name(record.config.objective));
  out += ", \"alpha\": " + format_double6(record.config.alpha);
  out += ", \"top_p\": " + format_double6(record.config.top_p);
  out += ", \"beam_width\": " + std::to_string(record.config.beam_width);
  out += ", \"max_len\": " + std::to_string(record.config.max_len);
  out += ", \"min_len\": " + std::to_string(record.config.min_len);
  out += "}}";
  return out;
}

std::vector<DecodeRecord> read_decode_records(const std::filesystem::path& path) {
  std::vector<DecodeRecord> records;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const json object = parse_json_line(lines[i], i + 1);
    DecodeRecord record;
    record.id = require_string(object, "id", i + 1);
    record.response = require_string(object, "response", i + 1);
    record.combined_score = object.value("combined_score", 0.0);
    record.loglik = object.value("loglik", 0.0);
    record.num_tokens = object.value("num_tokens", std::size_t{0});
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace pmif
