#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pmif/decode.hpp"
#include "pmif/dialog.hpp"

namespace pmif {

/// Writes via a temporary file in the same directory plus rename, so an
/// interrupted run never leaves a truncated file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Fixed 6-decimal rendering used for all numeric record output.
std::string format_double6(double value);

/// JSON string literal (quotes included).
std::string json_quote(std::string_view text);

/// Parses one JSONL example file. Errors carry 1-based line numbers, e.g.
/// "line 7: parse failure".
std::vector<GroundedExample> read_examples(const std::filesystem::path& path);

std::string example_json_line(const GroundedExample& example);

struct ScoreRecord {
  std::string id;
  double raw = 0.0;
  double normalized = 0.0;
  double logprob_with_doc = 0.0;
  double logprob_without_doc = 0.0;
};

std::string score_record_json_line(const ScoreRecord& record);
std::vector<ScoreRecord> read_score_records(const std::filesystem::path& path);

struct DecodeRecord {
  std::string id;
  std::string response;
  double combined_score = 0.0;
  double loglik = 0.0;
  std::size_t num_tokens = 0;
  DecodeConfig config;
};

std::string decode_record_json_line(const DecodeRecord& record);
std::vector<DecodeRecord> read_decode_records(const std::filesystem::path& path);

}  // namespace pmif
