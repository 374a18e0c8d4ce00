#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pmif {

enum class Speaker { kUser, kAgent };

std::string_view speaker_name(Speaker speaker);
Speaker parse_speaker(std::string_view name);

/// Three-way faithfulness annotation; fully_attributable is the positive class.
enum class Label { kFullyAttributable, kGeneric, kNotFullyAttributable };

std::string_view label_name(Label label);
Label parse_label(std::string_view name);

struct Turn {
  Speaker speaker = Speaker::kUser;
  std::string text;
};

/// One (document, history, response) record; the response and label are
/// optional so the same type serves scoring, decoding and evaluation inputs.
struct GroundedExample {
  std::string id;
  std::string document;
  std::vector<Turn> history;
  std::optional<std::string> response;
  std::optional<Label> label;
  std::optional<std::string> dataset_tag;
};

}  // namespace pmif
