#include "pmif/prompt.hpp"

namespace pmif {

namespace {

std::string format_turn(const PromptTemplate& tmpl, const Turn& turn) {
  std::string out = tmpl.turn_format;
  const auto replace_all = [&out](std::string_view slot, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = out.find(slot, pos)) != std::string::npos) {
      out.replace(pos, slot.size(), value);
      pos += value.size();
    }
  };
  replace_all("{speaker}", speaker_name(turn.speaker));
  replace_all("{text}", turn.text);
  return out;
}

}  // namespace

std::string render_prompt(const GroundedExample& example, const PromptTemplate& tmpl,
                          bool include_document) {
  std::vector<std::string> parts;
  parts.reserve(example.history.size() + 2);
  if (include_document) {
    parts.push_back(tmpl.document_prefix + example.document);
  }
  for (const Turn& turn : example.history) {
    parts.push_back(format_turn(tmpl, turn));
  }
  parts.push_back(tmpl.response_cue);

  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += tmpl.separator;
    out += parts[i];
  }
  return out;
}

std::vector<TokenId> build_prompt(const LanguageModel& lm, const GroundedExample& example,
                                  const PromptTemplate& tmpl, bool include_document) {
  return lm.tokenize_text(render_prompt(example, tmpl, include_document));
}

}  // namespace pmif
