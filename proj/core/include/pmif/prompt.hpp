#pragma once

#include <string>
#include <vector>

#include "pmif/dialog.hpp"
#include "pmif/lm.hpp"
#include "pmif/tokenizer.hpp"

namespace pmif {

/// Serialization of (document, history) into model input. The defaults are a
/// declared convention, deterministic and easy to hand-check.
struct PromptTemplate {
  std::string document_prefix = "document: ";
  std::string turn_format = "{speaker}: {text}";
  std::string response_cue = "agent:";
  std::string separator = "\n";
};

/// Renders the optional document block, each history turn and the response
/// cue, joined by the separator.
std::string render_prompt(const GroundedExample& example, const PromptTemplate& tmpl,
                          bool include_document);

/// render_prompt followed by the backend's tokenizer.
std::vector<TokenId> build_prompt(const LanguageModel& lm, const GroundedExample& example,
                                  const PromptTemplate& tmpl, bool include_document);

}  // namespace pmif
