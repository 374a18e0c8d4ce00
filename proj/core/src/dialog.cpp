#include "pmif/dialog.hpp"

#include <stdexcept>

namespace pmif {

std::string_view speaker_name(Speaker speaker) {
  switch (speaker) {
    case Speaker::kUser:
      return "user";
    case Speaker::kAgent:
      return "agent";
  }
  throw std::logic_error("invalid speaker");
}

Speaker parse_speaker(std::string_view name) {
  if (name == "user") return Speaker::kUser;
  if (name == "agent") return Speaker::kAgent;
  throw std::invalid_argument("unknown speaker '" + std::string(name) + "'");
}

std::string_view label_name(Label label) {
  switch (label) {
    case Label::kFullyAttributable:
      return "fully_attributable";
    case Label::kGeneric:
      return "generic";
    case Label::kNotFullyAttributable:
      return "not_fully_attributable";
  }
  throw std::logic_error("invalid label");
}

Label parse_label(std::string_view name) {
  if (name == "fully_attributable") return Label::kFullyAttributable;
  if (name == "generic") return Label::kGeneric;
  if (name == "not_fully_attributable") return Label::kNotFullyAttributable;
  throw std::invalid_argument("unknown label '" + std::string(name) + "'");
}

}  // namespace pmif
