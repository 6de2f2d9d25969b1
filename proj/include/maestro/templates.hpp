#pragma once

#include "maestro/value.hpp"

#include <map>
#include <string>
#include <string_view>

namespace maestro {

// Wording for banners, elicitation questions and agent messages. The bundled
// data/templates.json is compiled in as the default set.
class Templates {
public:
  using Args = std::map<std::string, std::string>;

  static const Templates &defaults();
  static Templates from_json(const json &doc);

  // Renders "section.key" with {name} placeholders. Unknown keys render as
  // the key itself so missing wording is visible rather than fatal.
  std::string render(std::string_view section, std::string_view key, const Args &args = {}) const;

  std::string noun(const std::string &stage_id, bool plural) const;
  std::string elicitation(const std::string &stage_id) const;

private:
  json doc_;
};

} // namespace maestro
