#include "maestro/templates.hpp"

#include "maestro_bundled_data.hpp"

#include <fmt/args.h>
#include <fmt/format.h>

namespace maestro {

const Templates &Templates::defaults() {
  static const Templates t = from_json(json::parse(kBundledTemplates));
  return t;
}

Templates Templates::from_json(const json &doc) {
  if (!doc.is_object() || !doc.contains("messages")) {
    throw Error("parse_error", "template document needs a 'messages' section");
  }
  Templates t;
  t.doc_ = doc;
  return t;
}

std::string Templates::render(std::string_view section, std::string_view key, const Args &args) const {
  const auto sec = doc_.find(std::string(section));
  if (sec == doc_.end()) return std::string(key);
  const auto it = sec->find(std::string(key));
  if (it == sec->end() || !it->is_string()) return std::string(key);
  fmt::dynamic_format_arg_store<fmt::format_context> store;
  for (const auto &[name, value] : args) store.push_back(fmt::arg(name.c_str(), value));
  try {
    return fmt::vformat(it->get<std::string>(), store);
  } catch (const fmt::format_error &) {
    return it->get<std::string>();
  }
}

std::string Templates::noun(const std::string &stage_id, bool plural) const {
  const auto nouns = doc_.find("nouns");
  if (nouns != doc_.end() && nouns->contains(stage_id)) {
    return (*nouns)[stage_id].value(plural ? "many" : "one", stage_id);
  }
  return plural ? stage_id + "s" : stage_id;
}

std::string Templates::elicitation(const std::string &stage_id) const {
  const auto e = doc_.find("elicitation");
  if (e == doc_.end()) return {};
  if (e->contains(stage_id)) return (*e)[stage_id].get<std::string>();
  return e->value("default", "");
}

} // namespace maestro
