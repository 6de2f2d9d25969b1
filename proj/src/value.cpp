#include "maestro/value.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>

namespace maestro {

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
  case AttributeKind::categorical: return "categorical";
  case AttributeKind::ordinal: return "ordinal";
  case AttributeKind::numeric: return "numeric";
  case AttributeKind::boolean: return "boolean";
  }
  return "categorical";
}

AttributeKind attribute_kind_from_string(std::string_view text) {
  if (text == "categorical") return AttributeKind::categorical;
  if (text == "ordinal") return AttributeKind::ordinal;
  if (text == "numeric") return AttributeKind::numeric;
  if (text == "boolean") return AttributeKind::boolean;
  throw Error("validation_error", "unknown attribute kind '" + std::string(text) + "'");
}

json value_to_json(const Value &value) {
  return std::visit([](const auto &v) { return json(v); }, value);
}

Value value_from_json(const json &j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  throw Error("validation_error", "attribute value must be a string, number or boolean: " + j.dump());
}

std::string value_to_string(const Value &value) {
  if (const auto *s = as_string(value)) return *s;
  if (const auto *b = as_bool(value)) return *b ? "true" : "false";
  const double d = std::get<double>(value);
  if (std::floor(d) == d && std::fabs(d) < 1e15) {
    return std::to_string(static_cast<long long>(d));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", d);
  return buf;
}

json path_to_json(const Path &path) {
  json out = json::array();
  for (const auto &sel : path) {
    out.push_back({{"stageId", sel.stage_id}, {"optionId", sel.option_id}});
  }
  return out;
}

Path path_from_json(const json &j) {
  Path out;
  for (const auto &e : j) {
    out.push_back({e.at("stageId").get<std::string>(), e.at("optionId").get<std::string>()});
  }
  return out;
}

std::string prefix_key(std::span<const PathSelection> prefix) {
  std::string key;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i) key += '/';
    key += prefix[i].option_id;
  }
  return key;
}

std::string stable_hash(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string clock_text(double minutes) {
  const int m = static_cast<int>(std::lround(minutes));
  const int h24 = (m / 60) % 24;
  const int h12 = h24 % 12 == 0 ? 12 : h24 % 12;
  char buf[16];
  std::snprintf(buf, sizeof buf, "%d:%02d %s", h12, m % 60, h24 < 12 ? "AM" : "PM");
  return buf;
}

} // namespace maestro
