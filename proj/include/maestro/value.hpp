#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace maestro {

using json = nlohmann::json;

// Error carrying a stable machine-readable code ("parse_error",
// "validation_error", "unknown_stage", ...). The message is for humans.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string &message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string &code() const noexcept { return code_; }

private:
  std::string code_;
};

enum class AttributeKind { categorical, ordinal, numeric, boolean };

std::string_view to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(std::string_view text);

// Typed attribute value. Categorical and ordinal values are strings, numeric
// values are doubles in the attribute's canonical unit.
using Value = std::variant<std::string, double, bool>;

json value_to_json(const Value &value);
Value value_from_json(const json &j);
std::string value_to_string(const Value &value);
// Minutes after midnight as "7:30 PM".
std::string clock_text(double minutes);

inline const std::string *as_string(const Value &v) { return std::get_if<std::string>(&v); }
inline const double *as_number(const Value &v) { return std::get_if<double>(&v); }
inline const bool *as_bool(const Value &v) { return std::get_if<bool>(&v); }

// One selection on the path: which option was chosen at which stage.
struct PathSelection {
  std::string stage_id;
  std::string option_id;

  bool operator==(const PathSelection &) const = default;
  auto operator<=>(const PathSelection &) const = default;
};

using Path = std::vector<PathSelection>;

json path_to_json(const Path &path);
Path path_from_json(const json &j);

// "a/b/c" key over the option ids of a prefix, in stage order.
std::string prefix_key(std::span<const PathSelection> prefix);

// Stable 64-bit FNV-1a, rendered as 16 hex digits.
std::string stable_hash(std::string_view bytes);

} // namespace maestro
