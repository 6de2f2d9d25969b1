#pragma once

#include "maestro/catalog.hpp"
#include "maestro/value.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace maestro::prefs {

enum class Comparator { eq, neq, le, ge, between, in_set, predicate };

std::string_view to_string(Comparator c);
Comparator comparator_from_string(std::string_view text);

// Machine-evaluable form of a preference over one attribute.
//   eq/neq/le/ge : values = {v}
//   between      : values = {lo, hi} (inclusive)
//   in_set       : values = the set
//   predicate    : predicate name + args, attribute fixed by the predicate
struct Constraint {
  std::string attribute;
  Comparator comparator = Comparator::eq;
  std::vector<Value> values;
  std::string predicate;
  std::vector<Value> args;

  bool operator==(const Constraint &) const = default;
};

enum class Direction { minimize, maximize };

struct Objective {
  std::string attribute;
  std::optional<Direction> direction;
  std::vector<Value> prefer_set;

  bool is_directional() const { return direction.has_value(); }
  bool operator==(const Objective &) const = default;
};

using Compiled = std::variant<Constraint, Objective>;

const std::string &compiled_attribute(const Compiled &compiled);

// Registered named predicates: adjacentSeats(n), countIs(n), tierIs(t),
// startsAfter(t), endsBy(t). Returns the attribute the predicate reads, or
// nullopt for an unregistered name.
std::optional<std::string> predicate_attribute(std::string_view name);

// Orders two values of one attribute; ordinal values compare by rank.
// nullopt when the values are not comparable.
std::optional<int> compare_values(const Value &a, const Value &b, const catalog::AttributeSpec *spec);

// Evaluates against an option. An option lacking the attribute is outside the
// constraint's reach and passes.
bool satisfies(const Constraint &c, const catalog::OptionItem &option,
               const catalog::AttributeSpec *spec);

// True when `c` is applicable to `stage` (the stage declares the attribute).
bool applies_to(const Constraint &c, const catalog::StageDef &stage);

// Throws Error("invalid_record") when comparator/value kinds do not match the
// attribute kind.
void check_kinds(const Constraint &c, const catalog::AttributeSpec &spec);
void check_kinds(const Objective &o, const catalog::AttributeSpec &spec);

enum class Widening { equal, wider, narrower, incomparable };

// Compares the satisfying sets of two constraints on the same attribute.
Widening compare_width(const Constraint &before, const Constraint &after,
                       const catalog::AttributeSpec *spec);

// Short human rendering, e.g. "rating is G or PG", "IMAX is available".
std::string describe(const Constraint &c, const catalog::AttributeSpec *spec);

json to_json(const Compiled &compiled);
Compiled compiled_from_json(const json &j);
json constraint_to_json(const Constraint &c);
Constraint constraint_from_json(const json &j);

} // namespace maestro::prefs
