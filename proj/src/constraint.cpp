#include "maestro/constraint.hpp"

#include <algorithm>
#include <cmath>

namespace maestro::prefs {

namespace {

[[noreturn]] void bad(const std::string &message) { throw Error("invalid_record", message); }

struct PredicateDef {
  std::string_view name;
  std::string_view attribute;
  AttributeKind arg_kind;
};

constexpr PredicateDef kPredicates[] = {
    {"adjacentSeats", "count", AttributeKind::numeric},
    {"countIs", "count", AttributeKind::numeric},
    {"tierIs", "tier", AttributeKind::categorical},
    {"startsAfter", "start", AttributeKind::numeric},
    {"endsBy", "end", AttributeKind::numeric},
};

const PredicateDef *find_predicate(std::string_view name) {
  for (const auto &p : kPredicates) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

} // namespace

std::optional<int> compare_values(const Value &a, const Value &b, const catalog::AttributeSpec *spec) {
  if (spec && spec->kind == AttributeKind::ordinal) {
    const auto *sa = as_string(a);
    const auto *sb = as_string(b);
    if (!sa || !sb) return std::nullopt;
    const int ra = spec->rank_of(*sa), rb = spec->rank_of(*sb);
    if (ra < 0 || rb < 0) return std::nullopt;
    return (ra > rb) - (ra < rb);
  }
  if (const auto *na = as_number(a)) {
    const auto *nb = as_number(b);
    if (!nb) return std::nullopt;
    return (*na > *nb) - (*na < *nb);
  }
  if (a.index() != b.index()) return std::nullopt;
  return a == b ? 0 : std::optional<int>{};
}

namespace {

std::optional<int> compare(const Value &a, const Value &b, const catalog::AttributeSpec *spec) {
  return compare_values(a, b, spec);
}

bool contains(const std::vector<Value> &set, const Value &v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

bool subset(const std::vector<Value> &a, const std::vector<Value> &b) {
  return std::all_of(a.begin(), a.end(), [&](const Value &v) { return contains(b, v); });
}

std::string join_or(const std::vector<Value> &values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += i + 1 == values.size() ? " or " : ", ";
    out += value_to_string(values[i]);
  }
  return out;
}

std::string shown(const Value &v, const catalog::AttributeSpec *spec) {
  if (spec && spec->unit == "clock" && as_number(v)) return clock_text(*as_number(v));
  return value_to_string(v);
}

} // namespace

std::string_view to_string(Comparator c) {
  switch (c) {
  case Comparator::eq: return "eq";
  case Comparator::neq: return "neq";
  case Comparator::le: return "le";
  case Comparator::ge: return "ge";
  case Comparator::between: return "between";
  case Comparator::in_set: return "inSet";
  case Comparator::predicate: return "predicate";
  }
  return "eq";
}

Comparator comparator_from_string(std::string_view text) {
  if (text == "eq") return Comparator::eq;
  if (text == "neq") return Comparator::neq;
  if (text == "le") return Comparator::le;
  if (text == "ge") return Comparator::ge;
  if (text == "between") return Comparator::between;
  if (text == "inSet") return Comparator::in_set;
  if (text == "predicate") return Comparator::predicate;
  bad("unknown comparator '" + std::string(text) + "'");
}

const std::string &compiled_attribute(const Compiled &compiled) {
  return std::visit([](const auto &c) -> const std::string & { return c.attribute; }, compiled);
}

std::optional<std::string> predicate_attribute(std::string_view name) {
  if (const auto *p = find_predicate(name)) return std::string(p->attribute);
  return std::nullopt;
}

bool satisfies(const Constraint &c, const catalog::OptionItem &option, const catalog::AttributeSpec *spec) {
  const Value *v = option.attribute(c.attribute);
  if (!v) return true;
  switch (c.comparator) {
  case Comparator::eq: return !c.values.empty() && compare(*v, c.values[0], spec) == 0;
  case Comparator::neq: return c.values.empty() || compare(*v, c.values[0], spec) != 0;
  case Comparator::le: {
    auto r = c.values.empty() ? std::nullopt : compare(*v, c.values[0], spec);
    return r && *r <= 0;
  }
  case Comparator::ge: {
    auto r = c.values.empty() ? std::nullopt : compare(*v, c.values[0], spec);
    return r && *r >= 0;
  }
  case Comparator::between: {
    if (c.values.size() != 2) return false;
    auto lo = compare(*v, c.values[0], spec), hi = compare(*v, c.values[1], spec);
    return lo && hi && *lo >= 0 && *hi <= 0;
  }
  case Comparator::in_set:
    return std::any_of(c.values.begin(), c.values.end(), [&](const Value &x) { return compare(*v, x, spec) == 0; });
  case Comparator::predicate: {
    if (c.args.empty()) return false;
    const Value &arg = c.args[0];
    if (c.predicate == "adjacentSeats" || c.predicate == "countIs") return compare(*v, arg, spec) == 0;
    if (c.predicate == "tierIs") return *v == arg;
    if (c.predicate == "startsAfter") { auto r = compare(*v, arg, spec); return r && *r > 0; }
    if (c.predicate == "endsBy") { auto r = compare(*v, arg, spec); return r && *r <= 0; }
    return false;
  }
  }
  return false;
}

bool applies_to(const Constraint &c, const catalog::StageDef &stage) { return stage.spec(c.attribute) != nullptr; }

void check_kinds(const Constraint &c, const catalog::AttributeSpec &spec) {
  if (c.attribute != spec.name) bad("constraint attribute '" + c.attribute + "' checked against '" + spec.name + "'");
  auto value_ok = [&](const Value &v) {
    switch (spec.kind) {
    case AttributeKind::categorical: return as_string(v) != nullptr;
    case AttributeKind::ordinal: return as_string(v) && spec.rank_of(*as_string(v)) >= 0;
    case AttributeKind::numeric: return as_number(v) != nullptr;
    case AttributeKind::boolean: return as_bool(v) != nullptr;
    }
    return false;
  };
  const bool orderable = spec.kind == AttributeKind::numeric || spec.kind == AttributeKind::ordinal;
  switch (c.comparator) {
  case Comparator::eq:
  case Comparator::neq:
    if (c.values.size() != 1) bad(std::string(to_string(c.comparator)) + " takes exactly one value");
    break;
  case Comparator::le:
  case Comparator::ge:
    if (!orderable) bad(std::string(to_string(c.comparator)) + " needs a numeric or ordinal attribute, '" + spec.name + "' is " + std::string(to_string(spec.kind)));
    if (c.values.size() != 1) bad(std::string(to_string(c.comparator)) + " takes exactly one value");
    break;
  case Comparator::between:
    if (!orderable) bad("between needs a numeric or ordinal attribute");
    if (c.values.size() != 2) bad("between takes two values");
    break;
  case Comparator::in_set:
    if (c.values.empty()) bad("inSet needs at least one value");
    if (spec.kind == AttributeKind::numeric) bad("inSet is not valid on numeric attribute '" + spec.name + "'");
    break;
  case Comparator::predicate: {
    const auto *p = find_predicate(c.predicate);
    if (!p) bad("unregistered predicate '" + c.predicate + "'");
    if (p->attribute != spec.name) bad("predicate " + c.predicate + " reads '" + std::string(p->attribute) + "', not '" + spec.name + "'");
    if (c.args.size() != 1) bad("predicate " + c.predicate + " takes one argument");
    const bool arg_ok = p->arg_kind == AttributeKind::numeric ? as_number(c.args[0]) != nullptr : as_string(c.args[0]) != nullptr;
    if (!arg_ok) bad("predicate " + c.predicate + " argument has the wrong kind");
    return;
  }
  }
  for (const auto &v : c.values) {
    if (!value_ok(v)) bad("value " + value_to_json(v).dump() + " does not fit " + std::string(to_string(spec.kind)) + " attribute '" + spec.name + "'");
  }
}

void check_kinds(const Objective &o, const catalog::AttributeSpec &spec) {
  if (o.attribute != spec.name) bad("objective attribute mismatch");
  const bool orderable = spec.kind == AttributeKind::numeric || spec.kind == AttributeKind::ordinal;
  if (o.direction) {
    if (!orderable) bad("sort objective needs a numeric or ordinal attribute; '" + spec.name + "' is " + std::string(to_string(spec.kind)));
    if (!o.prefer_set.empty()) bad("objective cannot carry both a direction and a preferSet");
  } else {
    if (orderable) bad("preferSet objective is for categorical or boolean attributes only");
    if (o.prefer_set.empty()) bad("objective needs a direction or a non-empty preferSet");
  }
}

Widening compare_width(const Constraint &before, const Constraint &after, const catalog::AttributeSpec *spec) {
  if (before == after) return Widening::equal;
  if (before.attribute != after.attribute) return Widening::incomparable;
  auto as_set = [](const Constraint &c) -> std::optional<std::vector<Value>> {
    if (c.comparator == Comparator::eq) return c.values;
    if (c.comparator == Comparator::in_set) return c.values;
    return std::nullopt;
  };
  if (auto a = as_set(before), b = as_set(after); a && b) {
    const bool ab = subset(*a, *b), ba = subset(*b, *a);
    if (ab && ba) return Widening::equal;
    if (ab) return Widening::wider;
    if (ba) return Widening::narrower;
    return Widening::incomparable;
  }
  auto bound = [&](Comparator cmp) -> Widening {
    auto r = compare(after.values.at(0), before.values.at(0), spec);
    if (!r) return Widening::incomparable;
    if (*r == 0) return Widening::equal;
    const bool larger = *r > 0;
    return (cmp == Comparator::le) == larger ? Widening::wider : Widening::narrower;
  };
  if (before.comparator == after.comparator) {
    switch (before.comparator) {
    case Comparator::le:
    case Comparator::ge:
      return bound(before.comparator);
    case Comparator::between: {
      auto lo = compare(after.values[0], before.values[0], spec);
      auto hi = compare(after.values[1], before.values[1], spec);
      if (!lo || !hi) return Widening::incomparable;
      if (*lo <= 0 && *hi >= 0) return Widening::wider;
      if (*lo >= 0 && *hi <= 0) return Widening::narrower;
      return Widening::incomparable;
    }
    case Comparator::predicate:
      if (before.predicate != after.predicate || before.args.empty() || after.args.empty()) return Widening::incomparable;
      if (before.predicate == "startsAfter" || before.predicate == "endsBy") {
        auto r = compare(after.args[0], before.args[0], spec);
        if (!r || *r == 0) return r ? Widening::equal : Widening::incomparable;
        // startsAfter widens with an earlier bound, endsBy with a later one.
        const bool later = *r > 0;
        return (before.predicate == "endsBy") == later ? Widening::wider : Widening::narrower;
      }
      return Widening::incomparable;
    default:
      break;
    }
  }
  return Widening::incomparable;
}

std::string describe(const Constraint &c, const catalog::AttributeSpec *spec) {
  const std::string name = spec ? spec->display_name() : c.attribute;
  switch (c.comparator) {
  case Comparator::eq:
    if (!c.values.empty() && as_bool(c.values[0])) return name + (*as_bool(c.values[0]) ? " is available" : " is not available");
    return name + " is " + (c.values.empty() ? "" : shown(c.values[0], spec));
  case Comparator::neq: return name + " is not " + (c.values.empty() ? "" : shown(c.values[0], spec));
  case Comparator::le: return name + " is at most " + shown(c.values.at(0), spec);
  case Comparator::ge: return name + " is at least " + shown(c.values.at(0), spec);
  case Comparator::between: return name + " is between " + shown(c.values.at(0), spec) + " and " + shown(c.values.at(1), spec);
  case Comparator::in_set: return name + " is " + join_or(c.values);
  case Comparator::predicate: {
    const std::string arg = c.args.empty() ? "" : shown(c.args[0], spec);
    if (c.predicate == "adjacentSeats") return arg + " adjacent seats";
    if (c.predicate == "countIs") return arg + " seats";
    if (c.predicate == "tierIs") return arg + " seats only";
    if (c.predicate == "startsAfter") return "starts after " + arg;
    if (c.predicate == "endsBy") return "ends by " + arg;
    return c.predicate + "(" + arg + ")";
  }
  }
  return name;
}

json constraint_to_json(const Constraint &c) {
  json out{{"type", "constraint"}, {"attribute", c.attribute}, {"comparator", to_string(c.comparator)}};
  if (c.comparator == Comparator::predicate) {
    json args = json::array();
    for (const auto &a : c.args) args.push_back(value_to_json(a));
    out["value"] = {{"name", c.predicate}, {"args", args}};
  } else if (c.comparator == Comparator::eq || c.comparator == Comparator::neq || c.comparator == Comparator::le ||
             c.comparator == Comparator::ge) {
    out["value"] = c.values.empty() ? json() : value_to_json(c.values[0]);
  } else {
    json vals = json::array();
    for (const auto &v : c.values) vals.push_back(value_to_json(v));
    out["value"] = vals;
  }
  return out;
}

Constraint constraint_from_json(const json &j) {
  try {
    Constraint c;
    c.comparator = comparator_from_string(j.at("comparator").get<std::string>());
    const json &v = j.at("value");
    if (c.comparator == Comparator::predicate) {
      c.predicate = v.at("name").get<std::string>();
      for (const auto &a : v.at("args")) c.args.push_back(value_from_json(a));
      auto attr = predicate_attribute(c.predicate);
      if (!attr) bad("unregistered predicate '" + c.predicate + "'");
      c.attribute = j.value("attribute", *attr);
    } else {
      c.attribute = j.at("attribute").get<std::string>();
      if (v.is_array()) {
        for (const auto &x : v) c.values.push_back(value_from_json(x));
      } else {
        c.values.push_back(value_from_json(v));
      }
    }
    return c;
  } catch (const json::exception &e) {
    bad(std::string("malformed constraint: ") + e.what());
  } catch (const Error &e) {
    if (e.code() == "invalid_record") throw;
    bad(e.what());
  }
}

json to_json(const Compiled &compiled) {
  if (const auto *c = std::get_if<Constraint>(&compiled)) return constraint_to_json(*c);
  const auto &o = std::get<Objective>(compiled);
  json out{{"type", "objective"}, {"attribute", o.attribute}};
  if (o.direction) {
    out["direction"] = *o.direction == Direction::minimize ? "minimize" : "maximize";
  } else {
    json set = json::array();
    for (const auto &v : o.prefer_set) set.push_back(value_to_json(v));
    out["preferSet"] = set;
  }
  return out;
}

Compiled compiled_from_json(const json &j) {
  if (j.value("type", "constraint") == "constraint") return constraint_from_json(j);
  try {
    Objective o;
    o.attribute = j.at("attribute").get<std::string>();
    if (j.contains("direction")) {
      const auto d = j["direction"].get<std::string>();
      if (d != "minimize" && d != "maximize") bad("direction must be minimize or maximize");
      o.direction = d == "minimize" ? Direction::minimize : Direction::maximize;
    }
    for (const auto &v : j.value("preferSet", json::array())) o.prefer_set.push_back(value_from_json(v));
    return o;
  } catch (const json::exception &e) {
    bad(std::string("malformed objective: ") + e.what());
  }
}

} // namespace maestro::prefs
