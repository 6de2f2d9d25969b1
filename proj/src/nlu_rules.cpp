#include "maestro/nlu.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

namespace maestro::nlu {

using catalog::AttributeSpec;
using catalog::OptionItem;
using prefs::Comparator;
using prefs::Constraint;
using prefs::Objective;
using prefs::Strength;

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\''; }

std::string lowercase(std::string s) {
  for (auto &c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

std::string trim(std::string s) {
  const auto lead = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == ','; };
  const auto tail = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '.' || c == '!'; };
  while (!s.empty() && lead(s.front())) s.erase(s.begin());
  while (!s.empty() && tail(s.back())) s.pop_back();
  return s;
}

void replace_all(std::string &s, const std::string &from, const std::string &to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) s.replace(pos, from.size(), to);
}

// Boundary-aware search; returns npos when absent.
std::size_t find_phrase(const std::string &hay, const std::string &needle, std::size_t from = 0) {
  if (needle.empty()) return std::string::npos;
  for (std::size_t pos = hay.find(needle, from); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    const bool left = pos == 0 || !word_char(hay[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right = end >= hay.size() || !word_char(hay[end]);
    if (left && right) return pos;
  }
  return std::string::npos;
}

bool has(const std::string &hay, std::string_view needle) { return find_phrase(hay, std::string(needle)) != std::string::npos; }

bool has_any(const std::string &hay, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(), [&](std::string_view n) { return has(hay, n); });
}

std::vector<std::string> words_of(const std::string &low) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : low) {
    if (word_char(c)) {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Up to `n` words ending right before `pos`.
std::vector<std::string> words_before(const std::string &low, std::size_t pos, std::size_t n) {
  auto w = words_of(low.substr(0, pos));
  if (w.size() > n) w.erase(w.begin(), w.end() - static_cast<std::ptrdiff_t>(n));
  return w;
}

bool negated_before(const std::string &low, std::size_t pos) {
  static const std::set<std::string> neg = {"not", "no", "avoid", "without", "except", "never", "non", "nothing"};
  for (const auto &w : words_before(low, pos, 3)) {
    if (neg.count(w)) return true;
  }
  return false;
}

constexpr const char *kWeekdays[] = {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};

std::string capitalized(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct DateMention {
  std::size_t pos;
  std::string value;  // "Mar 14"
};

std::vector<DateMention> find_dates(const std::string &low) {
  static const std::regex re(
      R"(\b(jan|feb|mar|apr|may|jun|jul|aug|sep|sept|oct|nov|dec)[a-z]*\.?\s+(\d{1,2})(st|nd|rd|th)?\b)");
  std::vector<DateMention> out;
  for (auto it = std::sregex_iterator(low.begin(), low.end(), re); it != std::sregex_iterator(); ++it) {
    std::string month = (*it)[1].str().substr(0, 3);
    out.push_back({static_cast<std::size_t>(it->position()), capitalized(month) + " " + std::to_string(std::stoi((*it)[2].str()))});
  }
  return out;
}

struct TimeMention {
  std::size_t pos;
  double minutes;
};

std::vector<TimeMention> find_times(const std::string &low) {
  static const std::regex re(R"(\b(\d{1,2})(?::(\d{2}))?\s*(a\.?m\.?|p\.?m\.?)(?![a-z])|\bnoon\b|\bmidnight\b)");
  std::vector<TimeMention> out;
  for (auto it = std::sregex_iterator(low.begin(), low.end(), re); it != std::sregex_iterator(); ++it) {
    const auto &m = *it;
    double minutes = 0;
    if (m.str() == "noon") {
      minutes = 720;
    } else if (m.str() == "midnight") {
      minutes = 1440;
    } else {
      int h = std::stoi(m[1].str()) % 12;
      const int mm = m[2].matched ? std::stoi(m[2].str()) : 0;
      if (m[3].str()[0] == 'p') h += 12;
      minutes = h * 60 + mm;
    }
    out.push_back({static_cast<std::size_t>(m.position()), minutes});
  }
  return out;
}

int number_word(const std::string &w) {
  static const std::map<std::string, int> n = {{"one", 1}, {"two", 2}, {"three", 3}, {"four", 4}, {"five", 5},
                                               {"pair", 2}, {"couple", 2}, {"1", 1}, {"2", 2}, {"3", 3}, {"4", 4}};
  const auto it = n.find(w);
  return it == n.end() ? 0 : it->second;
}

std::vector<std::string> seat_tokens(const std::string &low) {
  static const std::regex re(R"(\b([a-z])(\d{1,2})\b)");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(low.begin(), low.end(), re); it != std::sregex_iterator(); ++it) {
    std::string row = (*it)[1].str();
    if (row == "a" || row == "i") continue;  // articles and pronouns, not seat rows
    out.push_back(std::string(1, static_cast<char>(std::toupper(row[0]))) + (*it)[2].str());
  }
  return out;
}

enum class Cue { none, hard, soft, strong_soft };

struct Clause {
  std::string text;
  std::string low;
  Cue cue = Cue::none;
  bool released = false;  // "don't need ..."
  bool availability = false;
  Strength strength = Strength::soft;
};

// Where each attribute lives and which literal values it takes.
struct Vocabulary {
  struct Entry {
    std::string attribute;
    std::string value;
    std::string low;
  };
  std::vector<Entry> values;
  std::map<std::string, const AttributeSpec *> specs;
  std::map<std::string, std::vector<std::string>> stages;
  const catalog::WorkflowDef *workflow = nullptr;

  const AttributeSpec *spec(const std::string &attr) const {
    const auto it = specs.find(attr);
    return it == specs.end() ? nullptr : it->second;
  }
};

Vocabulary build_vocabulary(const catalog::Scenario &scenario) {
  Vocabulary v;
  v.workflow = &scenario.workflow();
  static const std::set<std::string> special = {"date", "weekday", "row"};
  for (const auto &stage : scenario.workflow().stages) {
    if (stage.is_terminal()) continue;
    for (const auto &spec : stage.attribute_specs) {
      v.stages[spec.name].push_back(stage.id);
      if (!v.specs.count(spec.name)) v.specs[spec.name] = &spec;
      if (special.count(spec.name)) continue;
      if (spec.kind != AttributeKind::categorical && spec.kind != AttributeKind::ordinal) continue;
      std::set<std::string> seen;
      std::vector<std::string> vals = spec.order;
      for (const auto &o : scenario.universe(stage.id)) {
        if (const auto *val = o.attribute(spec.name)) {
          if (const auto *s = as_string(*val)) vals.push_back(*s);
        }
      }
      for (const auto &val : vals) {
        if (!seen.insert(val).second) continue;
        if (val.size() < 2 && spec.kind != AttributeKind::ordinal) continue;
        v.values.push_back({spec.name, val, lowercase(val)});
      }
    }
  }
  return v;
}

std::vector<Clause> split_clauses(const std::string &original) {
  std::string text = original;
  replace_all(text, "\xE2\x80\x99", "'");
  replace_all(text, "\xE2\x80\x94", ", ");
  replace_all(text, "---", ", ");
  // "Friday, March 13" reads as one date mention.
  static const std::regex weekday_comma(R"(\b(monday|tuesday|wednesday|thursday|friday|saturday|sunday),\s+)",
                                        std::regex::icase);
  text = std::regex_replace(text, weekday_comma, "$1 ");
  const std::string low = lowercase(text);

  std::vector<std::size_t> cuts;
  for (std::size_t i = 0; i < low.size(); ++i) {
    const char c = low[i];
    if ((c == '.' || c == '!' || c == '?' || c == ';') && (i + 1 == low.size() || low[i + 1] == ' ')) cuts.push_back(i + 1);
  }
  for (const char *conn : {", but ", " but ", ", preferably", ", preferring", ", ideally", ", and ", ", though", ", although"}) {
    for (std::size_t pos = low.find(conn); pos != std::string::npos; pos = low.find(conn, pos + 1)) {
      cuts.push_back(pos);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Clause> out;
  std::size_t start = 0;
  cuts.push_back(low.size());
  for (std::size_t cut : cuts) {
    if (cut <= start) continue;
    std::string piece = trim(text.substr(start, cut - start));
    start = cut;
    for (const char *lead : {"and ", "but ", "And ", "But "}) {
      if (piece.rfind(lead, 0) == 0) piece = trim(piece.substr(std::string(lead).size()));
    }
    if (piece.empty()) continue;
    Clause cl;
    cl.text = piece;
    cl.low = lowercase(piece);
    replace_all(cl.low, "-rated", " rated");
    out.push_back(std::move(cl));
  }
  return out;
}

void assign_cues(std::vector<Clause> &clauses) {
  Strength previous = Strength::soft;
  for (auto &c : clauses) {
    const auto &l = c.low;
    c.released = has_any(l, {"don't need", "do not need", "doesn't need", "does not need", "no longer need", "don't have to",
                             "doesn't have to", "not necessary", "don't care about", "doesn't matter", "does not matter", "do not care about"});
    if (c.released) {
      c.cue = Cue::soft;
    } else if (has_any(l, {"must", "only", "need", "needs", "have to", "has to", "require", "requires", "required", "cannot",
                           "can't", "got to", "insist"})) {
      c.cue = Cue::hard;
    } else if (has_any(l, {"prefer", "preferably", "preferring", "preferred", "ideally", "rather", "if possible", "the better",
                           "would be nice", "better if"})) {
      c.cue = Cue::strong_soft;
    } else if (has_any(l, {"want", "wants", "like", "would like", "i'd like", "hoping", "love", "would love", "start with"})) {
      c.cue = Cue::soft;
    }
    c.availability = has_any(l, {"works", "work", "can go", "can do", "available", "i can make", "free on", "can make it"});
    if (c.cue == Cue::hard) {
      c.strength = Strength::hard;
    } else if (c.cue == Cue::none) {
      c.strength = previous;
    } else {
      c.strength = Strength::soft;
    }
    previous = c.strength;
  }
}

struct Finding {
  Strength strength;
  prefs::Compiled compiled;
  std::string description;
};

class Extractor {
public:
  Extractor(const Vocabulary &vocab, int turn) : vocab_(vocab), turn_(turn) {}

  void run(std::vector<Clause> &clauses, const std::string &whole) {
    for (auto &c : clauses) {
      values(c);
      kid_friendly(c);
      booleans(c);
      numeric_phrases(c);
      times(c);
      seats(c);
      objectives(c);
    }
    dates(clauses, whole);
    weekdays(clauses);
  }

  std::vector<prefs::PreferenceRecord> records(json &trace) const {
    std::vector<prefs::PreferenceRecord> out;
    for (const auto &[attr, f] : ordered_) {
      prefs::PreferenceRecord r;
      r.description = f.description;
      r.strength = f.strength;
      r.relevant_stages = vocab_.stages.at(attr);
      r.compiled = f.compiled;
      r.origin_turn = turn_;
      try {
        prefs::validate_record(r, *vocab_.workflow);
        out.push_back(std::move(r));
      } catch (const Error &e) {
        trace["rejected"].push_back({{"attribute", attr}, {"reason", e.what()}});
      }
    }
    return out;
  }

private:
  bool taken(const std::string &attr) const {
    return std::any_of(ordered_.begin(), ordered_.end(), [&](const auto &p) { return p.first == attr; });
  }

  void add(const std::string &attr, Strength s, prefs::Compiled compiled, const std::string &description) {
    if (!vocab_.spec(attr) || taken(attr)) return;
    if (s == Strength::hard && std::holds_alternative<Objective>(compiled)) s = Strength::soft;
    ordered_.emplace_back(attr, Finding{s, std::move(compiled), description});
  }

  static Constraint constraint(const std::string &attr, Comparator cmp, std::vector<Value> values) {
    Constraint c;
    c.attribute = attr;
    c.comparator = cmp;
    c.values = std::move(values);
    return c;
  }

  static Constraint predicate(const std::string &name, Value arg) {
    Constraint c;
    c.attribute = *prefs::predicate_attribute(name);
    c.comparator = Comparator::predicate;
    c.predicate = name;
    c.args = {std::move(arg)};
    return c;
  }

  void values(const Clause &c) {
    struct Hit {
      std::size_t pos, len;
      const Vocabulary::Entry *entry;
    };
    std::vector<Hit> hits;
    for (const auto &e : vocab_.values) {
      for (std::size_t pos = find_phrase(c.low, e.low); pos != std::string::npos; pos = find_phrase(c.low, e.low, pos + 1)) {
        hits.push_back({pos, e.low.size(), &e});
      }
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit &a, const Hit &b) { return a.len > b.len; });
    std::vector<Hit> kept;
    for (const auto &h : hits) {
      const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Hit &k) {
        return h.pos < k.pos + k.len && k.pos < h.pos + h.len;
      });
      if (!overlaps) kept.push_back(h);
    }
    std::stable_sort(kept.begin(), kept.end(), [](const Hit &a, const Hit &b) { return a.pos < b.pos; });

    std::vector<std::string> order;
    std::map<std::string, std::vector<Hit>> by_attr;
    for (const auto &h : kept) {
      if (!by_attr.count(h.entry->attribute)) order.push_back(h.entry->attribute);
      by_attr[h.entry->attribute].push_back(h);
    }
    for (const auto &attr : order) {
      const auto &hs = by_attr[attr];
      const AttributeSpec *spec = vocab_.spec(attr);
      // "premium seats, standard would feel too ordinary": the dismissed value drops out.
      const auto dismissed = [&](const Hit &h) {
        const std::string after = c.low.substr(h.pos + h.len, 24);
        return negated_before(c.low, h.pos) || has_any(after, {" would feel too", " feels too", " is too", " would be too", " seems too"});
      };
      std::vector<Hit> hs_kept;
      for (const auto &h : hs) {
        if (!dismissed(h)) hs_kept.push_back(h);
      }
      const bool all_dismissed = hs_kept.empty();
      if (all_dismissed) hs_kept = hs;
      const Hit &first = hs_kept.front();
      std::vector<Value> vals;
      for (const auto &h : hs_kept) {
        if (std::find(vals.begin(), vals.end(), Value(h.entry->value)) == vals.end()) vals.push_back(h.entry->value);
      }
      if (all_dismissed) {
        add(attr, c.strength, constraint(attr, Comparator::neq, {vals.front()}), c.text);
        continue;
      }
      if (spec->kind == AttributeKind::ordinal) {
        const std::string after = c.low.substr(first.pos + first.len, 16);
        const auto before = words_before(c.low, first.pos, 2);
        const std::string lead = before.size() == 2 ? before[0] + " " + before[1] : "";
        const auto starts = [&](std::initializer_list<const char *> ps) {
          return std::any_of(ps.begin(), ps.end(), [&](const char *p) { return after.rfind(p, 0) == 0; });
        };
        if (starts({" or below", " or lower", " or under", " or less", " and below", " and under"}) || lead == "at most" ||
            lead == "up to") {
          add(attr, c.strength, constraint(attr, Comparator::le, {vals.front()}), c.text);
          continue;
        }
        if (starts({" or above", " or higher", " or more", " and up", " and above"}) || lead == "at least") {
          add(attr, c.strength, constraint(attr, Comparator::ge, {vals.front()}), c.text);
          continue;
        }
        std::sort(vals.begin(), vals.end(), [&](const Value &a, const Value &b) {
          return spec->rank_of(*as_string(a)) < spec->rank_of(*as_string(b));
        });
        add(attr, c.strength, vals.size() == 1 ? constraint(attr, Comparator::eq, vals) : constraint(attr, Comparator::in_set, vals),
            c.text);
        continue;
      }
      if (c.strength == Strength::soft) {
        Objective o;
        o.attribute = attr;
        o.prefer_set = vals;
        add(attr, c.strength, o, c.text);
      } else if (attr == "tier" && vals.size() == 1) {
        add(attr, c.strength, predicate("tierIs", vals.front()), c.text);
      } else {
        add(attr, c.strength, vals.size() == 1 ? constraint(attr, Comparator::eq, vals) : constraint(attr, Comparator::in_set, vals),
            c.text);
      }
    }
  }

  void kid_friendly(const Clause &c) {
    const AttributeSpec *spec = vocab_.spec("rating");
    if (!spec || spec->kind != AttributeKind::ordinal || taken("rating")) return;
    if (!has_any(c.low, {"kid-friendly", "kid friendly", "family-friendly", "family friendly", "for kids", "for the kids"})) return;
    if (spec->rank_of("PG") < 0) return;
    add("rating", c.strength, constraint("rating", Comparator::le, {std::string("PG")}), c.text);
  }

  void booleans(const Clause &c) {
    for (const auto &[attr, spec] : vocab_.specs) {
      if (spec->kind != AttributeKind::boolean) continue;
      std::size_t pos = find_phrase(c.low, lowercase(spec->display_name()));
      if (pos == std::string::npos) pos = find_phrase(c.low, lowercase(attr));
      if (pos == std::string::npos) continue;
      if (c.released) {
        Objective o;
        o.attribute = attr;
        o.prefer_set = {true};
        add(attr, Strength::soft, o, c.text);
      } else if (negated_before(c.low, pos)) {
        add(attr, c.strength, constraint(attr, Comparator::eq, {false}), c.text);
      } else {
        // An amenity named outright is a requirement unless explicitly hedged.
        const Strength s = c.cue == Cue::strong_soft ? Strength::soft : Strength::hard;
        add(attr, s, constraint(attr, Comparator::eq, {true}), c.text);
      }
    }
  }

  void numeric_phrases(const Clause &c) {
    if (vocab_.spec("screens") && has_any(c.low, {"single-screen", "single screen", "one-screen", "one screen"})) {
      add("screens", c.strength, constraint("screens", Comparator::eq, {1.0}), c.text);
    }
    static const std::regex within(R"(\bwithin\s+(\d+(?:\.\d+)?)\s*(mi|miles?)\b)");
    std::smatch m;
    if (vocab_.spec("distance") && std::regex_search(c.low, m, within)) {
      add("distance", c.strength, constraint("distance", Comparator::le, {std::stod(m[1].str())}), c.text);
    }
    static const std::regex under(R"(\b(?:under|less than|no longer than|shorter than)\s+(\d+(?:\.\d+)?)\s*(hours?|hrs?|minutes?|mins?)\b)");
    if (vocab_.spec("runtime") && std::regex_search(c.low, m, under)) {
      double v = std::stod(m[1].str());
      if (m[2].str()[0] == 'h') v *= 60;
      add("runtime", c.strength, constraint("runtime", Comparator::le, {v}), c.text);
    }
  }

  void times(const Clause &c) {
    const auto mentions = find_times(c.low);
    for (const auto &t : mentions) {
      const auto before = words_before(c.low, t.pos, 4);
      if (before.empty()) continue;
      const std::string &prep = before.back();
      const std::string head = c.low.substr(0, t.pos);
      const bool start_word = has_any(head, {"start", "starts", "starting", "begin", "begins", "beginning"});
      if (prep == "after") {
        if (vocab_.spec("start")) add("start", c.strength, predicate("startsAfter", t.minutes), c.text);
      } else if (prep == "by" || prep == "before") {
        const auto ends = words_before(c.low, t.pos, 3);
        const bool about_start = prep == "before" && start_word &&
                                 std::none_of(ends.begin(), ends.end(), [](const std::string &w) {
                                   return w == "end" || w == "ending" || w == "ends" || w == "home" || w == "done";
                                 });
        if (about_start) {
          if (vocab_.spec("start")) add("start", c.strength, constraint("start", Comparator::le, {t.minutes}), c.text);
        } else if (vocab_.spec("end")) {
          add("end", c.strength, predicate("endsBy", t.minutes), c.text);
        }
      }
    }
    if (!vocab_.spec("start") || taken("start")) return;
    if (has(c.low, "morning")) {
      add("start", c.strength, constraint("start", Comparator::le, {719.0}), c.text);
    } else if (has(c.low, "afternoon")) {
      add("start", c.strength, constraint("start", Comparator::between, {720.0, 1019.0}), c.text);
    } else if (has(c.low, "evening")) {
      add("start", c.strength, constraint("start", Comparator::ge, {1020.0}), c.text);
    }
  }

  void seats(const Clause &c) {
    if (!vocab_.spec("count")) return;
    const auto w = words_of(c.low);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const int n = number_word(w[i]);
      if (!n) continue;
      bool seat_word = false;
      for (std::size_t j = i + 1; j < std::min(w.size(), i + 5); ++j) {
        if (w[j] == "seat" || w[j] == "seats") seat_word = true;
      }
      if (!seat_word && !(i + 1 < w.size() && w[i + 1] == "adjacent")) continue;
      const bool adjacent = has_any(c.low, {"adjacent", "together", "next to each other", "side by side", "in a row"}) ||
                            w[i] == "pair";
      add("count", c.strength, predicate(adjacent ? "adjacentSeats" : "countIs", static_cast<double>(n)), c.text);
      return;
    }
  }

  void objectives(const Clause &c) {
    struct Lex {
      const char *phrase;
      const char *attr;
      prefs::Direction dir;
    };
    using prefs::Direction;
    static const Lex lexicon[] = {
        {"shorter", "runtime", Direction::minimize},      {"shortest", "runtime", Direction::minimize},
        {"longest", "runtime", Direction::maximize},      {"closer", "distance", Direction::minimize},
        {"closest", "distance", Direction::minimize},     {"nearest", "distance", Direction::minimize},
        {"nearby", "distance", Direction::minimize},      {"near", "distance", Direction::minimize},
        {"farther", "distance", Direction::maximize},     {"higher rated", "score", Direction::maximize},
        {"highest rated", "score", Direction::maximize},  {"better rated", "score", Direction::maximize},
        {"best rated", "score", Direction::maximize},     {"top rated", "score", Direction::maximize},
        {"better reviewed", "score", Direction::maximize}, {"best reviewed", "score", Direction::maximize},
        {"lower rated", "score", Direction::minimize},    {"lowest rated", "score", Direction::minimize},
        {"worse rated", "score", Direction::minimize},    {"worst rated", "score", Direction::minimize},
        {"earlier", "start", Direction::minimize},        {"earliest", "start", Direction::minimize},
        {"later", "start", Direction::maximize},          {"latest", "start", Direction::maximize},
    };
    std::map<std::string, std::pair<std::size_t, Direction>> best;
    for (const auto &lex : lexicon) {
      const std::size_t pos = find_phrase(c.low, lex.phrase);
      if (pos == std::string::npos) continue;
      auto &slot = best.try_emplace(lex.attr, std::string::npos, lex.dir).first->second;
      if (pos < slot.first) slot = {pos, lex.dir};
    }
    std::vector<std::pair<std::size_t, std::string>> order;
    for (const auto &[attr, hit] : best) order.emplace_back(hit.first, attr);
    std::sort(order.begin(), order.end());
    for (const auto &[pos, attr] : order) {
      Objective o;
      o.attribute = attr;
      o.direction = best[attr].second;
      add(attr, Strength::soft, o, c.text);
    }
  }

  void dates(const std::vector<Clause> &clauses, const std::string &whole) {
    if (!vocab_.spec("date") || taken("date")) return;
    std::vector<std::string> found;
    bool hard = false, soft = false, availability = false;
    for (const auto &c : clauses) {
      const auto ds = find_dates(c.low);
      for (const auto &d : ds) {
        if (std::find(found.begin(), found.end(), d.value) == found.end()) found.push_back(d.value);
      }
      if (ds.empty()) continue;
      hard = hard || c.cue == Cue::hard;
      soft = soft || c.cue == Cue::soft || c.cue == Cue::strong_soft;
      availability = availability || c.availability;
    }
    if (found.empty()) return;
    std::vector<Value> vals(found.begin(), found.end());
    if (found.size() > 1 || availability || hard) {
      add("date", Strength::hard, constraint("date", found.size() == 1 ? Comparator::eq : Comparator::in_set, vals), trim(whole));
    } else if (soft) {
      Objective o;
      o.attribute = "date";
      o.prefer_set = vals;
      add("date", Strength::soft, o, trim(whole));
    }
    dates_mentioned_ = true;
  }

  void weekdays(const std::vector<Clause> &clauses) {
    if (!vocab_.spec("weekday") || taken("weekday")) return;
    for (const auto &c : clauses) {
      std::vector<Value> days;
      for (const char *d : kWeekdays) {
        if (has(c.low, d)) days.push_back(capitalized(d));
      }
      if (days.empty()) continue;
      const bool soft_clause = c.cue == Cue::soft || c.cue == Cue::strong_soft;
      if (dates_mentioned_ && !soft_clause) continue;
      if (!dates_mentioned_ && c.cue == Cue::none) continue;
      if (c.strength == Strength::soft) {
        Objective o;
        o.attribute = "weekday";
        o.prefer_set = days;
        add("weekday", Strength::soft, o, c.text);
      } else {
        add("weekday", Strength::hard,
            constraint("weekday", days.size() == 1 ? Comparator::eq : Comparator::in_set, days), c.text);
      }
      return;
    }
  }

  const Vocabulary &vocab_;
  int turn_;
  bool dates_mentioned_ = false;
  std::vector<std::pair<std::string, Finding>> ordered_;
};

std::string stage_from_words(const std::string &low, const catalog::WorkflowDef &wf) {
  static const std::pair<const char *, const char *> nouns[] = {
      {"movie", "movie"}, {"film", "movie"},   {"theater", "theater"}, {"theatre", "theater"}, {"cinema", "theater"},
      {"date", "date"},   {"day", "date"},     {"showtime", "time"},   {"time", "time"},       {"seat", "seat"},
      {"seats", "seat"},  {"confirmation", "confirmation"}};
  for (const auto &[word, stage] : nouns) {
    if (has(low, word) && wf.stage(stage)) return stage;
  }
  for (const auto &s : wf.stages) {
    if (has(low, lowercase(s.id))) return s.id;
  }
  return {};
}

ActionIntent command_intent(const std::string &low, const catalog::WorkflowDef *wf) {
  ActionIntent a;
  const auto w = words_of(low);
  if (w.size() > 8) return a;
  if (has_any(low, {"go back", "back to", "take me back", "previous step", "step back", "back up"}) || low == "back") {
    a.kind = ActionKind::back;
    if (wf) a.target_stage = stage_from_words(low, *wf);
  } else if (has_any(low, {"show all", "show me all", "show everything", "see all", "show them all", "all the options", "all options"})) {
    a.kind = ActionKind::show_all;
  } else if (has_any(low, {"submit", "book it", "place the order", "finalize", "confirm the booking", "complete the booking"})) {
    a.kind = ActionKind::submit;
  } else if (has_any(low, {"continue", "next step", "proceed", "move on"}) || low == "next") {
    a.kind = ActionKind::next;
  }
  return a;
}

ActionKind reply_intent(const std::string &low) {
  const auto w = words_of(low);
  if (w.empty() || w.size() > 6) return ActionKind::none;
  static const std::set<std::string> yes = {"yes", "yeah", "yep", "yup", "sure", "ok", "okay", "absolutely", "definitely",
                                            "alright", "perfect", "great", "sounds", "let's", "lets", "please", "correct", "fine"};
  static const std::set<std::string> no = {"no", "nope", "nah", "not", "don't", "decline"};
  if (no.count(w[0])) return ActionKind::decline;
  if (yes.count(w[0])) return ActionKind::affirm;
  if (has_any(low, {"go ahead", "do it", "that works", "works for me"})) return ActionKind::affirm;
  return ActionKind::none;
}

bool is_question(const std::string &low) {
  if (!low.empty() && low.back() == '?') return true;
  const auto w = words_of(low);
  if (w.empty()) return false;
  static const std::set<std::string> wh = {"how", "what", "what's", "which", "when", "where", "who", "why", "is", "are",
                                           "does", "do", "can", "could", "will", "tell"};
  return wh.count(w[0]) > 0 && w.size() > 1 && (w[0] != "can" || has(low, "tell"));
}

std::vector<std::string> asked_attributes(const std::string &low, const catalog::StageDef *stage) {
  static const std::pair<const char *, const char *> lex[] = {
      {"long", "runtime"},    {"length", "runtime"},   {"runtime", "runtime"}, {"duration", "runtime"},
      {"rated", "rating"},    {"rating", "rating"},    {"far", "distance"},    {"distance", "distance"},
      {"close", "distance"},  {"away", "distance"},    {"imax", "imax"},       {"screens", "screens"},
      {"what time", "start"}, {"start", "start"},      {"begin", "start"},     {"end", "end"},
      {"finish", "end"},      {"over", "end"},         {"genre", "genre"},     {"kind of", "genre"},
      {"score", "score"},     {"reviews", "score"},    {"tone", "tone"},       {"premium", "tier"},
      {"tier", "tier"},       {"zone", "zone"},        {"where", "zone"},      {"day", "weekday"},
      {"weekday", "weekday"}};
  std::vector<std::string> out;
  if (!stage) return out;
  for (const auto &[word, attr] : lex) {
    if (has(low, word) && stage->spec(attr) && std::find(out.begin(), out.end(), attr) == out.end()) out.push_back(attr);
  }
  if (std::find(out.begin(), out.end(), "score") != out.end()) std::erase(out, std::string("rating"));
  return out;
}

// Maps an utterance to an option of the current stage, if it names one.
ActionIntent option_reference(const std::string &low, const Context &ctx) {
  ActionIntent a;
  if (!ctx.stage) return a;
  std::size_t best_len = 0;
  for (const auto &o : ctx.options) {
    for (const std::string &name : {lowercase(o.label), lowercase(o.id)}) {
      if (name.size() > best_len && find_phrase(low, name) != std::string::npos) {
        best_len = name.size();
        a.kind = ActionKind::select;
        a.option_id = o.id;
        a.mention = name;
      }
    }
  }
  if (a.kind == ActionKind::select) return a;

  const auto dates = find_dates(low);
  if (!dates.empty()) {
    a.kind = ActionKind::select;
    a.mention = dates.front().value;
    for (const auto &o : ctx.options) {
      const Value *v = o.attribute("date");
      if (v && as_string(*v) && *as_string(*v) == dates.front().value) a.option_id = o.id;
    }
    return a;
  }
  const auto times = find_times(low);
  if (!times.empty() && ctx.stage->spec("start")) {
    a.kind = ActionKind::select;
    a.mention = clock_text(times.front().minutes);
    for (const auto &o : ctx.options) {
      const Value *v = o.attribute("start");
      if (v && as_number(*v) && *as_number(*v) == times.front().minutes) a.option_id = o.id;
    }
    return a;
  }
  if (ctx.stage->ui_kind == catalog::UiKind::seat_map) {
    const auto seats = seat_tokens(low);
    if (!seats.empty()) {
      a.kind = ActionKind::select;
      const std::string id = seats.size() == 1 ? seats.front() : seats.front() + "-" + seats.back();
      a.mention = id;
      for (const auto &o : ctx.options) {
        if (o.id == id) a.option_id = id;
      }
    }
  }
  return a;
}

} // namespace

std::string_view to_string(UtteranceClass c) {
  switch (c) {
  case UtteranceClass::preference_statement: return "preferenceStatement";
  case UtteranceClass::information_seeking: return "informationSeeking";
  case UtteranceClass::action_request: return "actionRequest";
  case UtteranceClass::other: return "other";
  }
  return "other";
}

UtteranceClass utterance_class_from_string(std::string_view text) {
  if (text == "preferenceStatement") return UtteranceClass::preference_statement;
  if (text == "informationSeeking") return UtteranceClass::information_seeking;
  if (text == "actionRequest") return UtteranceClass::action_request;
  if (text == "other") return UtteranceClass::other;
  throw Error("parse_error", "unknown utterance class '" + std::string(text) + "'");
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
  case ActionKind::none: return "none";
  case ActionKind::affirm: return "affirm";
  case ActionKind::decline: return "decline";
  case ActionKind::back: return "back";
  case ActionKind::next: return "continue";
  case ActionKind::show_all: return "showAll";
  case ActionKind::submit: return "submit";
  case ActionKind::select: return "select";
  }
  return "none";
}

ActionKind action_kind_from_string(std::string_view text) {
  for (auto k : {ActionKind::none, ActionKind::affirm, ActionKind::decline, ActionKind::back, ActionKind::next,
                 ActionKind::show_all, ActionKind::submit, ActionKind::select}) {
    if (to_string(k) == text) return k;
  }
  throw Error("parse_error", "unknown action kind '" + std::string(text) + "'");
}

ExtractionResult RulesProvider::extract(const Utterance &utterance, const Context &ctx) {
  ExtractionResult out;
  out.provider_trace = {{"provider", "rules"}};
  if (utterance.channel == Channel::gui_action) return out;

  const std::string low = lowercase(trim(utterance.text));
  if (low.empty()) return out;
  const catalog::WorkflowDef *wf = ctx.scenario ? &ctx.scenario->workflow() : nullptr;

  if (auto cmd = command_intent(low, wf); cmd.kind != ActionKind::none) {
    out.utterance_class = UtteranceClass::action_request;
    out.action = cmd;
    return out;
  }

  if (ctx.scenario && !is_question(low)) {
    const Vocabulary vocab = build_vocabulary(*ctx.scenario);
    auto clauses = split_clauses(utterance.text);
    assign_cues(clauses);
    Extractor ex(vocab, utterance.turn_index);
    ex.run(clauses, utterance.text);
    out.records = ex.records(out.provider_trace);
    json cl = json::array();
    for (const auto &c : clauses) cl.push_back({{"text", c.text}, {"strength", c.strength == Strength::hard ? "hard" : "soft"}});
    out.provider_trace["clauses"] = cl;
  }

  // A bare option name is a selection even when it happens to contain a
  // catalog value.
  const ActionIntent ref = option_reference(low, ctx);
  const bool bare_reference = ref.kind == ActionKind::select && !ref.option_id.empty() &&
                              words_of(low).size() <= words_of(ref.mention).size() + 3;
  if (!out.records.empty() && !bare_reference) {
    out.utterance_class = UtteranceClass::preference_statement;
    return out;
  }
  out.records.clear();

  if (const auto reply = reply_intent(low); reply != ActionKind::none) {
    out.utterance_class = UtteranceClass::action_request;
    out.action.kind = reply;
    // "Let's go with X" names the choice outright.
    if (reply == ActionKind::affirm && ref.kind == ActionKind::select && !ref.option_id.empty()) out.action = ref;
    return out;
  }
  if (is_question(low)) {
    out.utterance_class = UtteranceClass::information_seeking;
    out.asked_attributes = asked_attributes(low, ctx.stage);
    return out;
  }
  if (ref.kind == ActionKind::select) {
    out.utterance_class = UtteranceClass::action_request;
    out.action = ref;
    return out;
  }
  if (has_any(low, {"prefer", "need", "want", "like", "must", "only", "ideally", "rather", "would love", "hoping"})) {
    out.utterance_class = UtteranceClass::preference_statement;
    return out;
  }
  if (!find_dates(low).empty() || !find_times(low).empty()) {
    out.utterance_class = UtteranceClass::action_request;
    out.action.kind = ActionKind::select;
    return out;
  }
  out.utterance_class = UtteranceClass::other;
  return out;
}

UtteranceClass RulesProvider::classify_only(const Utterance &utterance, const Context *context) {
  static const Context empty;
  return extract(utterance, context ? *context : empty).utterance_class;
}

} // namespace maestro::nlu
