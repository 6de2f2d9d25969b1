#include "maestro/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace maestro::harness {

namespace {

[[noreturn]] void malformed(const std::string &what) { throw Error("parse_error", "persona: " + what); }

constexpr nlu::UtteranceClass kClasses[] = {nlu::UtteranceClass::preference_statement,
                                            nlu::UtteranceClass::information_seeking,
                                            nlu::UtteranceClass::action_request, nlu::UtteranceClass::other};

} // namespace

std::string_view to_string(Policy policy) {
  switch (policy) {
  case Policy::always_accept: return "always-accept";
  case Policy::always_decline: return "always-decline";
  case Policy::accept_backtracks_only: return "accept-backtracks-only";
  }
  return "always-accept";
}

Policy policy_from_string(std::string_view text) {
  if (text == "always-accept") return Policy::always_accept;
  if (text == "always-decline") return Policy::always_decline;
  if (text == "accept-backtracks-only") return Policy::accept_backtracks_only;
  malformed("unknown policy '" + std::string(text) + "'");
}

Persona persona_from_json(const json &j) {
  if (!j.is_object()) malformed("document must be an object");
  Persona p;
  try {
    p.id = j.at("id").get<std::string>();
    p.scenario_id = j.at("scenarioId").get<std::string>();
    p.description = j.value("description", "");
    p.policy = policy_from_string(j.value("policy", "always-accept"));
    p.turn_limit = j.value("turnLimit", std::size_t{60});
    for (const auto &js : j.at("script")) {
      PersonaStep step;
      if (js.contains("say")) {
        step.kind = PersonaStep::Kind::say;
        step.text = js.at("say").get<std::string>();
      } else if (js.contains("click")) {
        step.kind = PersonaStep::Kind::click;
        step.action = agent::action_from_json(js.at("click"));
      } else if (js.contains("acceptProposals")) {
        step.kind = PersonaStep::Kind::accept_proposals;
        step.policy = policy_from_string(js.at("acceptProposals").get<std::string>());
      } else {
        malformed("step needs say, click or acceptProposals: " + js.dump());
      }
      p.script.push_back(std::move(step));
    }
  } catch (const json::exception &e) {
    malformed(e.what());
  } catch (const Error &e) {
    if (e.code() == "parse_error") throw;
    malformed(e.what());
  }
  return p;
}

json persona_to_json(const Persona &p) {
  json script = json::array();
  for (const auto &s : p.script) {
    switch (s.kind) {
    case PersonaStep::Kind::say: script.push_back({{"say", s.text}}); break;
    case PersonaStep::Kind::click: script.push_back({{"click", agent::action_to_json(s.action)}}); break;
    case PersonaStep::Kind::accept_proposals: script.push_back({{"acceptProposals", to_string(s.policy)}}); break;
    }
  }
  return {{"id", p.id},           {"scenarioId", p.scenario_id}, {"description", p.description},
          {"policy", to_string(p.policy)}, {"turnLimit", p.turn_limit}, {"script", script}};
}

Persona load_persona_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open persona file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto doc = json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw Error("parse_error", path + " is not valid JSON");
  return persona_from_json(doc);
}

std::vector<Persona> load_persona_dir(const std::string &dir) {
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Persona> out;
  for (const auto &f : files) out.push_back(load_persona_file(f.string()));
  return out;
}

json metrics_to_json(const TrialMetrics &m) {
  return {{"taskSuccess", m.task_success},
          {"violationCount", m.violation_count},
          {"unpreferredSelectionCount", m.unpreferred_selection_count},
          {"turnCount", m.turn_count},
          {"utteranceCounts", m.utterance_counts},
          {"backtracks", m.backtracks},
          {"deadEndsRecorded", m.dead_ends_recorded}};
}

std::size_t compute_violations(const Path &final_path, const catalog::Scenario &scenario) {
  std::size_t unmet = 0;
  for (const auto &pref : scenario.scripted_preferences()) {
    if (!pref.hard) continue;
    const auto it = std::find_if(final_path.begin(), final_path.end(),
                                 [&](const PathSelection &s) { return s.stage_id == pref.stage_id; });
    const catalog::OptionItem *opt = it == final_path.end() ? nullptr : scenario.option(it->stage_id, it->option_id);
    if (!opt) {
      ++unmet;
      continue;
    }
    const std::span<const PathSelection> prefix(final_path.data(), static_cast<std::size_t>(it - final_path.begin()));
    if (!catalog::scripted_satisfied(scenario, pref, prefix, *opt)) ++unmet;
  }
  return unmet;
}

std::size_t compute_unpreferred(const std::vector<agent::LoggedSelection> &log, const catalog::Scenario &scenario) {
  std::size_t count = 0;
  for (const auto &entry : log) {
    const auto *opt = scenario.option(entry.choice.stage_id, entry.choice.option_id);
    if (!opt) continue;
    const bool violates = std::any_of(scenario.scripted_preferences().begin(), scenario.scripted_preferences().end(),
                                      [&](const catalog::ScriptedPreference &pref) {
                                        return pref.hard && pref.stage_id == entry.choice.stage_id &&
                                               !catalog::scripted_satisfied(scenario, pref, entry.prefix, *opt);
                                      });
    if (violates) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Oracle. Everything below reads the raw documents on purpose.

namespace {

struct OStage {
  std::string id;
  bool terminal = false;
  json specs = json::object();  // attribute name -> spec document
};

struct OOption {
  std::string id;
  json attributes = json::object();
};

struct ORecord {
  std::string id;
  bool hard = false;
  std::vector<std::string> stages;
  json compiled;
};

struct ODeadEnd {
  std::vector<std::pair<std::string, std::string>> prefix;
  std::string failed_stage;
};

class OracleModel {
public:
  explicit OracleModel(const json &doc) {
    for (const auto &js : doc.at("workflow").at("stages")) {
      OStage st;
      st.id = js.at("id").get<std::string>();
      st.terminal = js.value("uiKind", "") == "confirmation";
      for (const auto &a : js.value("attributeSpecs", json::array())) st.specs[a.at("name").get<std::string>()] = a;
      stages_.push_back(std::move(st));
    }
    const json options = doc.value("options", json::object());
    for (const auto &[stage_id, block] : options.items()) {
      auto &items = items_[stage_id];
      for (const auto &it : block.value("items", json::array())) {
        items[it.at("id").get<std::string>()] = it.value("attributes", json::object());
      }
      for (const auto &row : block.value("availability", json::array())) {
        avail_[stage_id + "|" + join(row.at("prefix"))] = row.at("ids").get<std::vector<std::string>>();
      }
    }
    for (const auto &g : doc.value("seatGrids", json::array())) grids_[join(g.at("prefix"))] = g;
  }

  const std::vector<OStage> &stages() const { return stages_; }

  // Options after a prefix of ids, in document order.
  std::vector<OOption> options_after(const std::vector<std::string> &prefix_ids) const {
    std::vector<OOption> out;
    if (prefix_ids.size() >= stages_.size()) return out;
    const OStage &st = stages_[prefix_ids.size()];
    if (st.terminal) return out;
    const std::string key = join_ids(prefix_ids);
    if (const auto g = grids_.find(key); g != grids_.end()) return blocks(g->second);
    const auto a = avail_.find(st.id + "|" + key);
    if (a == avail_.end()) return out;
    const auto &items = items_.at(st.id);
    for (const auto &id : a->second) out.push_back({id, items.at(id)});
    return out;
  }

private:
  static std::string join_ids(const std::vector<std::string> &ids) {
    std::string s;
    for (const auto &id : ids) s += "\x1f" + id;
    return s;
  }
  static std::string join(const json &ids) { return join_ids(ids.get<std::vector<std::string>>()); }

  // Free runs of 1..maxBlock seats within a row.
  static std::vector<OOption> blocks(const json &grid) {
    std::vector<OOption> out;
    const int max_block = grid.value("maxBlock", 4);
    for (const auto &row : grid.at("rows")) {
      const std::string name = row.at("row").get<std::string>();
      const std::string tiers = row.at("tiers").get<std::string>();
      const std::string taken = row.at("taken").get<std::string>();
      for (std::size_t a = 0; a < taken.size(); ++a) {
        for (std::size_t n = 1; n <= static_cast<std::size_t>(max_block) && a + n <= taken.size(); ++n) {
          if (taken[a + n - 1] == 'x') break;
          const auto premium = std::count(tiers.begin() + static_cast<long>(a), tiers.begin() + static_cast<long>(a + n), 'p');
          OOption o;
          o.id = name + std::to_string(a + 1) + (n == 1 ? "" : "-" + name + std::to_string(a + n));
          o.attributes = {{"count", static_cast<double>(n)},
                          {"tier", premium == static_cast<long>(n) ? "premium" : premium == 0 ? "standard" : "mixed"},
                          {"zone", row.at("zone")},
                          {"row", name}};
          out.push_back(std::move(o));
        }
      }
    }
    return out;
  }

  std::vector<OStage> stages_;
  std::map<std::string, std::map<std::string, json>> items_;
  std::map<std::string, std::vector<std::string>> avail_;
  std::map<std::string, json> grids_;
};

// <0, 0, >0, or nullopt when the two cannot be ordered.
std::optional<int> order(const json &a, const json &b, const json *spec) {
  if (spec && spec->value("kind", "") == "ordinal") {
    const auto ranks = spec->value("order", std::vector<std::string>{});
    if (!a.is_string() || !b.is_string()) return std::nullopt;
    const auto ra = std::find(ranks.begin(), ranks.end(), a.get<std::string>());
    const auto rb = std::find(ranks.begin(), ranks.end(), b.get<std::string>());
    if (ra == ranks.end() || rb == ranks.end()) return std::nullopt;
    return ra < rb ? -1 : ra > rb ? 1 : 0;
  }
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    return x < y ? -1 : x > y ? 1 : 0;
  }
  if (a.type() == b.type() && a == b) return 0;
  return std::nullopt;
}

bool passes(const json &c, const json &attrs, const json &specs) {
  const std::string attr = c.at("attribute").get<std::string>();
  if (!attrs.contains(attr)) return true;
  const json &v = attrs.at(attr);
  const json *spec = specs.contains(attr) ? &specs.at(attr) : nullptr;
  const std::string cmp = c.at("comparator").get<std::string>();
  const json &val = c.at("value");
  auto is = [&](const json &x, int want) {
    const auto r = order(v, x, spec);
    if (!r) return false;
    return want == 0 ? *r == 0 : want < 0 ? *r <= 0 : *r >= 0;
  };
  if (cmp == "eq") return is(val, 0);
  if (cmp == "neq") return !is(val, 0);
  if (cmp == "le") return is(val, -1);
  if (cmp == "ge") return is(val, 1);
  if (cmp == "between") return is(val.at(0), 1) && is(val.at(1), -1);
  if (cmp == "inSet") return std::any_of(val.begin(), val.end(), [&](const json &x) { return is(x, 0); });
  if (cmp == "predicate") {
    const std::string name = val.at("name").get<std::string>();
    const json &arg = val.at("args").at(0);
    if (name == "adjacentSeats" || name == "countIs") return is(arg, 0);
    if (name == "tierIs") return v == arg;
    if (name == "startsAfter") return is(arg, 1) && !is(arg, 0);
    if (name == "endsBy") return is(arg, -1);
  }
  return false;
}

bool applies(const ORecord &r, const OStage &st) {
  return std::find(r.stages.begin(), r.stages.end(), st.id) != r.stages.end() &&
         st.specs.contains(r.compiled.at("attribute").get<std::string>());
}

using Sel = std::pair<std::string, std::string>;

std::string key_of(const std::vector<Sel> &prefix) {
  std::string s;
  for (const auto &p : prefix) s += (s.empty() ? "" : "/") + p.second;
  return s;
}

} // namespace

std::optional<std::size_t> OracleResult::alternative_count(std::span<const PathSelection> prefix,
                                                           const std::string &selection) const {
  const auto it = per_prefix_viable.find(prefix_key(prefix));
  if (it == per_prefix_viable.end()) return std::nullopt;
  const auto &ids = it->second;
  return ids.size() - static_cast<std::size_t>(std::count(ids.begin(), ids.end(), selection));
}

OracleResult brute_force_oracle(const catalog::Scenario &scenario, const std::vector<prefs::PreferenceRecord> &records,
                                const nav::DeadEnds &dead_ends, std::size_t limit) {
  const OracleModel model(scenario.document());
  std::vector<ORecord> hard, soft;
  for (const auto &r : records) {
    const json j = prefs::record_to_json(r);
    if (!j.value("active", true)) continue;
    ORecord o{j.at("id").get<std::string>(), j.at("strength") == "hard",
              j.at("relevantStages").get<std::vector<std::string>>(), j.at("compiled")};
    (o.hard ? hard : soft).push_back(std::move(o));
  }
  std::vector<ODeadEnd> blocked;
  for (const auto &jd : nav::dead_ends_to_json(dead_ends)) {
    ODeadEnd d;
    d.failed_stage = jd.at("failedStage").get<std::string>();
    for (const auto &p : jd.at("prefix")) d.prefix.emplace_back(p.at("stageId").get<std::string>(), p.at("optionId").get<std::string>());
    blocked.push_back(std::move(d));
  }

  const auto &stages = model.stages();
  std::size_t depth = 0;
  while (depth < stages.size() && !stages[depth].terminal) ++depth;

  OracleResult out;
  std::vector<Sel> prefix;
  std::vector<std::string> ids;
  std::size_t full_paths = 0;

  std::function<void(bool)> walk = [&](bool feasible_so_far) {
    if (prefix.size() == depth) {
      if (++full_paths > limit) throw Error("scale_guard", "more than " + std::to_string(limit) + " full paths");
      if (feasible_so_far) {
        Path p;
        for (const auto &[s, o] : prefix) p.push_back({s, o});
        out.feasible_paths.push_back(std::move(p));
      }
      return;
    }
    const OStage &st = stages[prefix.size()];
    auto &viable = out.per_prefix_viable[key_of(prefix)];
    for (const auto &opt : model.options_after(ids)) {
      const bool ok = std::all_of(hard.begin(), hard.end(), [&](const ORecord &r) {
        return !applies(r, st) || passes(r.compiled, opt.attributes, st.specs);
      });
      if (ok) {
        auto extended = prefix;
        extended.emplace_back(st.id, opt.id);
        const bool dead = std::any_of(blocked.begin(), blocked.end(), [&](const ODeadEnd &d) {
          if (d.prefix.empty() || d.prefix.size() > extended.size()) return false;
          if (!std::equal(d.prefix.begin(), d.prefix.end(), extended.begin())) return false;
          return std::none_of(extended.begin(), extended.end(), [&](const Sel &x) { return x.first == d.failed_stage; });
        });
        if (!dead) viable.push_back(opt.id);
      }
      prefix.emplace_back(st.id, opt.id);
      ids.push_back(opt.id);
      walk(feasible_so_far && ok);
      prefix.pop_back();
      ids.pop_back();
    }
  };
  walk(true);

  // Soft records rank feasible paths lexicographically, in record order.
  auto score = [&](const Path &p) {
    std::vector<double> key;
    for (const auto &r : soft) {
      double k = std::numeric_limits<double>::max();
      for (std::size_t i = 0; i < p.size(); ++i) {
        const OStage &st = stages[i];
        if (!applies(r, st)) continue;
        const auto opts = model.options_after([&] {
          std::vector<std::string> pre;
          for (std::size_t j = 0; j < i; ++j) pre.push_back(p[j].option_id);
          return pre;
        }());
        const auto it = std::find_if(opts.begin(), opts.end(), [&](const OOption &o) { return o.id == p[i].option_id; });
        const std::string attr = r.compiled.at("attribute").get<std::string>();
        if (it == opts.end() || !it->attributes.contains(attr)) break;
        const json &v = it->attributes.at(attr);
        if (r.compiled.contains("direction")) {
          double x = 0;
          const json &spec = st.specs.at(attr);
          if (spec.value("kind", "") == "ordinal") {
            const auto ranks = spec.value("order", std::vector<std::string>{});
            x = static_cast<double>(std::find(ranks.begin(), ranks.end(), v.get<std::string>()) - ranks.begin());
          } else if (v.is_number()) {
            x = v.get<double>();
          }
          k = r.compiled.at("direction") == "minimize" ? x : -x;
        } else {
          const json &set = r.compiled.at("preferSet");
          k = std::find(set.begin(), set.end(), v) != set.end() ? 0 : 1;
        }
        break;
      }
      key.push_back(k);
    }
    return key;
  };
  std::optional<std::vector<double>> best;
  for (const auto &p : out.feasible_paths) {
    auto k = score(p);
    if (!best || k < *best) {
      best = std::move(k);
      out.optimal_path = p;
    }
  }
  return out;
}

std::map<std::string, std::size_t> oracle_counts(const catalog::Scenario &scenario, const agent::SessionState &session) {
  const auto result = brute_force_oracle(scenario, session.memory.active(), session.dead_ends);
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < session.path.size(); ++i) {
    const auto c = result.alternative_count(std::span(session.path).first(i), session.path[i].option_id);
    if (c) out[session.path[i].stage_id] = *c;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool has_error_message(const std::vector<agent::AgentEvent> &events) {
  return std::any_of(events.begin(), events.end(), [](const agent::AgentEvent &e) {
    return e.kind == agent::EventKind::message && e.payload.value("tone", "") == "error";
  });
}

json turn_record(const agent::Turn &t) {
  json events = json::array();
  for (const auto &e : t.events) events.push_back(agent::event_to_json(e));
  return {{"type", "turn"}, {"index", t.index}, {"timestamp", t.timestamp}, {"input", t.user_input}, {"events", events}};
}

} // namespace

TrialResult run_trial(const catalog::ScenarioPtr &scenario, const Persona &persona, const TrialOptions &options) {
  auto provider = std::make_shared<nlu::RulesProvider>();
  agent::AgentConfig config;
  config.mode = options.mode;
  config.clock = agent::logical_clock();
  const agent::Agent engine(scenario, provider, config);
  const std::size_t limit = options.turn_limit.value_or(persona.turn_limit);

  TrialResult result;
  result.transcript.push_back({{"type", "header"},
                               {"scenarioId", scenario->brief().id},
                               {"persona", persona_to_json(persona)},
                               {"mode", agent::to_string(options.mode)},
                               {"turnLimit", limit}});

  agent::SessionState s = engine.start("trial:" + persona.id);
  std::size_t turns = 0;
  std::map<std::string, std::size_t> classes;
  for (const auto c : kClasses) classes[std::string(nlu::to_string(c))] = 0;

  auto observe = [&] {
    if (options.observer) options.observer(s);
  };
  auto after_turn = [&] {
    ++turns;
    if (options.restore_after && turns == *options.restore_after) s = agent::restore(json::parse(agent::snapshot(s).dump()));
    observe();
  };
  auto say = [&](const std::string &text) {
    nlu::Context ctx;
    ctx.scenario = scenario.get();
    const auto cls = provider->classify_only({text, static_cast<int>(s.history.size()), nlu::Channel::chat}, &ctx);
    ++classes[std::string(nlu::to_string(cls))];
    engine.handle_user_message(s, text);
    after_turn();
  };
  auto click = [&](const agent::GuiAction &a) {
    const auto events = engine.handle_gui_action(s, a);
    after_turn();
    return !has_error_message(events);
  };

  Policy policy = persona.policy;
  auto respond = [&] {
    while (s.pending && !s.submitted && turns < limit) {
      const bool backtrack = s.pending->kind == agent::ProposalKind::backtrack;
      const bool accept = policy == Policy::always_accept || (policy == Policy::accept_backtracks_only && backtrack);
      say(accept ? "yes" : "no");
    }
  };

  observe();
  respond();
  for (std::size_t i = 0; i < persona.script.size() && !s.submitted && turns < limit; ++i) {
    const auto &step = persona.script[i];
    switch (step.kind) {
    case PersonaStep::Kind::accept_proposals: policy = step.policy; break;
    case PersonaStep::Kind::say: say(step.text); break;
    case PersonaStep::Kind::click:
      if (!click(step.action)) {
        result.valid = false;
        result.error_step = i;
        result.protocol_error = "step " + std::to_string(i) + " was rejected: " + agent::action_to_json(step.action).dump();
      }
      break;
    }
    if (!result.valid) break;
    respond();
  }

  for (const auto &t : s.history) result.transcript.push_back(turn_record(t));

  TrialMetrics &m = result.metrics;
  m.task_success = s.submitted && s.path == scenario->solution() ? 1 : 0;
  m.violation_count = compute_violations(s.path, *scenario);
  m.unpreferred_selection_count = compute_unpreferred(s.selection_log, *scenario);
  m.turn_count = turns;
  m.utterance_counts = classes;
  m.backtracks = s.backtracks;
  m.dead_ends_recorded = s.dead_ends_recorded;

  json footer = {{"type", "result"},
                 {"valid", result.valid},
                 {"submitted", s.submitted},
                 {"finalPath", path_to_json(s.path)},
                 {"metrics", metrics_to_json(m)}};
  if (result.error_step) footer["errorStep"] = *result.error_step;
  if (!result.protocol_error.empty()) footer["protocolError"] = result.protocol_error;
  result.transcript.push_back(std::move(footer));
  result.final_state = std::move(s);
  return result;
}

std::string transcript_jsonl(const std::vector<json> &transcript) {
  std::string out;
  for (const auto &line : transcript) out += line.dump() + "\n";
  return out;
}

std::vector<json> parse_transcript(const std::string &text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error("parse_error", "transcript line " + std::to_string(n) + " is not a JSON object");
    out.push_back(std::move(j));
  }
  return out;
}

std::string metrics_header() {
  std::string h = "scenario\tpersona\tmode\ttaskSuccess\tviolationCount\tunpreferredSelectionCount\tturnCount";
  for (const auto c : kClasses) h += "\tutterances." + std::string(nlu::to_string(c));
  return h + "\tbacktracks\tdeadEndsRecorded";
}

std::string metrics_row(const std::string &scenario_id, const std::string &persona_id, agent::Mode mode,
                        const TrialMetrics &m) {
  std::string row = scenario_id + "\t" + persona_id + "\t" + std::string(agent::to_string(mode));
  for (const auto v : {static_cast<std::size_t>(m.task_success), m.violation_count, m.unpreferred_selection_count, m.turn_count}) {
    row += "\t" + std::to_string(v);
  }
  for (const auto c : kClasses) {
    const auto it = m.utterance_counts.find(std::string(nlu::to_string(c)));
    row += "\t" + std::to_string(it == m.utterance_counts.end() ? 0 : it->second);
  }
  return row + "\t" + std::to_string(m.backtracks) + "\t" + std::to_string(m.dead_ends_recorded);
}

ReplayReport replay(const catalog::ScenarioPtr &scenario, const std::vector<json> &transcript) {
  if (transcript.empty() || transcript.front().value("type", "") != "header") {
    throw Error("parse_error", "transcript does not start with a header record");
  }
  const json &header = transcript.front();
  TrialOptions opts;
  try {
    opts.mode = agent::mode_from_string(header.at("mode").get<std::string>());
    opts.turn_limit = header.at("turnLimit").get<std::size_t>();
  } catch (const json::exception &e) {
    throw Error("parse_error", std::string("transcript header: ") + e.what());
  }
  const Persona persona = persona_from_json(header.at("persona"));
  const auto fresh = run_trial(scenario, persona, opts).transcript;

  ReplayReport r;
  const std::size_t n = std::min(fresh.size(), transcript.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (fresh[i] == transcript[i]) {
      ++r.verified_lines;
      continue;
    }
    r.divergent_line = i;
    const json &a = transcript[i], &b = fresh[i];
    if (a.value("type", "") == "turn" && b.value("type", "") == "turn" && a.contains("events") && b.contains("events")) {
      const auto &ea = a["events"], &eb = b["events"];
      const std::size_t m = std::min(ea.size(), eb.size());
      std::size_t k = 0;
      while (k < m && ea[k] == eb[k]) ++k;
      if (k < m || ea.size() != eb.size()) {
        r.divergent_event = k;
        r.detail = "recorded " + (k < ea.size() ? ea[k].dump() : std::string("<none>")) + "\nre-run   " +
                   (k < eb.size() ? eb[k].dump() : std::string("<none>"));
      } else {
        r.detail = "turn input or timestamp differs";
      }
    } else {
      r.detail = "recorded " + a.dump() + "\nre-run   " + b.dump();
    }
    return r;
  }
  if (transcript.size() > fresh.size()) {
    r.divergent_line = n;
    r.detail = "transcript has " + std::to_string(transcript.size() - n) + " line(s) the re-run does not produce";
    return r;
  }
  r.missing_lines = fresh.size() - transcript.size();
  r.identical = r.missing_lines == 0;
  if (!r.identical) r.detail = std::to_string(r.missing_lines) + " line(s) absent from the transcript";
  return r;
}

} // namespace maestro::harness
