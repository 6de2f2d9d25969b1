#include "maestro/agent.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>

namespace maestro::agent {

using catalog::OptionItem;
using catalog::StageDef;
using prefs::PreferenceRecord;

namespace {

std::string join_and(const std::vector<std::string> &parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += i + 1 == parts.size() ? (parts.size() > 2 ? ", and " : " and ") : ", ";
    out += parts[i];
  }
  return out;
}

void add_unique(std::vector<std::string> &into, const std::vector<std::string> &ids) {
  for (const auto &id : ids) {
    if (std::find(into.begin(), into.end(), id) == into.end()) into.push_back(id);
  }
}

bool contains(const std::vector<std::string> &v, const std::string &x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::string iso_time(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json pending_to_json(const std::optional<PendingProposal> &p) {
  if (!p) return nullptr;
  return {{"kind", p->kind == ProposalKind::backtrack ? "backtrack" : "confirmSelection"},
          {"stageId", p->stage_id},
          {"optionId", p->option_id},
          {"conflictStage", p->conflict_stage},
          {"blockingPreferenceIds", p->blocking_preference_ids},
          {"reason", p->reason}};
}

std::optional<PendingProposal> pending_from_json(const json &j) {
  if (j.is_null()) return std::nullopt;
  PendingProposal p;
  p.kind = j.at("kind") == "backtrack" ? ProposalKind::backtrack : ProposalKind::confirm_selection;
  p.stage_id = j.at("stageId").get<std::string>();
  p.option_id = j.value("optionId", "");
  p.conflict_stage = j.value("conflictStage", "");
  p.blocking_preference_ids = j.value("blockingPreferenceIds", std::vector<std::string>{});
  p.reason = j.value("reason", "");
  return p;
}

json selection_log_to_json(const std::vector<LoggedSelection> &log) {
  json out = json::array();
  for (const auto &e : log) {
    out.push_back({{"prefix", path_to_json(e.prefix)}, {"stageId", e.choice.stage_id}, {"optionId", e.choice.option_id}});
  }
  return out;
}

json turn_to_json(const Turn &t) {
  json events = json::array();
  for (const auto &e : t.events) events.push_back(event_to_json(e));
  return {{"index", t.index}, {"userInput", t.user_input}, {"events", events}, {"timestamp", t.timestamp}};
}

Turn turn_from_json(const json &j) {
  Turn t;
  t.index = j.at("index").get<int>();
  t.user_input = j.at("userInput");
  for (const auto &e : j.at("events")) t.events.push_back(event_from_json(e));
  t.timestamp = j.value("timestamp", "");
  return t;
}

} // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
  case EventKind::message: return "message";
  case EventKind::adaptation: return "adaptation";
  case EventKind::gui_snapshot: return "guiSnapshot";
  case EventKind::confirmation_ask: return "confirmationAsk";
  case EventKind::backtrack_proposal: return "backtrackProposal";
  case EventKind::stage_transition: return "stageTransition";
  case EventKind::submission: return "submission";
  }
  return "message";
}

EventKind event_kind_from_string(std::string_view text) {
  for (auto k : {EventKind::message, EventKind::adaptation, EventKind::gui_snapshot, EventKind::confirmation_ask,
                 EventKind::backtrack_proposal, EventKind::stage_transition, EventKind::submission}) {
    if (to_string(k) == text) return k;
  }
  throw Error("parse_error", "unknown event kind '" + std::string(text) + "'");
}

json event_to_json(const AgentEvent &e) { return {{"index", e.index}, {"kind", to_string(e.kind)}, {"payload", e.payload}}; }

AgentEvent event_from_json(const json &j) {
  AgentEvent e;
  e.index = j.at("index").get<std::size_t>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.payload = j.value("payload", json::object());
  return e;
}

std::string_view to_string(Mode mode) { return mode == Mode::baseline ? "baseline" : "maestro"; }

Mode mode_from_string(std::string_view text) {
  if (text == "maestro") return Mode::maestro;
  if (text == "baseline") return Mode::baseline;
  throw Error("bad_request", "unknown mode '" + std::string(text) + "'");
}

std::string_view to_string(GuiAction::Kind kind) {
  switch (kind) {
  case GuiAction::Kind::select: return "select";
  case GuiAction::Kind::next: return "continue";
  case GuiAction::Kind::back: return "back";
  case GuiAction::Kind::show_all: return "showAll";
  case GuiAction::Kind::submit: return "submit";
  }
  return "select";
}

json action_to_json(const GuiAction &a) {
  json params = json::object();
  if (a.kind == GuiAction::Kind::select) params["optionId"] = a.option_id;
  if (a.kind == GuiAction::Kind::back && !a.target_stage.empty()) params["targetStage"] = a.target_stage;
  return {{"kind", to_string(a.kind)}, {"params", params}};
}

GuiAction action_from_json(const json &j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw Error("bad_request", "action needs a kind");
  const std::string kind = j["kind"].get<std::string>();
  const json params = j.value("params", json::object());
  GuiAction a;
  if (kind == "select") {
    a.kind = GuiAction::Kind::select;
    if (!params.contains("optionId") || !params["optionId"].is_string()) throw Error("bad_request", "select needs params.optionId");
    a.option_id = params["optionId"].get<std::string>();
  } else if (kind == "continue") {
    a.kind = GuiAction::Kind::next;
  } else if (kind == "back") {
    a.kind = GuiAction::Kind::back;
    a.target_stage = params.value("targetStage", "");
  } else if (kind == "showAll") {
    a.kind = GuiAction::Kind::show_all;
  } else if (kind == "submit") {
    a.kind = GuiAction::Kind::submit;
  } else {
    throw Error("bad_request", "unknown action kind '" + kind + "'");
  }
  return a;
}

Clock system_clock() {
  return [](int) { return iso_time(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())); };
}

Clock logical_clock() {
  return [](int turn) { return iso_time(static_cast<std::time_t>(1767225600 + turn)); };
}

struct Agent::TurnCtx {
  SessionState s;
  int turn_index = 0;
  std::vector<AgentEvent> events;

  void emit(EventKind kind, json payload) { events.push_back({s.next_event_index++, kind, std::move(payload)}); }
  void say(const std::string &text, const std::string &tone = "info") {
    emit(EventKind::message, {{"text", text}, {"tone", tone}});
  }
};

Agent::Agent(catalog::ScenarioPtr scenario, std::shared_ptr<nlu::Provider> provider, AgentConfig config,
             const Templates &templates)
    : scenario_(std::move(scenario)), provider_(std::move(provider)), config_(std::move(config)), templates_(templates) {
  if (!scenario_) throw Error("invalid_config", "agent needs a scenario");
  if (!provider_) provider_ = std::make_shared<nlu::RulesProvider>();
  if (!config_.clock) config_.clock = system_clock();
}

std::vector<PreferenceRecord> Agent::stage_records(const SessionState &s, const std::string &stage_id) const {
  return s.memory.records_for_stage(stage_id, scenario_->workflow());
}

adapt::AdaptedView Agent::compute_view(const SessionState &s, const StageDef &stage, std::span<const PathSelection> prefix,
                                       adapt::Plan *plan_out) const {
  const auto options = catalog::options_at(*scenario_, prefix);
  adapt::Plan plan;
  if (s.mode == Mode::maestro) plan = adapt::plan_adaptations(stage, options, stage_records(s, stage.id), templates_);
  auto view = adapt::apply(stage, options, plan.actions);
  if (plan_out) *plan_out = std::move(plan);
  return view;
}

std::string Agent::label_of(const std::string &stage_id, const std::string &option_id) const {
  const auto *o = scenario_->option(stage_id, option_id);
  return o ? o->label : option_id;
}

void Agent::refresh_ledger(SessionState &s) const {
  s.ledger.entries.clear();
  if (s.mode == Mode::baseline) return;
  const auto &wf = scenario_->workflow();
  for (std::size_t k = 0; k < s.path.size(); ++k) {
    const StageDef &stage = *wf.stage(s.path[k].stage_id);
    const std::span<const PathSelection> prefix(s.path.data(), k);
    const auto view = compute_view(s, stage, prefix);
    s.ledger = nav::record_alternatives(std::move(s.ledger), stage, view, s.path[k].option_id, prefix, s.dead_ends);
  }
}

std::vector<AgentEvent> Agent::run_turn(SessionState &session, json user_input,
                                        const std::function<void(TurnCtx &)> &body) const {
  TurnCtx t{session, session.history.empty() ? 0 : session.history.back().index + 1, {}};
  try {
    if (session.submitted) throw Error("conflict", "the booking is already submitted");
    body(t);
  } catch (const Error &e) {
    t = TurnCtx{session, t.turn_index, {}};
    t.say(templates_.render("messages", "illegal", {{"reason", e.what()}}), "error");
  }
  Turn turn;
  turn.index = t.turn_index;
  turn.user_input = std::move(user_input);
  turn.events = t.events;
  turn.timestamp = config_.clock(t.turn_index);
  t.s.history.push_back(std::move(turn));
  session = std::move(t.s);
  return std::move(t.events);
}

SessionState Agent::start(const std::string &session_id) const {
  SessionState s;
  s.session_id = session_id;
  s.scenario_id = scenario_->brief().id;
  s.mode = config_.mode;
  s.current_stage = scenario_->workflow().stages.front().id;
  run_turn(s, {{"kind", "start"}}, [&](TurnCtx &t) { enter_stage(t); });
  return s;
}

void Agent::enter_stage(TurnCtx &t) const {
  auto &s = t.s;
  const StageDef *stage = scenario_->stage_after(s.path);
  s.current_stage = stage->id;
  s.selected.reset();
  s.pending.reset();
  refresh_ledger(s);
  if (stage->is_terminal()) {
    s.current_view = adapt::AdaptedView{};
    s.current_view.stage_id = stage->id;
    t.emit(EventKind::gui_snapshot, {{"stageId", stage->id}, {"view", adapt::view_to_json(s.current_view)},
                                     {"path", path_to_json(s.path)}, {"selected", nullptr}});
    std::vector<std::string> labels;
    for (const auto &p : s.path) labels.push_back(label_of(p.stage_id, p.option_id));
    std::string summary;
    for (std::size_t i = 0; i < labels.size(); ++i) summary += (i ? ", " : "") + labels[i];
    t.say(templates_.render("messages", "summary", {{"summary", summary}}));
    return;
  }
  adapt::Plan plan;
  compute_view(s, *stage, s.path, &plan);
  if (s.mode == Mode::maestro && !plan.actions.empty()) {
    replan(t, true);
    follow_up(t);
  } else {
    elicit_on_stage_entry(t);
  }
}

void Agent::elicit_on_stage_entry(TurnCtx &t) const {
  auto &s = t.s;
  const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
  s.current_view = compute_view(s, stage, s.path);
  t.emit(EventKind::gui_snapshot, {{"stageId", stage.id}, {"view", adapt::view_to_json(s.current_view)},
                                   {"path", path_to_json(s.path)}, {"selected", nullptr}});
  if (s.mode == Mode::baseline) {
    follow_up(t);
    return;
  }
  // Back from a dead end: steer toward what is left rather than ask again.
  if (nav::viable_ids(s.current_view, s.path, s.dead_ends).size() < adapt::candidate_ids(s.current_view).size()) {
    follow_up(t);
    return;
  }
  t.say(templates_.elicitation(stage.id));
}

void Agent::replan(TurnCtx &t, bool emit_actions) const {
  auto &s = t.s;
  const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
  adapt::Plan plan;
  s.current_view = compute_view(s, stage, s.path, &plan);
  if (emit_actions && s.mode == Mode::maestro) {
    for (const auto &a : plan.actions) {
      json payload = adapt::action_to_json(a);
      payload["stageId"] = stage.id;
      t.emit(EventKind::adaptation, std::move(payload));
    }
  }
  if (s.selected && !contains(adapt::candidate_ids(s.current_view), *s.selected)) {
    bool visible = std::any_of(s.current_view.visible.begin(), s.current_view.visible.end(),
                               [&](const OptionItem &o) { return o.id == *s.selected; });
    if (!visible) s.selected.reset();
  }
  refresh_ledger(s);
  t.emit(EventKind::gui_snapshot, {{"stageId", stage.id}, {"view", adapt::view_to_json(s.current_view)},
                                   {"path", path_to_json(s.path)},
                                   {"selected", s.selected ? json(*s.selected) : json(nullptr)}});
}

void Agent::follow_up(TurnCtx &t) const {
  auto &s = t.s;
  const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
  const std::string nouns = templates_.noun(stage.id, true);
  const auto &view = s.current_view;

  if (s.mode == Mode::baseline) {
    std::vector<std::string> listing;
    for (const auto &o : view.visible) listing.push_back(o.label);
    t.say(templates_.render("messages", "baseline", {{"nouns", nouns}, {"listing", join_and(listing)}}));
    return;
  }

  if (auto conflict = nav::detect_conflict(stage, view, s.path, s.dead_ends)) {
    std::vector<std::string> reqs;
    for (const auto &id : conflict->blocking_preference_ids) {
      const auto *r = s.memory.find(id);
      if (!r) continue;
      const auto *c = std::get_if<prefs::Constraint>(&r->compiled);
      const auto *st = scenario_->workflow().stage(s.current_stage);
      reqs.push_back(c ? prefs::describe(*c, st ? st->spec(c->attribute) : nullptr) : r->description);
    }
    const std::string requirements = reqs.empty() ? "your preferences" : join_and(reqs);
    const auto suggestion = nav::suggest_backtrack(s.ledger, s.path, conflict);
    std::string text = templates_.render("messages", "conflict", {{"nouns", nouns}, {"requirements", requirements}});
    if (const auto *bp = std::get_if<nav::BacktrackProposal>(&suggestion)) {
      const std::string target_title = scenario_->workflow().stage(bp->target_stage_id)->title;
      text += " " + templates_.render("messages", "backtrack",
                                      {{"target", target_title},
                                       {"count", std::to_string(bp->alternatives)},
                                       {"plural", bp->alternatives == 1 ? "" : "s"}});
      if (contains(s.declined_backtracks, bp->target_stage_id)) text += templates_.render("messages", "backtrack.repeat");
      PendingProposal p;
      p.kind = ProposalKind::backtrack;
      p.stage_id = bp->target_stage_id;
      p.conflict_stage = stage.id;
      p.blocking_preference_ids = conflict->blocking_preference_ids;
      p.reason = conflict->reason;
      s.pending = p;
      t.say(text);
      t.emit(EventKind::backtrack_proposal, {{"targetStageId", bp->target_stage_id},
                                             {"alternatives", bp->alternatives},
                                             {"conflictStageId", stage.id},
                                             {"reason", conflict->reason},
                                             {"blockingPreferenceIds", conflict->blocking_preference_ids}});
    } else {
      std::vector<std::string> all;
      for (const auto &r : s.memory.active()) {
        if (r.hard()) all.push_back(r.description);
      }
      text += " " + templates_.render("messages", "infeasible", {{"requirements", all.empty() ? requirements : join_and(all)}});
      t.say(text);
    }
    return;
  }

  const auto viable = nav::viable_ids(view, s.path, s.dead_ends);
  std::map<std::string, int> score;
  bool has_sort = false;
  for (const auto &a : view.applied_actions) {
    if (a.kind == adapt::ActionKind::sort) has_sort = true;
    if (a.kind != adapt::ActionKind::highlight || a.intent != adapt::Intent::emphasize) continue;
    for (const auto &id : a.option_ids) ++score[id];
  }
  std::optional<std::string> top;
  int best = 0;
  for (const auto &id : viable) {
    if (score[id] > best) {
      best = score[id];
      top = id;
    }
  }
  if (!top && (viable.size() == 1 || has_sort)) top = viable.front();

  if (!top) {
    t.say(templates_.render("messages", "choose", {{"nouns", nouns}}));
    return;
  }
  std::vector<std::string> others, other_labels;
  for (const auto &id : viable) {
    if (id == *top) continue;
    others.push_back(id);
    other_labels.push_back(view.labels.count(id) ? label_of(stage.id, id) : id);
  }
  const std::string top_label = label_of(stage.id, *top);
  std::string also;
  if (!others.empty()) {
    also = templates_.render("messages", "proposal.also",
                             {{"others", join_and(other_labels)}, {"verb", others.size() == 1 ? "is" : "are"}});
  }
  t.say(templates_.render("messages", "proposal", {{"top", top_label}, {"also", also}}));
  PendingProposal p;
  p.kind = ProposalKind::confirm_selection;
  p.stage_id = stage.id;
  p.option_id = *top;
  s.pending = p;
  t.emit(EventKind::confirmation_ask, {{"stageId", stage.id}, {"optionId", *top}, {"label", top_label}, {"alternatives", others}});
}

void Agent::do_select(TurnCtx &t, const std::string &option_id) const {
  auto &s = t.s;
  const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
  if (stage.is_terminal()) throw Error("illegal_action", "there is nothing to select at the " + stage.title + " step");
  const auto options = catalog::options_at(*scenario_, s.path);
  const auto it = std::find_if(options.begin(), options.end(), [&](const OptionItem &o) { return o.id == option_id; });
  if (it == options.end()) {
    t.say(templates_.render("messages", "unavailable", {{"label", label_of(stage.id, option_id)}}), "error");
    return;
  }
  const auto &visible = s.current_view.visible;
  if (std::none_of(visible.begin(), visible.end(), [&](const OptionItem &o) { return o.id == option_id; })) {
    t.say(templates_.render("messages", "hidden", {{"label", it->label}}), "error");
    return;
  }
  s.selected = option_id;
  s.pending.reset();
  s.selection_log.push_back({s.path, {stage.id, option_id}});
  t.emit(EventKind::gui_snapshot, {{"stageId", stage.id}, {"view", adapt::view_to_json(s.current_view)},
                                   {"path", path_to_json(s.path)}, {"selected", option_id}});
  t.say(templates_.render("messages", "selected", {{"label", it->label}}));
  if (s.mode != Mode::maestro) return;
  std::vector<std::string> unmet;
  for (const auto &r : stage_records(s, stage.id)) {
    if (!r.hard()) continue;
    const auto &c = std::get<prefs::Constraint>(r.compiled);
    const auto *spec = stage.spec(c.attribute);
    if (!spec && c.comparator != prefs::Comparator::predicate) continue;
    if (!prefs::satisfies(c, *it, spec)) unmet.push_back(prefs::describe(c, spec));
  }
  if (!unmet.empty()) {
    t.say(templates_.render("messages", "violation", {{"label", it->label}, {"requirements", join_and(unmet)}}), "warning");
  }
}

void Agent::do_continue(TurnCtx &t) const {
  auto &s = t.s;
  const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
  if (stage.is_terminal()) throw Error("illegal_action", "the booking is complete; submit it to finish");
  if (!s.selected) {
    t.say(templates_.render("messages", "noSelection"), "error");
    return;
  }
  const std::string from = stage.id;
  s.path.push_back({stage.id, *s.selected});
  s.selected.reset();
  s.pending.reset();
  const StageDef *next = scenario_->stage_after(s.path);
  t.emit(EventKind::stage_transition, {{"from", from}, {"to", next->id}, {"path", path_to_json(s.path)}});
  enter_stage(t);
}

void Agent::do_back(TurnCtx &t, const std::string &target_in) const {
  auto &s = t.s;
  if (s.path.empty()) throw Error("illegal_action", "this is already the first step");
  const std::string target = target_in.empty() ? s.path.back().stage_id : target_in;
  if (s.pending && s.pending->kind == ProposalKind::backtrack && s.pending->stage_id == target) {
    accept_backtrack(t);
    return;
  }
  nav::NavigationState nav{s.path, s.ledger, s.dead_ends};
  nav = nav::navigate_back(std::move(nav), target, scenario_->workflow());
  const std::string from = s.current_stage;
  s.path = std::move(nav.path);
  s.pending.reset();
  t.emit(EventKind::stage_transition, {{"from", from}, {"to", target}, {"path", path_to_json(s.path)}});
  t.say(templates_.render("messages", "back", {{"stage", scenario_->workflow().stage(target)->title}}));
  enter_stage(t);
}

void Agent::accept_backtrack(TurnCtx &t) const {
  auto &s = t.s;
  const PendingProposal p = *s.pending;
  const auto &wf = scenario_->workflow();
  const int target_idx = wf.index_of(p.stage_id);

  // The path that hit the conflict, and the target's selection itself: every
  // stage in between had no alternatives left, so the whole subtree under it
  // is spent.
  std::vector<std::string> subtree_ids = p.blocking_preference_ids;
  for (std::size_t k = static_cast<std::size_t>(target_idx) + 1; k < s.path.size(); ++k) {
    if (const auto it = s.ledger.entries.find(s.path[k].stage_id); it != s.ledger.entries.end()) {
      add_unique(subtree_ids, it->second.linked_preference_ids);
    }
  }
  const std::span<const PathSelection> through_target(s.path.data(), static_cast<std::size_t>(target_idx) + 1);
  for (const auto &r : s.dead_ends) {
    if (r.prefix.size() >= through_target.size() && std::equal(through_target.begin(), through_target.end(), r.prefix.begin())) {
      add_unique(subtree_ids, r.linked_preference_ids);
    }
  }
  const std::size_t before = s.dead_ends.size();
  s.dead_ends = nav::record_dead_end(std::move(s.dead_ends), s.path, p.conflict_stage, p.blocking_preference_ids, p.reason, wf);
  s.dead_ends = nav::record_dead_end(std::move(s.dead_ends), s.path, wf.stages[static_cast<std::size_t>(target_idx) + 1].id,
                                     subtree_ids, "no remaining combination below this selection works", wf);
  s.dead_ends_recorded += s.dead_ends.size() - std::min(before, s.dead_ends.size());
  ++s.backtracks;
  s.pending.reset();

  nav::NavigationState nav{s.path, s.ledger, s.dead_ends};
  nav = nav::navigate_back(std::move(nav), p.stage_id, wf);
  const std::string from = s.current_stage;
  s.path = std::move(nav.path);
  t.emit(EventKind::stage_transition, {{"from", from}, {"to", p.stage_id}, {"path", path_to_json(s.path)}, {"backtrack", true}});
  t.say(templates_.render("messages", "back", {{"stage", wf.stage(p.stage_id)->title}}));
  enter_stage(t);
}

void Agent::do_show_all(TurnCtx &t) const {
  auto &s = t.s;
  const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
  if (stage.is_terminal()) throw Error("illegal_action", "there are no options to reveal at the " + stage.title + " step");
  s.current_view = adapt::show_all(s.current_view);
  t.emit(EventKind::gui_snapshot, {{"stageId", stage.id}, {"view", adapt::view_to_json(s.current_view)},
                                   {"path", path_to_json(s.path)},
                                   {"selected", s.selected ? json(*s.selected) : json(nullptr)}});
  t.say(templates_.render("messages", "showAll", {{"nouns", templates_.noun(stage.id, true)}}));
}

void Agent::do_submit(TurnCtx &t) const {
  auto &s = t.s;
  const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
  if (!stage.is_terminal()) throw Error("illegal_action", "the booking can only be submitted at the final step");
  std::string summary;
  for (const auto &p : s.path) summary += (summary.empty() ? "" : ", ") + label_of(p.stage_id, p.option_id);
  s.submitted = true;
  s.pending.reset();
  t.emit(EventKind::submission, {{"path", path_to_json(s.path)}, {"summary", summary}});
  t.say(templates_.render("messages", "submitted", {{"summary", summary}}));
}

void Agent::dispatch(TurnCtx &t, const GuiAction &a) const {
  switch (a.kind) {
  case GuiAction::Kind::select: do_select(t, a.option_id); break;
  case GuiAction::Kind::next: do_continue(t); break;
  case GuiAction::Kind::back: do_back(t, a.target_stage); break;
  case GuiAction::Kind::show_all: do_show_all(t); break;
  case GuiAction::Kind::submit: do_submit(t); break;
  }
}

std::vector<AgentEvent> Agent::handle_gui_action(SessionState &session, const GuiAction &action) const {
  json input = {{"channel", "gui"}, {"action", action_to_json(action)}};
  return run_turn(session, std::move(input), [&](TurnCtx &t) {
    // A back action to the proposed stage accepts a pending backtrack.
    if (action.kind != GuiAction::Kind::back) t.s.pending.reset();
    dispatch(t, action);
  });
}

void Agent::apply_preferences(TurnCtx &t, const nlu::ExtractionResult &result) const {
  auto &s = t.s;
  const auto &wf = scenario_->workflow();
  std::set<std::string> touched;
  for (auto r : result.records) {
    r.origin_turn = t.turn_index;
    const auto old_records = s.memory.all();
    const auto notice = s.memory.upsert(r, wf);
    for (const auto &st : r.relevant_stages) touched.insert(st);
    for (const auto &old_id : notice.replaced_ids) {
      if (old_id == notice.record_id) continue;
      bool relink = notice.kind == prefs::ChangeKind::strengthened;
      if (notice.kind == prefs::ChangeKind::replaced) {
        const auto *before = s.memory.find(old_id);
        const auto *after = s.memory.find(notice.record_id);
        const auto *cb = before ? std::get_if<prefs::Constraint>(&before->compiled) : nullptr;
        const auto *ca = after ? std::get_if<prefs::Constraint>(&after->compiled) : nullptr;
        if (cb && ca && before->hard() == after->hard()) {
          const StageDef *st = wf.stage(after->relevant_stages.front());
          const auto w = prefs::compare_width(*cb, *ca, st ? st->spec(ca->attribute) : nullptr);
          relink = w == prefs::Widening::equal || w == prefs::Widening::narrower;
        }
      }
      if (relink) {
        for (auto &d : s.dead_ends) {
          for (auto &id : d.linked_preference_ids) if (id == old_id) id = notice.record_id;
        }
        for (auto &[stage_id, e] : s.ledger.entries) {
          for (auto &id : e.linked_preference_ids) if (id == old_id) id = notice.record_id;
        }
      } else {
        auto inv = nav::invalidate_on_preference_change(std::move(s.dead_ends), std::move(s.ledger), old_id);
        s.dead_ends = std::move(inv.dead_ends);
        s.ledger = std::move(inv.ledger);
      }
    }
  }

  const StageDef &stage = *wf.stage(s.current_stage);
  if (s.mode == Mode::baseline) {
    s.current_view = compute_view(s, stage, s.path);
    if (!stage.is_terminal()) follow_up(t);
    else t.say(templates_.render("messages", "noted", {{"stages", stage.title}, {"plural", ""}}));
    return;
  }
  if (!stage.is_terminal() && touched.count(stage.id)) {
    replan(t, true);
    follow_up(t);
    return;
  }
  refresh_ledger(s);
  std::vector<std::string> titles;
  for (const auto &st : wf.stages) {
    if (touched.count(st.id)) titles.push_back(st.title);
  }
  t.say(templates_.render("messages", "noted", {{"stages", join_and(titles)}, {"plural", titles.size() == 1 ? "" : "s"}}));
  if (!stage.is_terminal() && nav::viable_ids(s.current_view, s.path, s.dead_ends).empty()) follow_up(t);
}

void Agent::answer_question(TurnCtx &t, const nlu::ExtractionResult &result) const {
  const auto &s = t.s;
  const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
  std::vector<std::string> answers;
  for (const auto &attr : result.asked_attributes) {
    const auto *spec = stage.spec(attr);
    if (!spec) continue;
    std::vector<std::string> parts;
    for (const auto &o : s.current_view.visible) {
      if (const Value *v = o.attribute(attr)) parts.push_back(o.label + " " + adapt::render_value(*v, *spec));
    }
    if (!parts.empty()) answers.push_back(spec->display_name() + ": " + join_and(parts));
  }
  if (answers.empty()) {
    t.say(templates_.render("messages", "info.none", {{"nouns", templates_.noun(stage.id, true)}}));
  } else {
    std::string joined;
    for (const auto &a : answers) joined += (joined.empty() ? "" : "; ") + a;
    t.say(templates_.render("messages", "info", {{"answers", joined}}));
  }
}

std::vector<AgentEvent> Agent::handle_user_message(SessionState &session, const std::string &text) const {
  json input = {{"channel", "chat"}, {"text", text}};
  return run_turn(session, std::move(input), [&](TurnCtx &t) {
    auto &s = t.s;
    const auto pending = s.pending;
    s.pending.reset();

    nlu::Context ctx;
    ctx.scenario = scenario_.get();
    ctx.stage = scenario_->workflow().stage(s.current_stage);
    if (ctx.stage && !ctx.stage->is_terminal()) ctx.options = catalog::options_at(*scenario_, s.path);
    ctx.block = build_context(s);
    const auto result = provider_->extract({text, t.turn_index, nlu::Channel::chat}, ctx);
    if (result.degraded) {
      t.emit(EventKind::message, {{"text", templates_.render("messages", "degraded")}, {"tone", "warning"}, {"degraded", true}});
    }
    const StageDef &stage = *scenario_->workflow().stage(s.current_stage);
    auto other = [&] {
      std::string elicit = stage.is_terminal() ? std::string() : templates_.elicitation(stage.id);
      std::string msg = templates_.render("messages", "other", {{"elicitation", elicit}});
      while (!msg.empty() && msg.back() == ' ') msg.pop_back();
      t.say(msg);
    };

    switch (result.utterance_class) {
    case nlu::UtteranceClass::preference_statement:
      if (result.records.empty()) other();
      else apply_preferences(t, result);
      return;
    case nlu::UtteranceClass::information_seeking:
      if (pending) s.pending = pending;
      answer_question(t, result);
      return;
    case nlu::UtteranceClass::other:
      other();
      return;
    case nlu::UtteranceClass::action_request: break;
    }

    const auto &act = result.action;
    switch (act.kind) {
    case nlu::ActionKind::affirm:
      if (pending && pending->kind == ProposalKind::confirm_selection) {
        do_select(t, pending->option_id);
        if (s.selected == pending->option_id) do_continue(t);
      } else if (pending && pending->kind == ProposalKind::backtrack) {
        s.pending = pending;
        accept_backtrack(t);
      } else if (s.selected) {
        do_continue(t);
      } else if (stage.is_terminal()) {
        do_submit(t);
      } else {
        other();
      }
      return;
    case nlu::ActionKind::decline:
      if (pending && pending->kind == ProposalKind::backtrack) {
        if (!contains(s.declined_backtracks, pending->stage_id)) s.declined_backtracks.push_back(pending->stage_id);
        t.say(templates_.render("messages", "backtrack.declined"));
      } else if (pending) {
        t.say(templates_.render("messages", "declined", {{"noun", templates_.noun(stage.id, false)}}));
      } else {
        other();
      }
      return;
    case nlu::ActionKind::back:
      s.pending = pending;
      do_back(t, act.target_stage);
      return;
    case nlu::ActionKind::next: do_continue(t); return;
    case nlu::ActionKind::show_all: do_show_all(t); return;
    case nlu::ActionKind::submit: do_submit(t); return;
    case nlu::ActionKind::select:
      if (act.option_id.empty()) {
        t.say(templates_.render("messages", "unavailable", {{"label", act.mention.empty() ? text : act.mention}}), "error");
        return;
      }
      do_select(t, act.option_id);
      if (s.selected == act.option_id) do_continue(t);
      return;
    case nlu::ActionKind::none: other(); return;
    }
  });
}

json Agent::build_context(const SessionState &s, std::optional<std::size_t> k) const {
  const std::size_t window = k.value_or(config_.context_turns);
  json turns = json::array();
  const std::size_t first = s.history.size() > window ? s.history.size() - window : 0;
  for (std::size_t i = first; i < s.history.size(); ++i) turns.push_back(turn_to_json(s.history[i]));
  return {{"stage", s.current_stage},
          {"path", path_to_json(s.path)},
          {"selected", s.selected ? json(*s.selected) : json(nullptr)},
          {"turns", turns},
          {"memory", s.memory.to_json()},
          {"snapshot", adapt::view_to_json(s.current_view)},
          {"ledger", nav::ledger_to_json(s.ledger)},
          {"deadEnds", nav::dead_ends_to_json(s.dead_ends)},
          {"pendingProposal", pending_to_json(s.pending)}};
}

json session_to_json(const SessionState &s) {
  json history = json::array();
  for (const auto &t : s.history) history.push_back(turn_to_json(t));
  return {{"sessionId", s.session_id},
          {"scenarioId", s.scenario_id},
          {"mode", to_string(s.mode)},
          {"path", path_to_json(s.path)},
          {"currentStage", s.current_stage},
          {"selected", s.selected ? json(*s.selected) : json(nullptr)},
          {"memory", s.memory.to_json()},
          {"ledger", nav::ledger_to_json(s.ledger)},
          {"deadEnds", nav::dead_ends_to_json(s.dead_ends)},
          {"history", history},
          {"currentView", adapt::view_to_json(s.current_view)},
          {"pendingProposal", pending_to_json(s.pending)},
          {"declinedBacktracks", s.declined_backtracks},
          {"selectionLog", selection_log_to_json(s.selection_log)},
          {"backtracks", s.backtracks},
          {"deadEndsRecorded", s.dead_ends_recorded},
          {"submitted", s.submitted},
          {"nextEventIndex", s.next_event_index}};
}

SessionState session_from_json(const json &j) {
  SessionState s;
  try {
    s.session_id = j.at("sessionId").get<std::string>();
    s.scenario_id = j.at("scenarioId").get<std::string>();
    s.mode = mode_from_string(j.at("mode").get<std::string>());
    s.path = path_from_json(j.at("path"));
    s.current_stage = j.at("currentStage").get<std::string>();
    if (!j.at("selected").is_null()) s.selected = j["selected"].get<std::string>();
    s.memory = prefs::PreferenceMemory::from_json(j.at("memory"));
    s.ledger = nav::ledger_from_json(j.at("ledger"));
    s.dead_ends = nav::dead_ends_from_json(j.at("deadEnds"));
    for (const auto &t : j.at("history")) s.history.push_back(turn_from_json(t));
    s.current_view = adapt::view_from_json(j.at("currentView"));
    s.pending = pending_from_json(j.at("pendingProposal"));
    s.declined_backtracks = j.at("declinedBacktracks").get<std::vector<std::string>>();
    for (const auto &e : j.at("selectionLog")) {
      s.selection_log.push_back({path_from_json(e.at("prefix")), {e.at("stageId").get<std::string>(), e.at("optionId").get<std::string>()}});
    }
    s.backtracks = j.at("backtracks").get<std::size_t>();
    s.dead_ends_recorded = j.at("deadEndsRecorded").get<std::size_t>();
    s.submitted = j.at("submitted").get<bool>();
    s.next_event_index = j.at("nextEventIndex").get<std::size_t>();
  } catch (const json::exception &e) {
    throw Error("parse_error", std::string("malformed session document: ") + e.what());
  }
  return s;
}

std::vector<AgentEvent> event_log(const SessionState &s) {
  std::vector<AgentEvent> out;
  for (const auto &t : s.history) out.insert(out.end(), t.events.begin(), t.events.end());
  return out;
}

json snapshot(const SessionState &s) {
  json events = json::array();
  for (const auto &e : event_log(s)) events.push_back(event_to_json(e));
  return {{"schema", kSnapshotSchema}, {"session", session_to_json(s)}, {"events", events}};
}

SessionState restore(const json &doc) {
  if (!doc.is_object() || !doc.contains("schema")) throw Error("parse_error", "snapshot document has no schema tag");
  if (doc["schema"] != kSnapshotSchema) {
    throw Error("schema_mismatch", "snapshot schema " + doc["schema"].dump() + " is not " + kSnapshotSchema);
  }
  if (!doc.contains("session")) throw Error("parse_error", "snapshot document has no session");
  return session_from_json(doc["session"]);
}

} // namespace maestro::agent
