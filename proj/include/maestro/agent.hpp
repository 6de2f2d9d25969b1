#pragma once

#include "maestro/adaptation.hpp"
#include "maestro/catalog.hpp"
#include "maestro/navigation.hpp"
#include "maestro/nlu.hpp"
#include "maestro/preference_memory.hpp"
#include "maestro/templates.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace maestro::agent {

enum class EventKind { message, adaptation, gui_snapshot, confirmation_ask, backtrack_proposal, stage_transition, submission };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view text);

struct AgentEvent {
  std::size_t index = 0;  // position in the session's event log
  EventKind kind = EventKind::message;
  json payload = json::object();

  bool operator==(const AgentEvent &) const = default;
};

json event_to_json(const AgentEvent &event);
AgentEvent event_from_json(const json &j);

enum class Mode { maestro, baseline };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);

struct GuiAction {
  enum class Kind { select, next, back, show_all, submit };
  Kind kind = Kind::select;
  std::string option_id;     // select
  std::string target_stage;  // back; empty means the previous stage

  bool operator==(const GuiAction &) const = default;
};

std::string_view to_string(GuiAction::Kind kind);
// {kind: "select"|"continue"|"back"|"showAll"|"submit", params: {...}}
json action_to_json(const GuiAction &action);
// Throws Error("bad_request") for an unknown kind or missing params.
GuiAction action_from_json(const json &j);

enum class ProposalKind { confirm_selection, backtrack };

struct PendingProposal {
  ProposalKind kind = ProposalKind::confirm_selection;
  std::string stage_id;        // confirm: stage of the option; backtrack: target
  std::string option_id;       // confirm only
  std::string conflict_stage;  // backtrack only
  std::vector<std::string> blocking_preference_ids;
  std::string reason;

  bool operator==(const PendingProposal &) const = default;
};

struct LoggedSelection {
  Path prefix;  // path when the selection was made
  PathSelection choice;

  bool operator==(const LoggedSelection &) const = default;
};

struct Turn {
  int index = 0;
  json user_input = json::object();
  std::vector<AgentEvent> events;
  std::string timestamp;

  bool operator==(const Turn &) const = default;
};

struct SessionState {
  std::string session_id;
  std::string scenario_id;
  Mode mode = Mode::maestro;
  Path path;
  std::string current_stage;
  std::optional<std::string> selected;  // chosen at the current stage, not yet continued
  prefs::PreferenceMemory memory;
  nav::AlternativeLedger ledger;
  nav::DeadEnds dead_ends;
  std::vector<Turn> history;
  adapt::AdaptedView current_view;
  std::optional<PendingProposal> pending;
  std::vector<std::string> declined_backtracks;  // targets the user turned down
  std::vector<LoggedSelection> selection_log;    // every selection, including undone ones
  std::size_t backtracks = 0;
  std::size_t dead_ends_recorded = 0;
  bool submitted = false;
  std::size_t next_event_index = 0;

  bool operator==(const SessionState &) const = default;
};

// Wall-clock stand-in; receives the turn index so logical clocks stay
// deterministic across snapshot and restore.
using Clock = std::function<std::string(int turn_index)>;

Clock system_clock();
// "2026-01-01T00:00:00Z" plus one second per turn.
Clock logical_clock();

struct AgentConfig {
  Mode mode = Mode::maestro;
  std::size_t context_turns = 10;
  Clock clock;  // defaults to system_clock()
};

inline constexpr const char *kSnapshotSchema = "maestro.session/1";

class Agent {
public:
  Agent(catalog::ScenarioPtr scenario, std::shared_ptr<nlu::Provider> provider, AgentConfig config = {},
        const Templates &templates = Templates::defaults());

  // Fresh session at the first stage; its opening events form turn 0.
  SessionState start(const std::string &session_id) const;

  // One turn each. The state is replaced only when the turn completes.
  std::vector<AgentEvent> handle_user_message(SessionState &session, const std::string &text) const;
  std::vector<AgentEvent> handle_gui_action(SessionState &session, const GuiAction &action) const;

  json build_context(const SessionState &session, std::optional<std::size_t> k = std::nullopt) const;

  const catalog::Scenario &scenario() const { return *scenario_; }
  const AgentConfig &config() const { return config_; }

private:
  struct TurnCtx;

  std::vector<AgentEvent> run_turn(SessionState &session, json user_input,
                                   const std::function<void(TurnCtx &)> &body) const;
  void enter_stage(TurnCtx &t) const;
  void elicit_on_stage_entry(TurnCtx &t) const;
  void replan(TurnCtx &t, bool emit_actions) const;
  void follow_up(TurnCtx &t) const;
  void refresh_ledger(SessionState &s) const;
  void do_select(TurnCtx &t, const std::string &option_id) const;
  void do_continue(TurnCtx &t) const;
  void do_back(TurnCtx &t, const std::string &target) const;
  void accept_backtrack(TurnCtx &t) const;
  void do_show_all(TurnCtx &t) const;
  void do_submit(TurnCtx &t) const;
  void apply_preferences(TurnCtx &t, const nlu::ExtractionResult &result) const;
  void answer_question(TurnCtx &t, const nlu::ExtractionResult &result) const;
  void dispatch(TurnCtx &t, const GuiAction &action) const;

  std::vector<prefs::PreferenceRecord> stage_records(const SessionState &s, const std::string &stage_id) const;
  adapt::AdaptedView compute_view(const SessionState &s, const catalog::StageDef &stage, std::span<const PathSelection> prefix,
                                  adapt::Plan *plan_out = nullptr) const;
  std::string label_of(const std::string &stage_id, const std::string &option_id) const;

  catalog::ScenarioPtr scenario_;
  std::shared_ptr<nlu::Provider> provider_;
  AgentConfig config_;
  Templates templates_;
};

json session_to_json(const SessionState &session);
SessionState session_from_json(const json &j);

// {schema, session, events}. Restore throws Error("schema_mismatch") for a
// different schema tag and Error("parse_error") for a malformed document.
json snapshot(const SessionState &session);
SessionState restore(const json &snapshot);

// Every event of the session in index order.
std::vector<AgentEvent> event_log(const SessionState &session);

} // namespace maestro::agent
