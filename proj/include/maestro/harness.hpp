#pragma once

#include "maestro/agent.hpp"
#include "maestro/catalog.hpp"
#include "maestro/navigation.hpp"
#include "maestro/preference_memory.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace maestro::harness {

// How the simulated user answers a pending proposal after each step.
enum class Policy { always_accept, always_decline, accept_backtracks_only };

std::string_view to_string(Policy policy);
Policy policy_from_string(std::string_view text);

struct PersonaStep {
  enum class Kind { say, click, accept_proposals };
  Kind kind = Kind::say;
  std::string text;          // say
  agent::GuiAction action;   // click
  Policy policy = Policy::always_accept;

  bool operator==(const PersonaStep &) const = default;
};

struct Persona {
  std::string id;
  std::string scenario_id;
  std::string description;
  Policy policy = Policy::always_accept;  // in force until an acceptProposals step
  std::vector<PersonaStep> script;
  std::size_t turn_limit = 60;

  bool operator==(const Persona &) const = default;
};

// Throws Error("parse_error") for a malformed persona document.
Persona persona_from_json(const json &j);
json persona_to_json(const Persona &persona);
Persona load_persona_file(const std::string &path);
// Every *.json in the directory, sorted by file name.
std::vector<Persona> load_persona_dir(const std::string &dir);

struct TrialMetrics {
  int task_success = 0;
  std::size_t violation_count = 0;
  std::size_t unpreferred_selection_count = 0;
  std::size_t turn_count = 0;
  std::map<std::string, std::size_t> utterance_counts;  // every class, zero included
  std::size_t backtracks = 0;
  std::size_t dead_ends_recorded = 0;

  bool operator==(const TrialMetrics &) const = default;
};

json metrics_to_json(const TrialMetrics &metrics);

struct TrialResult {
  TrialMetrics metrics;
  std::vector<json> transcript;  // one record per line: header, turns, footer
  bool valid = true;
  std::optional<std::size_t> error_step;
  std::string protocol_error;
  agent::SessionState final_state;
};

struct TrialOptions {
  agent::Mode mode = agent::Mode::maestro;
  std::optional<std::size_t> turn_limit;  // overrides the persona's
  // Called after every turn, session start included.
  std::function<void(const agent::SessionState &)> observer;
  // Snapshot and restore the session after this many turns; checks that a
  // resumed run behaves like an uninterrupted one.
  std::optional<std::size_t> restore_after;
};

TrialResult run_trial(const catalog::ScenarioPtr &scenario, const Persona &persona, const TrialOptions &options = {});

// Hard scripted preferences unmet by the path. Stages the path never reached
// count as unmet.
std::size_t compute_violations(const Path &final_path, const catalog::Scenario &scenario);

// Selections that break at least one hard scripted preference of their
// stage, each counted once, repeats included.
std::size_t compute_unpreferred(const std::vector<agent::LoggedSelection> &log, const catalog::Scenario &scenario);

struct OracleResult {
  std::vector<Path> feasible_paths;
  // Prefix key -> ids at the following stage that pass every active hard
  // record and are not blocked by a dead end under that prefix.
  std::map<std::string, std::vector<std::string>> per_prefix_viable;
  std::optional<Path> optimal_path;

  // Viable siblings of `selection` after `prefix`; nullopt for an unknown
  // prefix.
  std::optional<std::size_t> alternative_count(std::span<const PathSelection> prefix, const std::string &selection) const;
};

// Exhaustive enumeration over the scenario document. Works from the raw
// JSON of the scenario, records and dead ends rather than the engine's
// catalog, constraint and navigation code. Throws Error("scale_guard") past
// `limit` full paths.
OracleResult brute_force_oracle(const catalog::Scenario &scenario, const std::vector<prefs::PreferenceRecord> &records,
                                const nav::DeadEnds &dead_ends = {}, std::size_t limit = 100000);

// Stage id -> oracle count, for every ledger entry of the session.
std::map<std::string, std::size_t> oracle_counts(const catalog::Scenario &scenario, const agent::SessionState &session);

std::string transcript_jsonl(const std::vector<json> &transcript);
std::vector<json> parse_transcript(const std::string &text);

// Tab-separated: scenario, persona, mode, then every metric.
std::string metrics_header();
std::string metrics_row(const std::string &scenario_id, const std::string &persona_id, agent::Mode mode,
                        const TrialMetrics &metrics);

struct ReplayReport {
  bool identical = false;
  std::size_t verified_lines = 0;
  std::optional<std::size_t> divergent_line;
  std::optional<std::size_t> divergent_event;  // event index within the divergent turn
  std::string detail;
  std::size_t missing_lines = 0;  // present in the re-run, absent from the transcript
};

// Re-runs the trial named by the transcript header and compares line by line.
ReplayReport replay(const catalog::ScenarioPtr &scenario, const std::vector<json> &transcript);

} // namespace maestro::harness
