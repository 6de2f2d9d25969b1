#pragma once

#include "maestro/adaptation.hpp"
#include "maestro/catalog.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace maestro::nav {

struct LedgerEntry {
  std::size_t count = 0;
  std::string provenance;  // view_hash of the view the count came from
  bool stale = false;
  std::vector<std::string> linked_preference_ids;

  bool operator==(const LedgerEntry &) const = default;
};

struct AlternativeLedger {
  std::map<std::string, LedgerEntry> entries;

  std::optional<std::size_t> count(const std::string &stage_id) const;
  bool operator==(const AlternativeLedger &) const = default;
};

struct DeadEndRecord {
  Path prefix;
  std::string failed_stage;
  std::vector<std::string> linked_preference_ids;
  std::string reason;

  bool operator==(const DeadEndRecord &) const = default;
};

using DeadEnds = std::vector<DeadEndRecord>;

struct Conflict {
  std::string stage_id;
  std::string reason;
  std::vector<std::string> blocking_preference_ids;
};

struct BacktrackProposal {
  std::string target_stage_id;
  std::size_t alternatives = 0;
};

struct Infeasible {
  std::vector<std::string> exhausted_stages;
};

using BacktrackSuggestion = std::variant<BacktrackProposal, Infeasible>;

// True when choosing `candidate` at `stage` after `prefix` re-enters a
// recorded dead end: the extended path starts with the record's prefix and
// the record's failed stage lies beyond `stage`. Other prefixes are unaffected.
bool is_blocked(std::span<const PathSelection> prefix, const std::string &candidate, const std::string &stage_id,
                const DeadEnds &dead_ends);

// Viable options of a view: adaptation candidates minus dead-end blocked ones.
std::vector<std::string> viable_ids(const adapt::AdaptedView &view, std::span<const PathSelection> prefix,
                                    const DeadEnds &dead_ends);

// Stores the stage's remaining alternatives, excluding the current selection.
// Options blocked by a dead end under `prefix` are not counted.
AlternativeLedger record_alternatives(AlternativeLedger ledger, const catalog::StageDef &stage,
                                      const adapt::AdaptedView &view, const std::optional<std::string> &current_selection,
                                      std::span<const PathSelection> prefix = {}, const DeadEnds &dead_ends = {});

std::optional<Conflict> detect_conflict(const catalog::StageDef &stage, const adapt::AdaptedView &view,
                                        std::span<const PathSelection> path, const DeadEnds &dead_ends);

// Nearest preceding stage on the path with a nonzero count. Throws
// Error("contract_violation") when `conflict` is empty.
BacktrackSuggestion suggest_backtrack(const AlternativeLedger &ledger, std::span<const PathSelection> path,
                                      const std::optional<Conflict> &conflict);

DeadEnds record_dead_end(DeadEnds dead_ends, std::span<const PathSelection> path, const std::string &failed_stage,
                         const std::vector<std::string> &blocking_preference_ids, const std::string &reason,
                         const catalog::WorkflowDef &workflow);

struct InvalidationResult {
  DeadEnds dead_ends;
  AlternativeLedger ledger;
  std::vector<std::string> stale_stage_ids;
};

InvalidationResult invalidate_on_preference_change(DeadEnds dead_ends, AlternativeLedger ledger,
                                                   const std::string &preference_id);

struct NavigationState {
  Path path;
  AlternativeLedger ledger;
  DeadEnds dead_ends;

  bool operator==(const NavigationState &) const = default;
};

// Truncates the path to before `target_stage`'s selection and drops ledger
// entries of later stages. Throws Error("illegal_action") unless the target
// strictly precedes the current stage and is on the path.
NavigationState navigate_back(NavigationState state, const std::string &target_stage, const catalog::WorkflowDef &workflow);

json ledger_to_json(const AlternativeLedger &ledger);
AlternativeLedger ledger_from_json(const json &j);
json dead_end_to_json(const DeadEndRecord &record);
DeadEndRecord dead_end_from_json(const json &j);
json dead_ends_to_json(const DeadEnds &dead_ends);
DeadEnds dead_ends_from_json(const json &j);

} // namespace maestro::nav
