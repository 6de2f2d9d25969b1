#include "maestro/navigation.hpp"

#include <algorithm>

namespace maestro::nav {

std::optional<std::size_t> AlternativeLedger::count(const std::string &stage_id) const {
  const auto it = entries.find(stage_id);
  if (it == entries.end()) return std::nullopt;
  return it->second.count;
}

bool is_blocked(std::span<const PathSelection> prefix, const std::string &candidate, const std::string &stage_id,
                const DeadEnds &dead_ends) {
  Path ext(prefix.begin(), prefix.end());
  ext.push_back({stage_id, candidate});
  for (const auto &r : dead_ends) {
    if (r.prefix.empty() || r.prefix.size() > ext.size()) continue;
    if (!std::equal(r.prefix.begin(), r.prefix.end(), ext.begin())) continue;
    // The failed stage must lie beyond the candidate's stage; ext holds every
    // stage up to and including it.
    const bool follows = std::none_of(ext.begin(), ext.end(), [&](const PathSelection &p) { return p.stage_id == r.failed_stage; });
    if (follows) return true;
  }
  return false;
}

std::vector<std::string> viable_ids(const adapt::AdaptedView &view, std::span<const PathSelection> prefix,
                                    const DeadEnds &dead_ends) {
  std::vector<std::string> out;
  for (auto &id : adapt::candidate_ids(view)) {
    if (!is_blocked(prefix, id, view.stage_id, dead_ends)) out.push_back(std::move(id));
  }
  return out;
}

AlternativeLedger record_alternatives(AlternativeLedger ledger, const catalog::StageDef &stage,
                                      const adapt::AdaptedView &view, const std::optional<std::string> &current_selection,
                                      std::span<const PathSelection> prefix, const DeadEnds &dead_ends) {
  const auto viable = viable_ids(view, prefix, dead_ends);
  std::size_t count = viable.size();
  if (current_selection && std::find(viable.begin(), viable.end(), *current_selection) != viable.end()) --count;

  LedgerEntry entry;
  entry.count = count;
  entry.provenance = adapt::view_hash(view);
  for (const auto &a : view.applied_actions) {
    if (a.kind != adapt::ActionKind::filter && a.kind != adapt::ActionKind::highlight) continue;
    for (const auto &id : a.linked_preference_ids) {
      if (std::find(entry.linked_preference_ids.begin(), entry.linked_preference_ids.end(), id) ==
          entry.linked_preference_ids.end()) {
        entry.linked_preference_ids.push_back(id);
      }
    }
  }
  ledger.entries[stage.id] = std::move(entry);
  return ledger;
}

std::optional<Conflict> detect_conflict(const catalog::StageDef &stage, const adapt::AdaptedView &view,
                                        std::span<const PathSelection> path, const DeadEnds &dead_ends) {
  if (stage.is_terminal()) return std::nullopt;
  if (!viable_ids(view, path, dead_ends).empty()) return std::nullopt;
  Conflict c;
  c.stage_id = stage.id;
  for (const auto &a : view.applied_actions) {
    const bool restricting = a.kind == adapt::ActionKind::filter ||
                             (a.kind == adapt::ActionKind::highlight && a.intent == adapt::Intent::reduce);
    if (!restricting) continue;
    for (const auto &id : a.linked_preference_ids) {
      if (std::find(c.blocking_preference_ids.begin(), c.blocking_preference_ids.end(), id) == c.blocking_preference_ids.end()) {
        c.blocking_preference_ids.push_back(id);
      }
    }
  }
  const bool only_dead_ends = !adapt::candidate_ids(view).empty();
  for (const auto &id : adapt::candidate_ids(view)) {
    for (const auto &r : dead_ends) {
      if (!is_blocked(path, id, stage.id, {r})) continue;
      for (const auto &pid : r.linked_preference_ids) {
        if (std::find(c.blocking_preference_ids.begin(), c.blocking_preference_ids.end(), pid) == c.blocking_preference_ids.end()) {
          c.blocking_preference_ids.push_back(pid);
        }
      }
    }
  }
  c.reason = only_dead_ends ? "every remaining option at this step leads to a recorded dead end"
                            : "no option at this step satisfies the active requirements";
  return c;
}

BacktrackSuggestion suggest_backtrack(const AlternativeLedger &ledger, std::span<const PathSelection> path,
                                      const std::optional<Conflict> &conflict) {
  if (!conflict) throw Error("contract_violation", "suggest_backtrack needs a detected conflict");
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    const auto n = ledger.count(it->stage_id);
    if (n && *n > 0) return BacktrackProposal{it->stage_id, *n};
  }
  Infeasible inf;
  for (const auto &s : path) inf.exhausted_stages.push_back(s.stage_id);
  return inf;
}

DeadEnds record_dead_end(DeadEnds dead_ends, std::span<const PathSelection> path, const std::string &failed_stage,
                         const std::vector<std::string> &blocking_preference_ids, const std::string &reason,
                         const catalog::WorkflowDef &workflow) {
  const int idx = workflow.index_of(failed_stage);
  if (idx <= 0) throw Error("contract_violation", "dead end needs a failed stage after the first");
  const auto len = std::min(path.size(), static_cast<std::size_t>(idx));
  DeadEndRecord r;
  r.prefix.assign(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(len));
  r.failed_stage = failed_stage;
  r.linked_preference_ids = blocking_preference_ids;
  r.reason = reason;
  const bool dup = std::any_of(dead_ends.begin(), dead_ends.end(), [&](const DeadEndRecord &e) {
    return e.prefix == r.prefix && e.failed_stage == r.failed_stage;
  });
  if (!dup) dead_ends.push_back(std::move(r));
  return dead_ends;
}

InvalidationResult invalidate_on_preference_change(DeadEnds dead_ends, AlternativeLedger ledger,
                                                   const std::string &preference_id) {
  auto linked = [&](const std::vector<std::string> &ids) { return std::find(ids.begin(), ids.end(), preference_id) != ids.end(); };
  std::erase_if(dead_ends, [&](const DeadEndRecord &r) { return linked(r.linked_preference_ids); });
  InvalidationResult out;
  for (auto &[stage_id, entry] : ledger.entries) {
    if (linked(entry.linked_preference_ids)) {
      entry.stale = true;
      out.stale_stage_ids.push_back(stage_id);
    }
  }
  out.dead_ends = std::move(dead_ends);
  out.ledger = std::move(ledger);
  return out;
}

NavigationState navigate_back(NavigationState state, const std::string &target_stage, const catalog::WorkflowDef &workflow) {
  const int idx = workflow.index_of(target_stage);
  if (idx < 0) throw Error("illegal_action", "unknown stage '" + target_stage + "'");
  if (static_cast<std::size_t>(idx) >= state.path.size()) {
    throw Error("illegal_action", "stage '" + target_stage + "' does not precede the current stage");
  }
  state.path.resize(static_cast<std::size_t>(idx));
  for (std::size_t k = static_cast<std::size_t>(idx) + 1; k < workflow.stages.size(); ++k) {
    state.ledger.entries.erase(workflow.stages[k].id);
  }
  return state;
}

json ledger_to_json(const AlternativeLedger &ledger) {
  json out = json::object();
  for (const auto &[stage_id, e] : ledger.entries) {
    out[stage_id] = {{"count", e.count}, {"provenance", e.provenance}, {"stale", e.stale}, {"linkedPreferenceIds", e.linked_preference_ids}};
  }
  return out;
}

AlternativeLedger ledger_from_json(const json &j) {
  AlternativeLedger ledger;
  for (const auto &[stage_id, e] : j.items()) {
    LedgerEntry entry;
    entry.count = e.at("count").get<std::size_t>();
    entry.provenance = e.value("provenance", "");
    entry.stale = e.value("stale", false);
    entry.linked_preference_ids = e.value("linkedPreferenceIds", std::vector<std::string>{});
    ledger.entries[stage_id] = std::move(entry);
  }
  return ledger;
}

json dead_end_to_json(const DeadEndRecord &r) {
  return {{"prefix", path_to_json(r.prefix)},
          {"failedStage", r.failed_stage},
          {"linkedPreferenceIds", r.linked_preference_ids},
          {"reason", r.reason}};
}

DeadEndRecord dead_end_from_json(const json &j) {
  DeadEndRecord r;
  r.prefix = path_from_json(j.at("prefix"));
  r.failed_stage = j.at("failedStage").get<std::string>();
  r.linked_preference_ids = j.value("linkedPreferenceIds", std::vector<std::string>{});
  r.reason = j.value("reason", "");
  return r;
}

json dead_ends_to_json(const DeadEnds &dead_ends) {
  json out = json::array();
  for (const auto &r : dead_ends) out.push_back(dead_end_to_json(r));
  return out;
}

DeadEnds dead_ends_from_json(const json &j) {
  DeadEnds out;
  for (const auto &r : j) out.push_back(dead_end_from_json(r));
  return out;
}

} // namespace maestro::nav
