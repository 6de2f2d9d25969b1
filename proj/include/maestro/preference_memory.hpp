#pragma once

#include "maestro/catalog.hpp"
#include "maestro/constraint.hpp"

#include <string>
#include <vector>

namespace maestro::prefs {

enum class Strength { hard, soft };

struct PreferenceRecord {
  std::string id;
  std::string description;
  Strength strength = Strength::soft;
  std::vector<std::string> relevant_stages;
  Compiled compiled;
  int origin_turn = 0;
  bool active = true;

  bool hard() const { return strength == Strength::hard; }
  const std::string &attribute() const { return compiled_attribute(compiled); }
  bool operator==(const PreferenceRecord &) const = default;
};

// Throws Error("invalid_record") unless the record is well-formed against the
// workflow: strength/compiled agreement, known stages, matching kinds.
void validate_record(const PreferenceRecord &record, const catalog::WorkflowDef &workflow);

enum class ChangeKind { added, replaced, strengthened, relaxed };

std::string_view to_string(ChangeKind kind);

struct ChangeNotice {
  std::string record_id;          // id of the record now active
  std::vector<std::string> replaced_ids;
  ChangeKind kind = ChangeKind::added;
};

// Emitted when a record stops constraining the session so navigation can drop
// dead ends and stale counts linked to it.
struct InvalidationNotice {
  std::string preference_id;
};

class PreferenceMemory {
public:
  // Inserts or replaces. A candidate overlapping an active record (same
  // attribute, intersecting relevant stages) deactivates it. An empty
  // candidate id is assigned "p<N>".
  ChangeNotice upsert(PreferenceRecord candidate, const catalog::WorkflowDef &workflow);

  // Deactivates an active record. Throws Error("unknown_record").
  InvalidationNotice relax(const std::string &id);

  // Active records for a stage: hard before soft, then by origin turn.
  std::vector<PreferenceRecord> records_for_stage(const std::string &stage_id,
                                                  const catalog::WorkflowDef &workflow) const;

  std::vector<PreferenceRecord> active() const;
  const std::vector<PreferenceRecord> &all() const { return records_; }
  const PreferenceRecord *find(const std::string &id) const;
  bool empty() const { return records_.empty(); }

  json to_json() const;
  static PreferenceMemory from_json(const json &j);

  bool operator==(const PreferenceMemory &) const = default;

private:
  std::vector<PreferenceRecord> records_;
  int next_id_ = 1;
};

json record_to_json(const PreferenceRecord &record);
PreferenceRecord record_from_json(const json &j);

} // namespace maestro::prefs
