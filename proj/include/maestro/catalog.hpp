#pragma once

#include "maestro/value.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maestro::catalog {

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::categorical;
  std::optional<std::string> unit;      // "mi", "min", "clock", ...
  std::optional<bool> higher_is_better;
  std::vector<std::string> order;       // ordinal only, lowest first
  std::optional<std::string> display;   // human name; boolean presence phrase
  std::vector<std::string> augment_as;  // surfaced instead of this attribute

  // Position of `value` in the ordinal order, or -1.
  int rank_of(std::string_view value) const;
  std::string display_name() const { return display.value_or(name); }
};

struct OptionItem {
  std::string id;
  std::string label;
  std::map<std::string, Value> attributes;

  const Value *attribute(std::string_view name) const;
  bool operator==(const OptionItem &) const = default;
};

enum class UiKind { button_group, calendar, seat_map, confirmation };

std::string_view to_string(UiKind kind);

struct StageDef {
  std::string id;
  std::string title;
  UiKind ui_kind = UiKind::button_group;
  bool filterable = true;
  std::vector<AttributeSpec> attribute_specs;

  const AttributeSpec *spec(std::string_view attribute) const;
  bool is_terminal() const { return ui_kind == UiKind::confirmation; }
};

struct WorkflowDef {
  std::vector<StageDef> stages;

  const StageDef *stage(std::string_view id) const;
  // Index in stage order, or -1.
  int index_of(std::string_view id) const;
};

enum class SeatTier { standard, premium };

struct SeatCell {
  std::string row;
  int column = 0;  // 1-based
  SeatTier tier = SeatTier::standard;
  bool taken = false;
};

struct SeatRow {
  std::string row;
  std::string zone;  // "front" / "middle" / "back"
  std::vector<SeatCell> cells;
};

struct SeatGrid {
  std::vector<SeatRow> rows;
  int max_block = 4;
};

// Ground-truth scripted preference from a scenario brief. The machine form is
// either a conjunction of constraints, a list of cases (first case whose
// `when` selections match the path applies; no match means vacuous), or a
// soft objective.
struct ScriptedCase {
  std::map<std::string, std::set<std::string>> when;  // stage -> option ids
  json constraints = json::array();
};

struct ScriptedPreference {
  std::string stage_id;
  std::string description;
  bool hard = false;
  json constraints = json::array();
  std::vector<ScriptedCase> cases;
  std::optional<json> objective;
};

struct Brief {
  std::string id;
  std::string title;
  std::string background;
};

class Scenario {
public:
  const WorkflowDef &workflow() const { return workflow_; }
  const Brief &brief() const { return brief_; }
  const std::vector<ScriptedPreference> &scripted_preferences() const { return scripted_; }
  const Path &solution() const { return solution_; }

  // Declared option universe of a stage, in catalog order.
  const std::vector<OptionItem> &universe(std::string_view stage_id) const;
  const OptionItem *option(std::string_view stage_id, std::string_view option_id) const;

  // Stage following `prefix`; nullptr when the prefix already covers every
  // stage.
  const StageDef *stage_after(std::span<const PathSelection> prefix) const;

  // Option ids available after the prefix; nullptr for an unknown prefix.
  const std::vector<std::string> *available_ids(std::span<const PathSelection> prefix) const;

  const SeatGrid *seat_grid(std::span<const PathSelection> prefix) const;

  // Number of stages a full path selects from (every stage but confirmation).
  std::size_t selectable_stage_count() const;

  // Original document, kept for transcripts and re-serialization.
  const json &document() const { return document_; }

private:
  friend Scenario load_scenario(std::string_view bytes);
  friend Scenario load_scenario_json(const json &doc);

  WorkflowDef workflow_;
  Brief brief_;
  std::vector<ScriptedPreference> scripted_;
  Path solution_;
  std::map<std::string, std::vector<OptionItem>, std::less<>> universe_;
  std::map<std::string, std::vector<std::string>, std::less<>> availability_;  // prefix key
  std::map<std::string, SeatGrid, std::less<>> seat_grids_;
  json document_;
};

using ScenarioPtr = std::shared_ptr<const Scenario>;

// Parses and validates a scenario document. Throws Error with code
// "parse_error" or "validation_error".
Scenario load_scenario(std::string_view bytes);
Scenario load_scenario_json(const json &doc);
Scenario load_scenario_file(const std::string &path);

// Catalog-order options for the stage following `prefix`. Empty for the
// confirmation stage. Throws Error("unknown_prefix") otherwise.
std::vector<OptionItem> options_at(const Scenario &scenario, std::span<const PathSelection> prefix);

// Every full path (one selection per non-terminal stage), depth-first in
// catalog order.
std::vector<Path> enumerate_paths(const Scenario &scenario, std::size_t limit = 200000);

// True when `option` at `prefix` satisfies the scripted preference.
bool scripted_satisfied(const Scenario &scenario, const ScriptedPreference &pref,
                        std::span<const PathSelection> prefix, const OptionItem &option);

struct UniqueSolutionReport {
  std::size_t solution_count = 0;
  std::vector<Path> witness_paths;
  bool matches_declared = false;

  bool passed() const { return solution_count == 1 && matches_declared; }
};

UniqueSolutionReport validate_unique_solution(const Scenario &scenario);

// Derives contiguous free seat blocks of size 1..max_block, row-major.
std::vector<OptionItem> seat_blocks(const SeatGrid &grid);

json seat_grid_to_json(const SeatGrid &grid);

} // namespace maestro::catalog
