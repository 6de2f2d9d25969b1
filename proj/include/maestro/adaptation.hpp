#pragma once

#include "maestro/catalog.hpp"
#include "maestro/preference_memory.hpp"
#include "maestro/templates.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace maestro::adapt {

enum class ActionKind { augment, filter, sort, highlight };
enum class Intent { reduce, emphasize };
enum class SortDirection { asc, desc };

std::string_view to_string(ActionKind kind);
std::string_view to_string(Intent intent);
std::string_view to_string(SortDirection dir);

struct AdaptationAction {
  ActionKind kind = ActionKind::augment;
  std::vector<std::string> attributes;          // augment
  std::optional<prefs::Constraint> constraint;  // filter
  std::string sort_attribute;                   // sort
  SortDirection direction = SortDirection::asc;
  std::vector<std::string> option_ids;          // highlight, catalog order
  Intent intent = Intent::emphasize;
  std::vector<std::string> linked_preference_ids;
  std::string banner;

  bool operator==(const AdaptationAction &) const = default;
};

struct Plan {
  std::vector<AdaptationAction> actions;
  std::vector<std::string> warnings;
};

struct AdaptedView {
  std::string stage_id;
  std::vector<catalog::OptionItem> visible;
  std::map<std::string, std::string> labels;
  std::set<std::string> highlighted;
  std::set<std::string> non_matching;  // filtered-out items shown by Show All
  std::size_t hidden_count = 0;
  bool show_all_engaged = false;
  std::vector<AdaptationAction> applied_actions;
  std::vector<catalog::OptionItem> ordered_all;  // every option in adapted order

  bool operator==(const AdaptedView &) const = default;
};

Plan plan_adaptations(const catalog::StageDef &stage, const std::vector<catalog::OptionItem> &options,
                      const std::vector<prefs::PreferenceRecord> &records,
                      const Templates &templates = Templates::defaults());

AdaptedView apply(const catalog::StageDef &stage, const std::vector<catalog::OptionItem> &options,
                  const std::vector<AdaptationAction> &plan);

AdaptedView show_all(const AdaptedView &view);

// Label with appended attribute renderings, e.g. "Pocket Parade — PG, 1h 32m".
// Attributes missing on the item are skipped and reported in `warnings`.
std::string render_label(const catalog::OptionItem &item, const std::vector<std::string> &attributes,
                         const std::vector<catalog::AttributeSpec> &specs,
                         std::vector<std::string> *warnings = nullptr);

std::string render_value(const Value &value, const catalog::AttributeSpec &spec);

// Options the navigation layer treats as viable: visible and matching, and
// inside every reduce-intent highlight. Adapted order.
std::vector<std::string> candidate_ids(const AdaptedView &view);

json action_to_json(const AdaptationAction &action);
AdaptationAction action_from_json(const json &j);
json view_to_json(const AdaptedView &view);
AdaptedView view_from_json(const json &j);

// Stable digest of a view, used as ledger provenance.
std::string view_hash(const AdaptedView &view);

} // namespace maestro::adapt
