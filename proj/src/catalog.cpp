#include "maestro/catalog.hpp"

#include "maestro/constraint.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace maestro::catalog {

namespace {

[[noreturn]] void invalid(const std::string &message) { throw Error("validation_error", message); }

void reject_unknown_keys(const json &obj, std::initializer_list<std::string_view> allowed,
                         const std::string &where) {
  for (const auto &[key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      invalid("unknown key '" + key + "' in " + where);
    }
  }
}

const json &require(const json &obj, const char *key, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end()) invalid("missing '" + std::string(key) + "' in " + where);
  return *it;
}

UiKind ui_kind_from_string(const std::string &text) {
  if (text == "buttonGroup") return UiKind::button_group;
  if (text == "calendar") return UiKind::calendar;
  if (text == "seatMap") return UiKind::seat_map;
  if (text == "confirmation") return UiKind::confirmation;
  invalid("unknown uiKind '" + text + "'");
}

AttributeSpec parse_spec(const json &j, const std::string &where) {
  reject_unknown_keys(j, {"name", "kind", "unit", "higherIsBetter", "order", "display", "augmentAs"}, where);
  AttributeSpec spec;
  spec.name = require(j, "name", where).get<std::string>();
  spec.kind = attribute_kind_from_string(require(j, "kind", where).get<std::string>());
  if (j.contains("unit")) spec.unit = j["unit"].get<std::string>();
  if (j.contains("higherIsBetter")) spec.higher_is_better = j["higherIsBetter"].get<bool>();
  if (j.contains("display")) spec.display = j["display"].get<std::string>();
  if (j.contains("order")) spec.order = j["order"].get<std::vector<std::string>>();
  if (j.contains("augmentAs")) spec.augment_as = j["augmentAs"].get<std::vector<std::string>>();
  if (spec.kind == AttributeKind::ordinal) {
    if (spec.order.empty()) invalid("ordinal attribute '" + spec.name + "' needs an explicit order");
    std::set<std::string> seen(spec.order.begin(), spec.order.end());
    if (seen.size() != spec.order.size()) invalid("ordinal attribute '" + spec.name + "' repeats a value");
  } else if (!spec.order.empty()) {
    invalid("'order' is only valid for ordinal attribute '" + spec.name + "'");
  }
  return spec;
}

void check_value_kind(const AttributeSpec &spec, const Value &value, const std::string &where) {
  bool ok = false;
  switch (spec.kind) {
  case AttributeKind::categorical: ok = as_string(value) != nullptr; break;
  case AttributeKind::ordinal: ok = as_string(value) && spec.rank_of(*as_string(value)) >= 0; break;
  case AttributeKind::numeric: ok = as_number(value) != nullptr; break;
  case AttributeKind::boolean: ok = as_bool(value) != nullptr; break;
  }
  if (!ok) {
    invalid(where + ": value " + value_to_json(value).dump() + " does not conform to " +
            std::string(to_string(spec.kind)) + " attribute '" + spec.name + "'");
  }
}

OptionItem parse_item(const json &j, const StageDef &stage) {
  const std::string where = "option of stage '" + stage.id + "'";
  reject_unknown_keys(j, {"id", "label", "attributes"}, where);
  OptionItem item;
  item.id = require(j, "id", where).get<std::string>();
  item.label = j.value("label", item.id);
  if (j.contains("attributes")) {
    for (const auto &[name, raw] : j["attributes"].items()) {
      const AttributeSpec *spec = stage.spec(name);
      if (!spec) invalid("option '" + item.id + "' uses undeclared attribute '" + name + "' at stage '" + stage.id + "'");
      Value v = value_from_json(raw);
      check_value_kind(*spec, v, "option '" + item.id + "'");
      item.attributes.emplace(name, std::move(v));
    }
  }
  return item;
}

SeatGrid parse_grid(const json &j) {
  reject_unknown_keys(j, {"prefix", "rows", "maxBlock"}, "seat grid");
  SeatGrid grid;
  grid.max_block = j.value("maxBlock", 4);
  if (grid.max_block < 1) invalid("seat grid maxBlock must be positive");
  for (const auto &r : require(j, "rows", "seat grid")) {
    reject_unknown_keys(r, {"row", "zone", "tiers", "taken"}, "seat row");
    SeatRow row;
    row.row = require(r, "row", "seat row").get<std::string>();
    row.zone = r.value("zone", "middle");
    const auto tiers = require(r, "tiers", "seat row").get<std::string>();
    const auto taken = r.value("taken", std::string(tiers.size(), '.'));
    if (taken.size() != tiers.size()) invalid("seat row '" + row.row + "': tiers and taken differ in length");
    for (std::size_t c = 0; c < tiers.size(); ++c) {
      if (tiers[c] != 's' && tiers[c] != 'p') invalid("seat row '" + row.row + "': tier must be 's' or 'p'");
      if (taken[c] != '.' && taken[c] != 'x') invalid("seat row '" + row.row + "': taken must be '.' or 'x'");
      row.cells.push_back({row.row, static_cast<int>(c + 1),
                           tiers[c] == 'p' ? SeatTier::premium : SeatTier::standard, taken[c] == 'x'});
    }
    grid.rows.push_back(std::move(row));
  }
  return grid;
}

void parse_scripted(Scenario &, const json &, std::vector<ScriptedPreference> &, const WorkflowDef &);

} // namespace

int AttributeSpec::rank_of(std::string_view value) const {
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == value) return static_cast<int>(i);
  }
  return -1;
}

const Value *OptionItem::attribute(std::string_view name) const {
  auto it = attributes.find(std::string(name));
  return it == attributes.end() ? nullptr : &it->second;
}

std::string_view to_string(UiKind kind) {
  switch (kind) {
  case UiKind::button_group: return "buttonGroup";
  case UiKind::calendar: return "calendar";
  case UiKind::seat_map: return "seatMap";
  case UiKind::confirmation: return "confirmation";
  }
  return "buttonGroup";
}

const AttributeSpec *StageDef::spec(std::string_view attribute) const {
  for (const auto &s : attribute_specs) {
    if (s.name == attribute) return &s;
  }
  return nullptr;
}

const StageDef *WorkflowDef::stage(std::string_view id) const {
  for (const auto &s : stages) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

int WorkflowDef::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<OptionItem> &Scenario::universe(std::string_view stage_id) const {
  static const std::vector<OptionItem> empty;
  auto it = universe_.find(stage_id);
  return it == universe_.end() ? empty : it->second;
}

const OptionItem *Scenario::option(std::string_view stage_id, std::string_view option_id) const {
  for (const auto &item : universe(stage_id)) {
    if (item.id == option_id) return &item;
  }
  return nullptr;
}

const StageDef *Scenario::stage_after(std::span<const PathSelection> prefix) const {
  if (prefix.size() >= workflow_.stages.size()) return nullptr;
  return &workflow_.stages[prefix.size()];
}

const std::vector<std::string> *Scenario::available_ids(std::span<const PathSelection> prefix) const {
  auto it = availability_.find(prefix_key(prefix));
  return it == availability_.end() ? nullptr : &it->second;
}

const SeatGrid *Scenario::seat_grid(std::span<const PathSelection> prefix) const {
  auto it = seat_grids_.find(prefix_key(prefix));
  return it == seat_grids_.end() ? nullptr : &it->second;
}

std::size_t Scenario::selectable_stage_count() const {
  std::size_t n = 0;
  for (const auto &s : workflow_.stages) {
    if (!s.is_terminal()) ++n;
  }
  return n;
}

std::vector<OptionItem> seat_blocks(const SeatGrid &grid) {
  std::vector<OptionItem> out;
  for (const auto &row : grid.rows) {
    const auto &cells = row.cells;
    for (std::size_t start = 0; start < cells.size(); ++start) {
      for (int size = 1; size <= grid.max_block; ++size) {
        const std::size_t end = start + static_cast<std::size_t>(size);
        if (end > cells.size()) break;
        bool free = true;
        int premium = 0;
        for (std::size_t c = start; c < end; ++c) {
          if (cells[c].taken) { free = false; break; }
          if (cells[c].tier == SeatTier::premium) ++premium;
        }
        if (!free) break;
        OptionItem item;
        const std::string first = row.row + std::to_string(cells[start].column);
        const std::string last = row.row + std::to_string(cells[end - 1].column);
        item.id = size == 1 ? first : first + "-" + last;
        item.label = item.id;
        item.attributes["count"] = static_cast<double>(size);
        item.attributes["tier"] = std::string(premium == size ? "premium" : premium == 0 ? "standard" : "mixed");
        item.attributes["zone"] = row.zone;
        item.attributes["row"] = row.row;
        out.push_back(std::move(item));
      }
    }
  }
  return out;
}

json seat_grid_to_json(const SeatGrid &grid) {
  json rows = json::array();
  for (const auto &row : grid.rows) {
    std::string tiers, taken;
    for (const auto &c : row.cells) {
      tiers += c.tier == SeatTier::premium ? 'p' : 's';
      taken += c.taken ? 'x' : '.';
    }
    rows.push_back({{"row", row.row}, {"zone", row.zone}, {"tiers", tiers}, {"taken", taken}});
  }
  return {{"rows", rows}, {"maxBlock", grid.max_block}};
}

Scenario load_scenario(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error &e) {
    throw Error("parse_error", std::string("scenario is not well-formed: ") + e.what());
  }
  return load_scenario_json(doc);
}

Scenario load_scenario_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("parse_error", "cannot read scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

Scenario load_scenario_json(const json &doc) {
  if (!doc.is_object()) invalid("scenario document must be an object");
  reject_unknown_keys(doc, {"workflow", "options", "seatGrids", "brief", "scriptedPreferences", "solution"},
                      "scenario");

  Scenario sc;
  sc.document_ = doc;

  try {
    // brief
    const json &brief = require(doc, "brief", "scenario");
    reject_unknown_keys(brief, {"id", "title", "background"}, "brief");
    sc.brief_.id = require(brief, "id", "brief").get<std::string>();
    sc.brief_.title = brief.value("title", sc.brief_.id);
    sc.brief_.background = brief.value("background", "");

    // workflow
    const json &wf = require(doc, "workflow", "scenario");
    reject_unknown_keys(wf, {"stages"}, "workflow");
    for (const auto &js : require(wf, "stages", "workflow")) {
      reject_unknown_keys(js, {"id", "title", "uiKind", "filterable", "attributeSpecs"}, "stage");
      StageDef stage;
      stage.id = require(js, "id", "stage").get<std::string>();
      stage.title = js.value("title", stage.id);
      stage.ui_kind = ui_kind_from_string(require(js, "uiKind", "stage '" + stage.id + "'").get<std::string>());
      stage.filterable = require(js, "filterable", "stage '" + stage.id + "'").get<bool>();
      const bool highlight_only = stage.ui_kind == UiKind::calendar || stage.ui_kind == UiKind::seat_map;
      if (stage.ui_kind != UiKind::confirmation && stage.filterable == highlight_only) {
        invalid("stage '" + stage.id + "': filterable must be " + (highlight_only ? "false" : "true") +
                " for uiKind " + std::string(to_string(stage.ui_kind)));
      }
      std::set<std::string> names;
      for (const auto &a : js.value("attributeSpecs", json::array())) {
        auto spec = parse_spec(a, "attribute of stage '" + stage.id + "'");
        if (!names.insert(spec.name).second) invalid("stage '" + stage.id + "' declares attribute '" + spec.name + "' twice");
        stage.attribute_specs.push_back(std::move(spec));
      }
      for (const auto &spec : stage.attribute_specs) {
        for (const auto &alias : spec.augment_as) {
          if (!stage.spec(alias)) invalid("augmentAs of '" + spec.name + "' names unknown attribute '" + alias + "'");
        }
      }
      if (sc.workflow_.stage(stage.id)) invalid("duplicate stage id '" + stage.id + "'");
      sc.workflow_.stages.push_back(std::move(stage));
    }
    if (sc.workflow_.stages.empty()) invalid("workflow has zero stages");
    for (std::size_t i = 0; i < sc.workflow_.stages.size(); ++i) {
      if (sc.workflow_.stages[i].is_terminal() && i + 1 != sc.workflow_.stages.size()) {
        invalid("confirmation stage '" + sc.workflow_.stages[i].id + "' must be the last stage");
      }
    }

    const auto &stages = sc.workflow_.stages;
    const json &options = require(doc, "options", "scenario");
    for (const auto &[stage_id, _] : options.items()) {
      const StageDef *st = sc.workflow_.stage(stage_id);
      if (!st) invalid("options reference unknown stage '" + stage_id + "'");
      if (st->is_terminal()) invalid("confirmation stage '" + stage_id + "' cannot have options");
      if (st->ui_kind == UiKind::seat_map) invalid("seatMap stage '" + stage_id + "' takes its options from seatGrids");
    }

    // Option universes for non-seat stages.
    std::map<std::string, std::map<std::string, std::vector<std::string>>> raw_availability;
    for (const auto &stage : stages) {
      if (stage.is_terminal() || stage.ui_kind == UiKind::seat_map) continue;
      if (!options.contains(stage.id)) invalid("missing options for stage '" + stage.id + "'");
      const json &so = options[stage.id];
      reject_unknown_keys(so, {"items", "availability"}, "options of stage '" + stage.id + "'");
      auto &universe = sc.universe_[stage.id];
      std::set<std::string> ids;
      for (const auto &ji : require(so, "items", "options of stage '" + stage.id + "'")) {
        auto item = parse_item(ji, stage);
        if (!ids.insert(item.id).second) invalid("duplicate option id '" + item.id + "' at stage '" + stage.id + "'");
        universe.push_back(std::move(item));
      }
      for (const auto &entry : require(so, "availability", "options of stage '" + stage.id + "'")) {
        reject_unknown_keys(entry, {"prefix", "ids"}, "availability entry");
        const auto prefix = require(entry, "prefix", "availability entry").get<std::vector<std::string>>();
        const std::size_t stage_index = static_cast<std::size_t>(sc.workflow_.index_of(stage.id));
        if (prefix.size() != stage_index) {
          invalid("availability prefix for stage '" + stage.id + "' must have " + std::to_string(stage_index) + " entries");
        }
        for (std::size_t k = 0; k < prefix.size(); ++k) {
          if (!sc.option(stages[k].id, prefix[k])) {
            invalid("availability for stage '" + stage.id + "' references unknown " + stages[k].id + " id '" + prefix[k] + "'");
          }
        }
        auto ids_here = require(entry, "ids", "availability entry").get<std::vector<std::string>>();
        for (const auto &id : ids_here) {
          if (!ids.count(id)) invalid("availability for stage '" + stage.id + "' references unknown option '" + id + "'");
        }
        std::string key;
        for (std::size_t k = 0; k < prefix.size(); ++k) key += (k ? "/" : "") + prefix[k];
        if (!raw_availability[stage.id].emplace(key, std::move(ids_here)).second) {
          invalid("duplicate availability prefix '" + key + "' for stage '" + stage.id + "'");
        }
      }
    }

    // Seat grids.
    std::map<std::string, SeatGrid> grids;
    if (doc.contains("seatGrids")) {
      const StageDef *seat_stage = nullptr;
      for (const auto &s : stages) {
        if (s.ui_kind == UiKind::seat_map) seat_stage = &s;
      }
      if (!seat_stage) invalid("seatGrids given but no seatMap stage");
      const std::size_t seat_index = static_cast<std::size_t>(sc.workflow_.index_of(seat_stage->id));
      for (const auto &jg : doc["seatGrids"]) {
        const auto prefix = require(jg, "prefix", "seat grid").get<std::vector<std::string>>();
        if (prefix.size() != seat_index) invalid("seat grid prefix must have " + std::to_string(seat_index) + " entries");
        for (std::size_t k = 0; k < prefix.size(); ++k) {
          if (!sc.option(stages[k].id, prefix[k])) {
            invalid("seat grid references unknown " + stages[k].id + " id '" + prefix[k] + "'");
          }
        }
        std::string key;
        for (std::size_t k = 0; k < prefix.size(); ++k) key += (k ? "/" : "") + prefix[k];
        if (!grids.emplace(key, parse_grid(jg)).second) invalid("duplicate seat grid prefix '" + key + "'");
      }
    }

    // Walk reachable prefixes; availability must be total over them and every
    // declared entry must be reachable.
    std::set<std::string> used_keys;
    std::function<void(Path &)> walk = [&](Path &prefix) {
      if (prefix.size() >= stages.size()) return;
      const StageDef &stage = stages[prefix.size()];
      if (stage.is_terminal()) return;
      const std::string key = prefix_key(prefix);
      std::vector<std::string> ids;
      if (stage.ui_kind == UiKind::seat_map) {
        auto g = grids.find(key);
        if (g == grids.end()) invalid("no seat grid for reachable prefix '" + key + "'");
        used_keys.insert("seat:" + key);
        auto &universe = sc.universe_[stage.id];
        for (auto &block : seat_blocks(g->second)) {
          ids.push_back(block.id);
          auto same = std::find_if(universe.begin(), universe.end(), [&](const OptionItem &o) { return o.id == block.id; });
          if (same == universe.end()) {
            universe.push_back(std::move(block));
          } else if (*same != block) {
            invalid("seat block '" + block.id + "' has different tier or zone across seat grids");
          }
        }
        sc.seat_grids_.emplace(key, g->second);
      } else {
        auto &table = raw_availability[stage.id];
        auto it = table.find(key);
        if (it == table.end()) invalid("availability for stage '" + stage.id + "' is missing reachable prefix '" + key + "'");
        used_keys.insert(stage.id + ":" + key);
        ids = it->second;
      }
      if (sc.availability_.count(key)) return;
      sc.availability_.emplace(key, ids);
      for (const auto &id : ids) {
        prefix.push_back({stage.id, id});
        walk(prefix);
        prefix.pop_back();
      }
    };
    Path root;
    walk(root);
    for (const auto &[stage_id, table] : raw_availability) {
      for (const auto &[key, _] : table) {
        if (!used_keys.count(stage_id + ":" + key)) {
          invalid("availability for stage '" + stage_id + "' lists unreachable prefix '" + key + "'");
        }
      }
    }
    for (const auto &[key, _] : grids) {
      if (!used_keys.count("seat:" + key)) invalid("seat grid lists unreachable prefix '" + key + "'");
    }
    // Merged seat universe in row-major order regardless of grid visit order.
    for (const auto &stage : stages) {
      if (stage.ui_kind != UiKind::seat_map) continue;
      auto &universe = sc.universe_[stage.id];
      auto key_of = [](const OptionItem &o) {
        const auto &row = std::get<std::string>(o.attributes.at("row"));
        return std::make_tuple(row, std::stoi(o.id.substr(row.size())), std::get<double>(o.attributes.at("count")));
      };
      std::stable_sort(universe.begin(), universe.end(),
                       [&](const OptionItem &a, const OptionItem &b) { return key_of(a) < key_of(b); });
    }
    // Seat blocks carry a fixed attribute set; make sure the stage declares it.
    for (const auto &stage : stages) {
      if (stage.ui_kind != UiKind::seat_map) continue;
      for (const char *name : {"count", "tier", "zone", "row"}) {
        if (!stage.spec(name)) invalid("seatMap stage '" + stage.id + "' must declare attribute '" + std::string(name) + "'");
      }
    }

    parse_scripted(sc, doc, sc.scripted_, sc.workflow_);

    // solution
    const auto sol = require(doc, "solution", "scenario").get<std::vector<std::string>>();
    if (sol.size() != sc.selectable_stage_count()) invalid("solution must select one option per non-confirmation stage");
    Path solution;
    for (std::size_t k = 0; k < sol.size(); ++k) {
      const auto *ids = sc.available_ids(solution);
      if (!ids || std::find(ids->begin(), ids->end(), sol[k]) == ids->end()) {
        invalid("solution option '" + sol[k] + "' is not available at stage '" + stages[k].id + "'");
      }
      solution.push_back({stages[k].id, sol[k]});
    }
    sc.solution_ = std::move(solution);
  } catch (const json::exception &e) {
    invalid(std::string("malformed scenario field: ") + e.what());
  }
  return sc;
}

namespace {

void parse_scripted(Scenario &sc, const json &doc, std::vector<ScriptedPreference> &out, const WorkflowDef &wf) {
  if (!doc.contains("scriptedPreferences")) return;
  for (const auto &[stage_id, list] : doc["scriptedPreferences"].items()) {
    const StageDef *stage = wf.stage(stage_id);
    if (!stage) invalid("scriptedPreferences reference unknown stage '" + stage_id + "'");
    for (const auto &jp : list) {
      reject_unknown_keys(jp, {"description", "strength", "constraints", "cases", "objective"}, "scripted preference");
      ScriptedPreference p;
      p.stage_id = stage_id;
      p.description = require(jp, "description", "scripted preference").get<std::string>();
      const auto strength = require(jp, "strength", "scripted preference").get<std::string>();
      if (strength != "hard" && strength != "soft") invalid("strength must be hard or soft");
      p.hard = strength == "hard";
      auto check = [&](const json &constraints) {
        for (const auto &jc : constraints) {
          auto c = prefs::constraint_from_json(jc);
          const AttributeSpec *spec = stage->spec(c.attribute);
          if (!spec) invalid("scripted constraint on unknown attribute '" + c.attribute + "' at stage '" + stage_id + "'");
          try {
            prefs::check_kinds(c, *spec);
          } catch (const Error &e) {
            invalid(e.what());
          }
        }
      };
      if (jp.contains("constraints")) {
        p.constraints = jp["constraints"];
        check(p.constraints);
      }
      for (const auto &jcase : jp.value("cases", json::array())) {
        ScriptedCase sc_case;
        for (const auto &[ws, ids] : jcase.at("when").items()) {
          if (!wf.stage(ws) || wf.index_of(ws) >= wf.index_of(stage_id)) {
            invalid("scripted case condition must name an earlier stage, got '" + ws + "'");
          }
          for (const auto &id : ids) {
            if (!sc.option(ws, id.get<std::string>())) invalid("scripted case references unknown option '" + id.get<std::string>() + "'");
            sc_case.when[ws].insert(id.get<std::string>());
          }
        }
        sc_case.constraints = jcase.at("constraints");
        check(sc_case.constraints);
        p.cases.push_back(std::move(sc_case));
      }
      if (jp.contains("objective")) {
        if (p.hard) invalid("hard scripted preference cannot carry an objective");
        p.objective = jp["objective"];
      }
      out.push_back(std::move(p));
    }
  }
}

} // namespace

std::vector<OptionItem> options_at(const Scenario &scenario, std::span<const PathSelection> prefix) {
  const auto &stages = scenario.workflow().stages;
  if (prefix.size() >= stages.size()) throw Error("unknown_prefix", "prefix already covers every stage");
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (prefix[k].stage_id != stages[k].id) {
      throw Error("unknown_prefix", "prefix entry " + std::to_string(k) + " must be stage '" + stages[k].id + "'");
    }
  }
  if (stages[prefix.size()].is_terminal()) return {};
  const auto *ids = scenario.available_ids(prefix);
  if (!ids) throw Error("unknown_prefix", "unknown prefix '" + prefix_key(prefix) + "'");
  const std::string &stage_id = stages[prefix.size()].id;
  std::vector<OptionItem> out;
  out.reserve(ids->size());
  // Catalog order is universe order.
  for (const auto &item : scenario.universe(stage_id)) {
    if (std::find(ids->begin(), ids->end(), item.id) != ids->end()) out.push_back(item);
  }
  return out;
}

std::vector<Path> enumerate_paths(const Scenario &scenario, std::size_t limit) {
  std::vector<Path> out;
  Path prefix;
  std::function<void()> dfs = [&]() {
    const StageDef *stage = scenario.stage_after(prefix);
    if (!stage || stage->is_terminal()) {
      if (out.size() >= limit) throw Error("scale_guard", "scenario exceeds " + std::to_string(limit) + " full paths");
      out.push_back(prefix);
      return;
    }
    for (const auto &item : options_at(scenario, prefix)) {
      prefix.push_back({stage->id, item.id});
      dfs();
      prefix.pop_back();
    }
  };
  dfs();
  return out;
}

bool scripted_satisfied(const Scenario &scenario, const ScriptedPreference &pref,
                        std::span<const PathSelection> prefix, const OptionItem &option) {
  const StageDef *stage = scenario.workflow().stage(pref.stage_id);
  auto holds = [&](const json &constraints) {
    for (const auto &jc : constraints) {
      const auto c = prefs::constraint_from_json(jc);
      if (!prefs::satisfies(c, option, stage ? stage->spec(c.attribute) : nullptr)) return false;
    }
    return true;
  };
  if (!pref.cases.empty()) {
    for (const auto &c : pref.cases) {
      bool match = true;
      for (const auto &[ws, ids] : c.when) {
        auto it = std::find_if(prefix.begin(), prefix.end(), [&](const PathSelection &s) { return s.stage_id == ws; });
        if (it == prefix.end() || !ids.count(it->option_id)) { match = false; break; }
      }
      if (match) return holds(c.constraints);
    }
    return true;
  }
  return holds(pref.constraints);
}

UniqueSolutionReport validate_unique_solution(const Scenario &scenario) {
  UniqueSolutionReport report;
  for (const auto &path : enumerate_paths(scenario)) {
    bool ok = true;
    for (const auto &pref : scenario.scripted_preferences()) {
      if (!pref.hard) continue;
      const int idx = scenario.workflow().index_of(pref.stage_id);
      if (idx < 0 || static_cast<std::size_t>(idx) >= path.size()) continue;
      const OptionItem *opt = scenario.option(pref.stage_id, path[idx].option_id);
      if (!opt || !scripted_satisfied(scenario, pref, std::span(path).first(idx), *opt)) { ok = false; break; }
    }
    if (ok) {
      ++report.solution_count;
      report.witness_paths.push_back(path);
    }
  }
  report.matches_declared = report.solution_count == 1 && report.witness_paths.front() == scenario.solution();
  return report;
}

} // namespace maestro::catalog
