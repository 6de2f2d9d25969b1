#include "maestro/adaptation.hpp"

#include <algorithm>
#include <cmath>

namespace maestro::adapt {

using catalog::AttributeSpec;
using catalog::OptionItem;
using catalog::StageDef;
using prefs::PreferenceRecord;

namespace {

struct SortKey {
  std::string attribute;
  SortDirection direction;
  const AttributeSpec *spec;
};

// Strict weak order over options for a list of sort keys. Options missing a
// key attribute sort after those that have it.
bool key_less(const OptionItem &a, const OptionItem &b, const std::vector<SortKey> &keys) {
  for (const auto &k : keys) {
    const Value *va = a.attribute(k.attribute);
    const Value *vb = b.attribute(k.attribute);
    if (!va || !vb) {
      if (!va && !vb) continue;
      return va != nullptr;
    }
    const auto c = prefs::compare_values(*va, *vb, k.spec);
    if (!c || *c == 0) continue;
    return k.direction == SortDirection::asc ? *c < 0 : *c > 0;
  }
  return false;
}

bool key_equal(const OptionItem &a, const OptionItem &b, const std::vector<SortKey> &keys) {
  return !key_less(a, b, keys) && !key_less(b, a, keys);
}

std::string join_and(const std::vector<std::string> &parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += i + 1 == parts.size() ? " and " : ", ";
    out += parts[i];
  }
  return out;
}

std::vector<std::string> ids_of(const std::vector<OptionItem> &options) {
  std::vector<std::string> out;
  for (const auto &o : options) out.push_back(o.id);
  return out;
}

std::vector<std::string> labels_of(const std::vector<OptionItem> &options, const std::vector<std::string> &ids) {
  std::vector<std::string> out;
  for (const auto &o : options) {
    if (std::find(ids.begin(), ids.end(), o.id) != ids.end()) out.push_back(o.label);
  }
  return out;
}

std::string duration_text(double minutes) {
  const int m = static_cast<int>(std::lround(minutes));
  if (m < 60) return std::to_string(m) + "m";
  if (m % 60 == 0) return std::to_string(m / 60) + "h";
  return std::to_string(m / 60) + "h " + std::to_string(m % 60) + "m";
}

json option_to_json(const OptionItem &o) {
  json attrs = json::object();
  for (const auto &[k, v] : o.attributes) attrs[k] = value_to_json(v);
  return {{"id", o.id}, {"label", o.label}, {"attributes", attrs}};
}

OptionItem option_from_json(const json &j) {
  OptionItem o;
  o.id = j.at("id").get<std::string>();
  o.label = j.at("label").get<std::string>();
  for (const auto &[k, v] : j.at("attributes").items()) o.attributes[k] = value_from_json(v);
  return o;
}

} // namespace

std::string_view to_string(ActionKind kind) {
  switch (kind) {
  case ActionKind::augment: return "augment";
  case ActionKind::filter: return "filter";
  case ActionKind::sort: return "sort";
  case ActionKind::highlight: return "highlight";
  }
  return "augment";
}

std::string_view to_string(Intent intent) { return intent == Intent::reduce ? "reduce" : "emphasize"; }

std::string_view to_string(SortDirection dir) { return dir == SortDirection::asc ? "asc" : "desc"; }

std::string render_value(const Value &value, const AttributeSpec &spec) {
  if (const auto *b = as_bool(value)) {
    return *b ? spec.display_name() + " Available" : "No " + spec.display_name();
  }
  if (const auto *n = as_number(value)) {
    if (spec.unit == "min") return duration_text(*n);
    if (spec.unit == "clock") return spec.display ? *spec.display + " " + clock_text(*n) : clock_text(*n);
    if (spec.unit && spec.unit->starts_with("/")) return value_to_string(value) + *spec.unit;
    if (spec.unit) return value_to_string(value) + " " + *spec.unit;
    if (spec.display) return value_to_string(value) + " " + *spec.display;
    return value_to_string(value);
  }
  return value_to_string(value);
}

std::string render_label(const OptionItem &item, const std::vector<std::string> &attributes,
                         const std::vector<AttributeSpec> &specs, std::vector<std::string> *warnings) {
  std::vector<std::string> parts;
  for (const auto &attr : attributes) {
    const Value *v = item.attribute(attr);
    const auto spec = std::find_if(specs.begin(), specs.end(), [&](const AttributeSpec &s) { return s.name == attr; });
    if (!v || spec == specs.end()) {
      if (warnings) warnings->push_back("option '" + item.id + "' has no attribute '" + attr + "'");
      continue;
    }
    parts.push_back(render_value(*v, *spec));
  }
  if (parts.empty()) return item.label;
  std::string out = item.label + " — ";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

Plan plan_adaptations(const StageDef &stage, const std::vector<OptionItem> &options,
                      const std::vector<PreferenceRecord> &records, const Templates &templates) {
  Plan plan;
  std::vector<const PreferenceRecord *> usable;
  for (const auto &r : records) {
    if (!stage.spec(r.attribute())) {
      plan.warnings.push_back("preference " + r.id + " reads '" + r.attribute() + "', which stage '" + stage.id +
                              "' does not declare");
      continue;
    }
    if (r.hard() && !std::holds_alternative<prefs::Constraint>(r.compiled)) {
      plan.warnings.push_back("hard preference " + r.id + " is not a constraint");
      continue;
    }
    usable.push_back(&r);
  }
  if (usable.empty()) return plan;

  const std::string noun = templates.noun(stage.id, false);
  const std::string nouns = templates.noun(stage.id, true);

  // Augment: referenced attributes, surfaced through augmentAs, in the
  // stage's declaration order.
  std::set<std::string> surfaced;
  for (const auto *r : usable) {
    const auto *spec = stage.spec(r->attribute());
    if (spec->augment_as.empty()) {
      surfaced.insert(spec->name);
    } else {
      surfaced.insert(spec->augment_as.begin(), spec->augment_as.end());
    }
  }
  AdaptationAction augment;
  augment.kind = ActionKind::augment;
  std::vector<std::string> shown_names;
  for (const auto &spec : stage.attribute_specs) {
    if (surfaced.count(spec.name)) {
      augment.attributes.push_back(spec.name);
      shown_names.push_back(spec.display_name());
    }
  }
  for (const auto *r : usable) augment.linked_preference_ids.push_back(r->id);
  augment.banner = templates.render("banners", "augment", {{"attributes", join_and(shown_names)}, {"noun", noun}});

  std::vector<AdaptationAction> filters, sorts, reduce_highlights, emphasis;
  std::vector<SortKey> keys;

  // Options meeting every hard constraint; soft highlights and the optimum
  // are chosen among these.
  std::vector<OptionItem> feasible;
  for (const auto &o : options) {
    bool ok = true;
    for (const auto *r : usable) {
      if (!r->hard()) continue;
      const auto &c = std::get<prefs::Constraint>(r->compiled);
      if (!prefs::satisfies(c, o, stage.spec(c.attribute))) ok = false;
    }
    if (ok) feasible.push_back(o);
  }

  for (const auto *r : usable) {
    const auto *spec = stage.spec(r->attribute());
    if (r->hard()) {
      const auto &c = std::get<prefs::Constraint>(r->compiled);
      AdaptationAction a;
      a.linked_preference_ids = {r->id};
      if (stage.filterable) {
        a.kind = ActionKind::filter;
        a.constraint = c;
        a.banner = templates.render("banners", "filter", {{"nouns", nouns}, {"condition", prefs::describe(c, spec)}});
        filters.push_back(std::move(a));
      } else {
        a.kind = ActionKind::highlight;
        a.intent = Intent::reduce;
        for (const auto &o : options) {
          if (prefs::satisfies(c, o, spec)) a.option_ids.push_back(o.id);
        }
        a.banner = a.option_ids.empty()
                       ? templates.render("banners", "highlight.none", {{"nouns", nouns}, {"condition", prefs::describe(c, spec)}})
                       : templates.render("banners", "highlight.reduce",
                                          {{"nouns", nouns}, {"labels", join_and(labels_of(options, a.option_ids))}});
        reduce_highlights.push_back(std::move(a));
      }
      continue;
    }
    if (const auto *obj = std::get_if<prefs::Objective>(&r->compiled); obj && obj->is_directional()) {
      AdaptationAction a;
      a.kind = ActionKind::sort;
      a.sort_attribute = obj->attribute;
      a.direction = *obj->direction == prefs::Direction::minimize ? SortDirection::asc : SortDirection::desc;
      a.linked_preference_ids = {r->id};
      a.banner = templates.render("banners", "sort", {{"nouns", nouns}, {"attribute", spec->display_name()}});
      keys.push_back({a.sort_attribute, a.direction, spec});
      sorts.push_back(std::move(a));
      continue;
    }
    AdaptationAction a;
    a.kind = ActionKind::highlight;
    a.intent = Intent::emphasize;
    a.linked_preference_ids = {r->id};
    for (const auto &o : feasible) {
      bool match = false;
      if (const auto *obj = std::get_if<prefs::Objective>(&r->compiled)) {
        const Value *v = o.attribute(obj->attribute);
        match = v && std::find(obj->prefer_set.begin(), obj->prefer_set.end(), *v) != obj->prefer_set.end();
      } else {
        match = prefs::satisfies(std::get<prefs::Constraint>(r->compiled), o, spec) &&
                o.attribute(r->attribute()) != nullptr;
      }
      if (match) a.option_ids.push_back(o.id);
    }
    if (a.option_ids.empty()) continue;
    a.banner = templates.render("banners", "highlight.emphasize", {{"labels", join_and(labels_of(options, a.option_ids))}});
    emphasis.push_back(std::move(a));
  }

  if (!sorts.empty() && !feasible.empty()) {
    std::stable_sort(feasible.begin(), feasible.end(),
                     [&](const OptionItem &a, const OptionItem &b) { return key_less(a, b, keys); });
    AdaptationAction best;
    best.kind = ActionKind::highlight;
    best.intent = Intent::emphasize;
    std::vector<std::string> tied;
    for (const auto &o : feasible) {
      if (key_equal(o, feasible.front(), keys)) tied.push_back(o.id);
    }
    for (const auto &o : options) {
      if (std::find(tied.begin(), tied.end(), o.id) != tied.end()) best.option_ids.push_back(o.id);
    }
    for (const auto *r : usable) {
      const auto *obj = std::get_if<prefs::Objective>(&r->compiled);
      if (r->hard() || (obj && obj->is_directional())) best.linked_preference_ids.push_back(r->id);
    }
    best.banner = templates.render("banners", "highlight.emphasize", {{"labels", join_and(labels_of(options, best.option_ids))}});
    emphasis.push_back(std::move(best));
  }

  plan.actions.push_back(std::move(augment));
  for (auto *group : {&filters, &sorts, &reduce_highlights, &emphasis}) {
    for (auto &a : *group) plan.actions.push_back(std::move(a));
  }
  return plan;
}

AdaptedView apply(const StageDef &stage, const std::vector<OptionItem> &options, const std::vector<AdaptationAction> &plan) {
  AdaptedView view;
  view.stage_id = stage.id;
  view.applied_actions = plan;

  std::vector<std::string> attrs;
  std::vector<const prefs::Constraint *> filters;
  std::vector<SortKey> keys;
  std::set<std::string> highlight_ids;
  for (const auto &a : plan) {
    switch (a.kind) {
    case ActionKind::augment:
      for (const auto &name : a.attributes) {
        if (std::find(attrs.begin(), attrs.end(), name) == attrs.end()) attrs.push_back(name);
      }
      break;
    case ActionKind::filter:
      if (a.constraint) filters.push_back(&*a.constraint);
      break;
    case ActionKind::sort: keys.push_back({a.sort_attribute, a.direction, stage.spec(a.sort_attribute)}); break;
    case ActionKind::highlight: highlight_ids.insert(a.option_ids.begin(), a.option_ids.end()); break;
    }
  }

  for (const auto &o : options) view.labels[o.id] = render_label(o, attrs, stage.attribute_specs);

  view.ordered_all = options;
  if (!keys.empty()) {
    std::stable_sort(view.ordered_all.begin(), view.ordered_all.end(),
                     [&](const OptionItem &a, const OptionItem &b) { return key_less(a, b, keys); });
  }
  for (const auto &o : view.ordered_all) {
    const bool pass = std::all_of(filters.begin(), filters.end(), [&](const prefs::Constraint *c) {
      return prefs::satisfies(*c, o, stage.spec(c->attribute));
    });
    if (pass) view.visible.push_back(o);
  }
  view.hidden_count = options.size() - view.visible.size();
  for (const auto &o : view.visible) {
    if (highlight_ids.count(o.id)) view.highlighted.insert(o.id);
  }
  return view;
}

AdaptedView show_all(const AdaptedView &view) {
  AdaptedView out = view;
  out.show_all_engaged = true;
  if (view.show_all_engaged) return out;
  std::set<std::string> shown;
  for (const auto &o : view.visible) shown.insert(o.id);
  out.visible = view.ordered_all;
  for (const auto &o : view.ordered_all) {
    if (!shown.count(o.id)) out.non_matching.insert(o.id);
  }
  out.hidden_count = 0;
  return out;
}

std::vector<std::string> candidate_ids(const AdaptedView &view) {
  std::vector<std::string> out;
  for (const auto &o : view.visible) {
    if (view.non_matching.count(o.id)) continue;
    const bool inside = std::all_of(view.applied_actions.begin(), view.applied_actions.end(), [&](const AdaptationAction &a) {
      if (a.kind != ActionKind::highlight || a.intent != Intent::reduce) return true;
      return std::find(a.option_ids.begin(), a.option_ids.end(), o.id) != a.option_ids.end();
    });
    if (inside) out.push_back(o.id);
  }
  return out;
}

json action_to_json(const AdaptationAction &a) {
  json params = json::object();
  switch (a.kind) {
  case ActionKind::augment: params["attributes"] = a.attributes; break;
  case ActionKind::filter: params["constraint"] = a.constraint ? prefs::constraint_to_json(*a.constraint) : json(); break;
  case ActionKind::sort:
    params["attribute"] = a.sort_attribute;
    params["direction"] = to_string(a.direction);
    break;
  case ActionKind::highlight:
    params["optionIds"] = a.option_ids;
    params["intent"] = to_string(a.intent);
    break;
  }
  return {{"kind", to_string(a.kind)}, {"params", params}, {"banner", a.banner}, {"linkedPreferenceIds", a.linked_preference_ids}};
}

AdaptationAction action_from_json(const json &j) {
  AdaptationAction a;
  const auto kind = j.at("kind").get<std::string>();
  const auto &p = j.at("params");
  if (kind == "augment") {
    a.kind = ActionKind::augment;
    a.attributes = p.at("attributes").get<std::vector<std::string>>();
  } else if (kind == "filter") {
    a.kind = ActionKind::filter;
    a.constraint = prefs::constraint_from_json(p.at("constraint"));
  } else if (kind == "sort") {
    a.kind = ActionKind::sort;
    a.sort_attribute = p.at("attribute").get<std::string>();
    a.direction = p.at("direction").get<std::string>() == "desc" ? SortDirection::desc : SortDirection::asc;
  } else if (kind == "highlight") {
    a.kind = ActionKind::highlight;
    a.option_ids = p.at("optionIds").get<std::vector<std::string>>();
    a.intent = p.at("intent").get<std::string>() == "reduce" ? Intent::reduce : Intent::emphasize;
  } else {
    throw Error("parse_error", "unknown adaptation kind '" + kind + "'");
  }
  a.banner = j.value("banner", "");
  a.linked_preference_ids = j.value("linkedPreferenceIds", std::vector<std::string>{});
  return a;
}

json view_to_json(const AdaptedView &view) {
  json options = json::array();
  for (const auto &o : view.ordered_all) options.push_back(option_to_json(o));
  json actions = json::array();
  for (const auto &a : view.applied_actions) actions.push_back(action_to_json(a));
  return {{"stageId", view.stage_id},
          {"visible", ids_of(view.visible)},
          {"labels", view.labels},
          {"highlighted", view.highlighted},
          {"nonMatching", view.non_matching},
          {"hiddenCount", view.hidden_count},
          {"showAllEngaged", view.show_all_engaged},
          {"appliedActions", actions},
          {"options", options}};
}

AdaptedView view_from_json(const json &j) {
  AdaptedView view;
  view.stage_id = j.at("stageId").get<std::string>();
  for (const auto &o : j.at("options")) view.ordered_all.push_back(option_from_json(o));
  for (const auto &id : j.at("visible")) {
    const auto it = std::find_if(view.ordered_all.begin(), view.ordered_all.end(),
                                 [&](const OptionItem &o) { return o.id == id.get<std::string>(); });
    if (it == view.ordered_all.end()) throw Error("parse_error", "view lists unknown visible option");
    view.visible.push_back(*it);
  }
  view.labels = j.at("labels").get<std::map<std::string, std::string>>();
  view.highlighted = j.at("highlighted").get<std::set<std::string>>();
  view.non_matching = j.at("nonMatching").get<std::set<std::string>>();
  view.hidden_count = j.at("hiddenCount").get<std::size_t>();
  view.show_all_engaged = j.at("showAllEngaged").get<bool>();
  for (const auto &a : j.at("appliedActions")) view.applied_actions.push_back(action_from_json(a));
  return view;
}

std::string view_hash(const AdaptedView &view) { return stable_hash(view_to_json(view).dump()); }

} // namespace maestro::adapt
