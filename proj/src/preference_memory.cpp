#include "maestro/preference_memory.hpp"

#include <algorithm>

namespace maestro::prefs {

namespace {

const catalog::AttributeSpec *spec_for(const PreferenceRecord &r, const catalog::WorkflowDef &wf) {
  for (const auto &sid : r.relevant_stages) {
    if (const auto *stage = wf.stage(sid)) {
      if (const auto *spec = stage->spec(r.attribute())) return spec;
    }
  }
  return nullptr;
}

bool stages_intersect(const std::vector<std::string> &a, const std::vector<std::string> &b) {
  return std::any_of(a.begin(), a.end(), [&](const std::string &s) { return std::find(b.begin(), b.end(), s) != b.end(); });
}

} // namespace

std::string_view to_string(ChangeKind kind) {
  switch (kind) {
  case ChangeKind::added: return "new";
  case ChangeKind::replaced: return "replaced";
  case ChangeKind::strengthened: return "strengthened";
  case ChangeKind::relaxed: return "relaxed";
  }
  return "new";
}

void validate_record(const PreferenceRecord &record, const catalog::WorkflowDef &workflow) {
  if (record.relevant_stages.empty()) throw Error("invalid_record", "relevantStages must not be empty");
  for (const auto &sid : record.relevant_stages) {
    if (!workflow.stage(sid)) throw Error("invalid_record", "relevantStages names unknown stage '" + sid + "'");
  }
  if (record.hard() && !std::holds_alternative<Constraint>(record.compiled)) {
    throw Error("invalid_record", "hard preferences compile to constraints only");
  }
  bool found = false;
  for (const auto &sid : record.relevant_stages) {
    const auto *spec = workflow.stage(sid)->spec(record.attribute());
    if (!spec) continue;
    found = true;
    std::visit([&](const auto &c) { check_kinds(c, *spec); }, record.compiled);
  }
  if (!found) {
    throw Error("invalid_record", "attribute '" + record.attribute() + "' is not declared by any relevant stage");
  }
}

ChangeNotice PreferenceMemory::upsert(PreferenceRecord candidate, const catalog::WorkflowDef &workflow) {
  validate_record(candidate, workflow);
  candidate.active = true;

  for (auto &r : records_) {
    if (r.active && r.strength == candidate.strength && r.compiled == candidate.compiled &&
        r.relevant_stages == candidate.relevant_stages) {
      r.origin_turn = candidate.origin_turn;
      return {r.id, {r.id}, ChangeKind::replaced};
    }
  }

  ChangeNotice notice;
  const PreferenceRecord *first = nullptr;
  for (auto &r : records_) {
    if (r.active && r.attribute() == candidate.attribute() && stages_intersect(r.relevant_stages, candidate.relevant_stages)) {
      r.active = false;
      notice.replaced_ids.push_back(r.id);
      if (!first) first = &r;
    }
  }
  if (first) {
    if (first->hard() && !candidate.hard()) {
      notice.kind = ChangeKind::relaxed;
    } else if (!first->hard() && candidate.hard()) {
      notice.kind = ChangeKind::strengthened;
    } else {
      notice.kind = ChangeKind::replaced;
      const auto *before = std::get_if<Constraint>(&first->compiled);
      const auto *after = std::get_if<Constraint>(&candidate.compiled);
      if (before && after) {
        switch (compare_width(*before, *after, spec_for(candidate, workflow))) {
        case Widening::wider: notice.kind = ChangeKind::relaxed; break;
        case Widening::narrower: notice.kind = ChangeKind::strengthened; break;
        default: break;
        }
      }
    }
  }
  if (candidate.id.empty() || find(candidate.id)) candidate.id = "p" + std::to_string(next_id_++);
  notice.record_id = candidate.id;
  records_.push_back(std::move(candidate));
  return notice;
}

InvalidationNotice PreferenceMemory::relax(const std::string &id) {
  for (auto &r : records_) {
    if (r.id == id) {
      if (!r.active) throw Error("unknown_record", "preference '" + id + "' is already inactive");
      r.active = false;
      return {id};
    }
  }
  throw Error("unknown_record", "no preference with id '" + id + "'");
}

std::vector<PreferenceRecord> PreferenceMemory::records_for_stage(const std::string &stage_id,
                                                                  const catalog::WorkflowDef &workflow) const {
  if (!workflow.stage(stage_id)) throw Error("unknown_stage", "unknown stage '" + stage_id + "'");
  std::vector<PreferenceRecord> out;
  for (const auto &r : records_) {
    if (r.active && std::find(r.relevant_stages.begin(), r.relevant_stages.end(), stage_id) != r.relevant_stages.end()) {
      out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const PreferenceRecord &a, const PreferenceRecord &b) {
    if (a.hard() != b.hard()) return a.hard();
    return a.origin_turn < b.origin_turn;
  });
  return out;
}

std::vector<PreferenceRecord> PreferenceMemory::active() const {
  std::vector<PreferenceRecord> out;
  std::copy_if(records_.begin(), records_.end(), std::back_inserter(out), [](const auto &r) { return r.active; });
  return out;
}

const PreferenceRecord *PreferenceMemory::find(const std::string &id) const {
  for (const auto &r : records_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

json record_to_json(const PreferenceRecord &r) {
  return {{"id", r.id},
          {"description", r.description},
          {"strength", r.hard() ? "hard" : "soft"},
          {"relevantStages", r.relevant_stages},
          {"compiled", prefs::to_json(r.compiled)},
          {"originTurn", r.origin_turn},
          {"active", r.active}};
}

PreferenceRecord record_from_json(const json &j) {
  try {
    PreferenceRecord r;
    r.id = j.value("id", "");
    r.description = j.at("description").get<std::string>();
    const auto strength = j.value("strength", "soft");
    if (strength != "hard" && strength != "soft") throw Error("invalid_record", "strength must be hard or soft");
    r.strength = strength == "hard" ? Strength::hard : Strength::soft;
    r.relevant_stages = j.at("relevantStages").get<std::vector<std::string>>();
    r.compiled = compiled_from_json(j.at("compiled"));
    r.origin_turn = j.value("originTurn", 0);
    r.active = j.value("active", true);
    return r;
  } catch (const json::exception &e) {
    throw Error("invalid_record", std::string("malformed preference record: ") + e.what());
  }
}

json PreferenceMemory::to_json() const {
  json records = json::array();
  for (const auto &r : records_) records.push_back(record_to_json(r));
  return {{"records", records}, {"nextId", next_id_}};
}

PreferenceMemory PreferenceMemory::from_json(const json &j) {
  PreferenceMemory m;
  for (const auto &r : j.at("records")) m.records_.push_back(record_from_json(r));
  m.next_id_ = j.value("nextId", static_cast<int>(m.records_.size()) + 1);
  return m;
}

} // namespace maestro::prefs
