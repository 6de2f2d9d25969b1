#pragma once

#include "maestro/agent.hpp"
#include "maestro/catalog.hpp"
#include "maestro/harness.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

using namespace maestro;

inline std::string source_path(const std::string &rel) { return std::string(MAESTRO_SOURCE_DIR) + "/" + rel; }

inline std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline catalog::ScenarioPtr scenario(const std::string &rel) {
  return std::make_shared<const catalog::Scenario>(catalog::load_scenario_file(source_path(rel)));
}

inline catalog::ScenarioPtr fixture(const std::string &name) { return scenario("tests/fixtures/" + name + ".json"); }

inline const char *kParents = "data/scenarios/parents-anniversary-gift.json";
inline const char *kSibling = "data/scenarios/sibling-b-movie-comedy-night.json";

inline harness::Persona persona(const std::string &id) {
  return harness::load_persona_file(source_path("data/personas/" + id + ".json"));
}

inline agent::Agent make_agent(const catalog::ScenarioPtr &sc, agent::Mode mode = agent::Mode::maestro) {
  agent::AgentConfig cfg;
  cfg.mode = mode;
  cfg.clock = agent::logical_clock();
  return agent::Agent(sc, std::make_shared<nlu::RulesProvider>(), cfg);
}

inline agent::GuiAction select(const std::string &id) {
  agent::GuiAction a;
  a.kind = agent::GuiAction::Kind::select;
  a.option_id = id;
  return a;
}

inline agent::GuiAction next() {
  agent::GuiAction a;
  a.kind = agent::GuiAction::Kind::next;
  return a;
}

inline agent::GuiAction back(const std::string &stage = "") {
  agent::GuiAction a;
  a.kind = agent::GuiAction::Kind::back;
  a.target_stage = stage;
  return a;
}

inline std::vector<agent::AgentEvent> of_kind(const std::vector<agent::AgentEvent> &events, agent::EventKind kind) {
  std::vector<agent::AgentEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out), [&](const auto &e) { return e.kind == kind; });
  return out;
}

inline std::vector<std::string> ids(const json &arr) {
  std::vector<std::string> out;
  for (const auto &x : arr) out.push_back(x.is_string() ? x.get<std::string>() : x.at("id").get<std::string>());
  return out;
}

// Last guiSnapshot view in a batch of events.
inline json last_view(const std::vector<agent::AgentEvent> &events) {
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    if (it->kind == agent::EventKind::gui_snapshot) return it->payload.at("view");
  }
  return json();
}

// Depth-first enumeration over the raw scenario document, independent of the
// catalog's own enumeration. Seat stages are skipped by the callers that use
// this (they go through seat grids); the visitor sees option attribute maps.
struct RawWalker {
  json doc;
  std::vector<std::string> stage_ids;

  explicit RawWalker(const json &d) : doc(d) {
    for (const auto &s : doc["workflow"]["stages"]) {
      if (s.value("uiKind", "") != "confirmation") stage_ids.push_back(s["id"].get<std::string>());
    }
  }

  std::vector<std::pair<std::string, json>> options(const std::vector<std::string> &prefix) const {
    std::vector<std::pair<std::string, json>> out;
    const std::string &stage = stage_ids[prefix.size()];
    if (doc["options"].contains(stage)) {
      const json &block = doc["options"][stage];
      for (const auto &row : block["availability"]) {
        if (row["prefix"].get<std::vector<std::string>>() != prefix) continue;
        for (const auto &id : row["ids"]) {
          for (const auto &item : block["items"]) {
            if (item["id"] == id) out.emplace_back(id.get<std::string>(), item.value("attributes", json::object()));
          }
        }
      }
      return out;
    }
    for (const auto &g : doc.value("seatGrids", json::array())) {
      if (g["prefix"].get<std::vector<std::string>>() != prefix) continue;
      const int max_block = g.value("maxBlock", 4);
      for (const auto &row : g["rows"]) {
        const std::string r = row["row"], tiers = row["tiers"], taken = row["taken"];
        for (int a = 0; a < static_cast<int>(taken.size()); ++a) {
          for (int n = 1; n <= max_block && a + n <= static_cast<int>(taken.size()); ++n) {
            if (taken[static_cast<std::size_t>(a + n - 1)] == 'x') break;
            int p = 0;
            for (int k = a; k < a + n; ++k) p += tiers[static_cast<std::size_t>(k)] == 'p';
            const std::string id = r + std::to_string(a + 1) + (n > 1 ? "-" + r + std::to_string(a + n) : "");
            out.emplace_back(id, json{{"count", n}, {"tier", p == n ? "premium" : p == 0 ? "standard" : "mixed"}, {"zone", row["zone"]}, {"row", r}});
          }
        }
      }
    }
    return out;
  }

  void walk(const std::function<void(const std::vector<std::string> &, const std::vector<json> &)> &leaf) const {
    std::vector<std::string> prefix;
    std::vector<json> attrs;
    std::function<void()> rec = [&] {
      if (prefix.size() == stage_ids.size()) {
        leaf(prefix, attrs);
        return;
      }
      for (const auto &[id, a] : options(prefix)) {
        prefix.push_back(id);
        attrs.push_back(a);
        rec();
        prefix.pop_back();
        attrs.pop_back();
      }
    };
    rec();
  }
};

} // namespace testutil
