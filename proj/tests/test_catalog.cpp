#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace maestro;
using testutil::fixture;
using testutil::scenario;

namespace {

std::vector<std::string> option_ids(const std::vector<catalog::OptionItem> &items) {
  std::vector<std::string> out;
  for (const auto &o : items) out.push_back(o.id);
  return out;
}

Error load_error(const std::string &text) {
  try {
    catalog::load_scenario(text);
  } catch (const Error &e) {
    return e;
  }
  return Error("none", "loaded");
}

// Own reading of scripted constraints over raw attribute maps.
bool raw_holds(const json &c, const json &attrs, const json &specs) {
  std::string attr = c.value("attribute", "");
  const std::string cmp = c["comparator"];
  const json &val = c["value"];
  if (cmp == "predicate") {
    const std::string name = val["name"];
    attr = name == "tierIs" ? "tier" : name == "startsAfter" ? "start" : name == "endsBy" ? "end" : "count";
  }
  if (!attrs.contains(attr)) return true;
  const json &v = attrs[attr];
  auto rank = [&](const json &x) -> double {
    for (const auto &s : specs) {
      if (s["name"] == attr && s.contains("order")) {
        const auto order = s["order"].get<std::vector<std::string>>();
        return static_cast<double>(std::find(order.begin(), order.end(), x.get<std::string>()) - order.begin());
      }
    }
    return x.get<double>();
  };
  if (cmp == "eq") return v == val;
  if (cmp == "neq") return v != val;
  if (cmp == "le") return rank(v) <= rank(val);
  if (cmp == "ge") return rank(v) >= rank(val);
  if (cmp == "inSet") return std::find(val.begin(), val.end(), v) != val.end();
  if (cmp == "between") return rank(v) >= rank(val[0]) && rank(v) <= rank(val[1]);
  const std::string name = val["name"];
  const json &arg = val["args"][0];
  if (name == "tierIs") return v == arg;
  if (name == "startsAfter") return v.get<double>() > arg.get<double>();
  if (name == "endsBy") return v.get<double>() <= arg.get<double>();
  return v.get<double>() == arg.get<double>();
}

// Independent depth-first count of full paths meeting every hard scripted
// preference.
std::vector<std::vector<std::string>> raw_solutions(const json &doc) {
  testutil::RawWalker w(doc);
  std::map<std::string, json> specs;
  for (const auto &s : doc["workflow"]["stages"]) specs[s["id"]] = s["attributeSpecs"];
  std::vector<std::vector<std::string>> out;
  w.walk([&](const std::vector<std::string> &path, const std::vector<json> &attrs) {
    for (std::size_t i = 0; i < w.stage_ids.size(); ++i) {
      const std::string &stage = w.stage_ids[i];
      for (const auto &pref : doc["scriptedPreferences"].value(stage, json::array())) {
        if (pref.value("strength", "soft") != "hard") continue;
        json constraints = pref.value("constraints", json::array());
        if (pref.contains("cases")) {
          constraints = json::array();
          for (const auto &c : pref["cases"]) {
            bool match = true;
            for (const auto &[ws, allowed] : c["when"].items()) {
              const auto at = std::find(w.stage_ids.begin(), w.stage_ids.end(), ws) - w.stage_ids.begin();
              if (std::find(allowed.begin(), allowed.end(), path[static_cast<std::size_t>(at)]) == allowed.end()) match = false;
            }
            if (match) {
              constraints = c["constraints"];
              break;
            }
          }
        }
        for (const auto &c : constraints) {
          if (!raw_holds(c, attrs[i], specs[stage])) return;
        }
      }
    }
    out.push_back(path);
  });
  return out;
}

} // namespace

TEST(Catalog, ParentsScenarioShape) {
  const auto sc = scenario(testutil::kParents);
  EXPECT_EQ(sc->workflow().stages.size(), 6u);
  EXPECT_EQ(sc->brief().title, "Parents Anniversary Gift");
  bool seat_pref = false;
  for (const auto &p : sc->scripted_preferences()) {
    if (p.stage_id == "seat" && p.hard && p.description.find("Two adjacent premium seats") != std::string::npos) seat_pref = true;
  }
  EXPECT_TRUE(seat_pref);
}

TEST(Catalog, SiblingScenarioTitle) {
  EXPECT_EQ(scenario(testutil::kSibling)->brief().title, "Sibling B-Movie Comedy Night");
}

TEST(Catalog, ZeroStagesRejected) {
  const Error e = load_error(testutil::read_text(testutil::source_path("tests/fixtures/zero_stage.json")));
  EXPECT_EQ(e.code(), "validation_error");
}

TEST(Catalog, DanglingIdNamed) {
  const Error e = load_error(testutil::read_text(testutil::source_path("tests/fixtures/dangling_id.json")));
  EXPECT_EQ(e.code(), "validation_error");
  EXPECT_NE(std::string(e.what()).find("ghost-theater"), std::string::npos) << e.what();
}

TEST(Catalog, MalformedIsParseError) {
  EXPECT_EQ(load_error(testutil::read_text(testutil::source_path("tests/fixtures/malformed.json"))).code(), "parse_error");
  EXPECT_EQ(load_error("{\"workflow\":").code(), "parse_error");
}

TEST(Catalog, UnknownTopLevelKeyRejected) {
  json doc = fixture("kid_movie")->document();
  doc["extra"] = 1;
  EXPECT_THROW(catalog::load_scenario_json(doc), Error);
}

TEST(Catalog, FilterableMatchesUiKind) {
  json doc = fixture("kid_movie")->document();
  doc["workflow"]["stages"][0]["filterable"] = false;  // buttonGroup must be filterable
  EXPECT_THROW(catalog::load_scenario_json(doc), Error);
}

TEST(Catalog, KidMovieOptionsInCatalogOrder) {
  const auto sc = fixture("kid_movie");
  const auto opts = catalog::options_at(*sc, {});
  std::vector<std::string> labels;
  for (const auto &o : opts) labels.push_back(o.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"Lantern Bakery", "Maple Detectives", "Sky Circus Express", "Pocket Parade"}));
}

TEST(Catalog, ImaxTheatersAfterMovie) {
  const auto sc = fixture("imax_theaters");
  const Path prefix{{"movie", "starfall-circuit"}};
  std::vector<std::string> labels;
  for (const auto &o : catalog::options_at(*sc, prefix)) labels.push_back(o.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"CloseUp 12", "Riverview 8", "Cedar Commons 6"}));
}

TEST(Catalog, ConfirmationStageHasNoOptions) {
  const auto sc = fixture("imax_theaters");
  const auto paths = catalog::enumerate_paths(*sc);
  ASSERT_FALSE(paths.empty());
  EXPECT_TRUE(catalog::options_at(*sc, paths.front()).empty());
  EXPECT_TRUE(sc->stage_after(paths.front())->is_terminal());
}

TEST(Catalog, UnknownPrefixThrows) {
  const auto sc = fixture("imax_theaters");
  EXPECT_THROW(catalog::options_at(*sc, Path{{"movie", "nope"}}), Error);
}

TEST(Catalog, OptionsAtIsPureAndWithinUniverse) {
  const auto sc = scenario(testutil::kParents);
  for (const auto &path : catalog::enumerate_paths(*sc)) {
    for (std::size_t k = 0; k < path.size(); ++k) {
      const std::span<const PathSelection> pre(path.data(), k);
      const auto a = catalog::options_at(*sc, pre);
      EXPECT_EQ(option_ids(a), option_ids(catalog::options_at(*sc, pre)));
      for (const auto &o : a) ASSERT_NE(sc->option(path[k].stage_id, o.id), nullptr) << o.id;
    }
  }
}

TEST(Catalog, SeatBlocksAreContiguousFreeRuns) {
  catalog::SeatGrid g;
  g.max_block = 3;
  catalog::SeatRow r{"A", "front", {}};
  const std::string taken = "..x..", tiers = "pppss";
  for (int i = 0; i < 5; ++i) {
    r.cells.push_back({"A", i + 1, tiers[static_cast<std::size_t>(i)] == 'p' ? catalog::SeatTier::premium : catalog::SeatTier::standard,
                       taken[static_cast<std::size_t>(i)] == 'x'});
  }
  g.rows.push_back(r);
  const auto blocks = catalog::seat_blocks(g);
  EXPECT_EQ(option_ids(blocks), (std::vector<std::string>{"A1", "A1-A2", "A2", "A4", "A4-A5", "A5"}));
  EXPECT_EQ(std::get<std::string>(blocks[1].attributes.at("tier")), "premium");
  EXPECT_EQ(std::get<std::string>(blocks[4].attributes.at("tier")), "standard");
}

class UniqueSolution : public ::testing::TestWithParam<std::string> {};

TEST_P(UniqueSolution, AgreesWithIndependentWalk) {
  const auto sc = scenario(GetParam());
  const auto report = catalog::validate_unique_solution(*sc);
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.solution_count, 1u);
  const auto raw = raw_solutions(sc->document());
  ASSERT_EQ(raw.size(), report.solution_count);
  std::vector<std::string> declared;
  for (const auto &s : sc->solution()) declared.push_back(s.option_id);
  EXPECT_EQ(raw.front(), declared);

  // Path counts agree with the raw walk too.
  std::size_t n = 0;
  testutil::RawWalker(sc->document()).walk([&](const auto &, const auto &) { ++n; });
  EXPECT_EQ(n, catalog::enumerate_paths(*sc).size());
}

INSTANTIATE_TEST_SUITE_P(Bundled, UniqueSolution,
                         ::testing::Values(testutil::kParents, testutil::kSibling, "tests/fixtures/backtrack_example.json",
                                           "tests/fixtures/invalidation.json"));

TEST(Catalog, TwoSolutionFixtureReportsBoth) {
  const auto sc = fixture("two_solutions");
  const auto report = catalog::validate_unique_solution(*sc);
  EXPECT_EQ(report.solution_count, 2u);
  EXPECT_FALSE(report.passed());
  EXPECT_EQ(raw_solutions(sc->document()).size(), 2u);
}

TEST(Catalog, UnsatisfiableHasNoSolution) {
  json doc = fixture("backtrack_example")->document();
  doc["scriptedPreferences"]["date"][0]["constraints"][0]["value"] = "Mar 20";
  const auto sc = catalog::load_scenario_json(doc);
  EXPECT_EQ(catalog::validate_unique_solution(sc).solution_count, 0u);
}

TEST(Catalog, NoHardPreferencesCountsEveryPath) {
  json doc = fixture("backtrack_example")->document();
  doc["scriptedPreferences"] = json::object();
  const auto sc = catalog::load_scenario_json(doc);
  EXPECT_EQ(catalog::validate_unique_solution(sc).solution_count, catalog::enumerate_paths(sc).size());
}
