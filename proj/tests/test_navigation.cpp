#include "support.hpp"

#include <gtest/gtest.h>

using namespace maestro;
using testutil::fixture;

namespace {

catalog::StageDef stage(const std::string &id, bool filterable = true) {
  catalog::StageDef s;
  s.id = id;
  s.title = id;
  s.filterable = filterable;
  s.attribute_specs = {{"imax", AttributeKind::boolean, {}, {}, {}, {}, {}}};
  return s;
}

adapt::AdaptedView view_of(const std::string &stage_id, const std::vector<std::string> &ids) {
  adapt::AdaptedView v;
  v.stage_id = stage_id;
  for (const auto &id : ids) v.visible.push_back({id, id, {}});
  v.ordered_all = v.visible;
  return v;
}

nav::DeadEndRecord dead_end(Path prefix, const std::string &failed, std::vector<std::string> linked = {}) {
  return {std::move(prefix), failed, std::move(linked), "test"};
}

const Path kMovieA{{"movie", "A"}};
const Path kMovieC{{"movie", "C"}};

} // namespace

TEST(DeadEnd, ScopedToExactPrefix) {
  const nav::DeadEnds de{dead_end({{"movie", "A"}, {"theater", "B"}}, "time")};
  EXPECT_TRUE(nav::is_blocked(kMovieA, "B", "theater", de));
  EXPECT_FALSE(nav::is_blocked(kMovieC, "B", "theater", de));
  EXPECT_FALSE(nav::is_blocked(kMovieA, "D", "theater", de));
}

TEST(DeadEnd, FailedStageMustLieAhead) {
  // A record failing at the theater stage says nothing about theater choices
  // under the same prefix; those are what remain to try.
  const nav::DeadEnds de{dead_end(kMovieA, "theater")};
  EXPECT_FALSE(nav::is_blocked(kMovieA, "B", "theater", de));
  EXPECT_TRUE(nav::is_blocked({}, "A", "movie", de));
}

TEST(DeadEnd, LongerPathsUnderBlockedPrefixAreBlocked) {
  const nav::DeadEnds de{dead_end({{"movie", "A"}, {"theater", "B"}}, "seat")};
  const Path deeper{{"movie", "A"}, {"theater", "B"}};
  EXPECT_TRUE(nav::is_blocked(deeper, "mar-14", "date", de));
  EXPECT_FALSE(nav::is_blocked({}, "A", "movie", {}));
}

TEST(DeadEnd, RecordTruncatesToFailedStage) {
  const auto sc = fixture("backtrack_example");
  const Path path{{"movie", "quiet-harbor"}, {"theater", "elm-street"}, {"date", "mar-14"}, {"time", "t1900-2045"}};
  auto de = nav::record_dead_end({}, path, "time", {"p1"}, "r", sc->workflow());
  ASSERT_EQ(de.size(), 1u);
  EXPECT_EQ(de[0].prefix, Path(path.begin(), path.begin() + 3));
  EXPECT_EQ(de[0].failed_stage, "time");
  de = nav::record_dead_end(de, path, "time", {"p1"}, "again", sc->workflow());
  EXPECT_EQ(de.size(), 1u);
  EXPECT_THROW(nav::record_dead_end({}, path, "movie", {}, "r", sc->workflow()), Error);
}

TEST(Ledger, CountExcludesSelectionAndBlocked) {
  const auto s = stage("theater");
  const auto v = view_of("theater", {"B", "D", "E"});
  auto ledger = nav::record_alternatives({}, s, v, std::string("D"));
  EXPECT_EQ(ledger.count("theater"), 2u);
  const nav::DeadEnds de{dead_end({{"movie", "A"}, {"theater", "B"}}, "time")};
  ledger = nav::record_alternatives(ledger, s, v, std::string("D"), kMovieA, de);
  EXPECT_EQ(ledger.count("theater"), 1u);
  ledger = nav::record_alternatives(ledger, s, v, std::nullopt, kMovieC, de);
  EXPECT_EQ(ledger.count("theater"), 3u);
  EXPECT_EQ(ledger.entries.at("theater").provenance, adapt::view_hash(v));
  EXPECT_FALSE(nav::AlternativeLedger{}.count("theater").has_value());
}

TEST(Ledger, FilteredAndNonMatchingOptionsDoNotCount) {
  auto v = view_of("theater", {"B", "D"});
  v.non_matching = {"D"};
  EXPECT_EQ(nav::record_alternatives({}, stage("theater"), v, std::nullopt).count("theater"), 1u);
  adapt::AdaptationAction h;
  h.kind = adapt::ActionKind::highlight;
  h.intent = adapt::Intent::reduce;
  h.option_ids = {};
  v.non_matching.clear();
  v.applied_actions = {h};
  EXPECT_EQ(nav::record_alternatives({}, stage("theater"), v, std::nullopt).count("theater"), 0u);
}

TEST(Backtrack, NearestStageWithAlternatives) {
  nav::AlternativeLedger ledger;
  ledger.entries["movie"].count = 2;
  ledger.entries["theater"].count = 1;
  ledger.entries["date"].count = 0;
  ledger.entries["time"].count = 0;
  const Path path{{"movie", "m"}, {"theater", "t"}, {"date", "d"}, {"time", "x"}};
  const nav::Conflict c{"seat", "none", {"p1"}};
  const auto s = nav::suggest_backtrack(ledger, path, c);
  ASSERT_TRUE(std::holds_alternative<nav::BacktrackProposal>(s));
  EXPECT_EQ(std::get<nav::BacktrackProposal>(s).target_stage_id, "theater");
  EXPECT_EQ(std::get<nav::BacktrackProposal>(s).alternatives, 1u);
}

TEST(Backtrack, AllExhaustedIsInfeasible) {
  nav::AlternativeLedger ledger;
  ledger.entries["movie"].count = 0;
  const Path path{{"movie", "m"}};
  const auto s = nav::suggest_backtrack(ledger, path, nav::Conflict{"theater", "none", {}});
  ASSERT_TRUE(std::holds_alternative<nav::Infeasible>(s));
  EXPECT_EQ(std::get<nav::Infeasible>(s).exhausted_stages, std::vector<std::string>{"movie"});
  EXPECT_THROW(nav::suggest_backtrack(ledger, path, std::nullopt), Error);
}

TEST(Conflict, DetectedOnlyWhenNothingViable) {
  const auto s = stage("time");
  EXPECT_FALSE(nav::detect_conflict(s, view_of("time", {"x"}), kMovieA, {}).has_value());
  auto empty = view_of("time", {});
  adapt::AdaptationAction f;
  f.kind = adapt::ActionKind::filter;
  f.linked_preference_ids = {"p7"};
  empty.applied_actions = {f};
  const auto c = nav::detect_conflict(s, empty, kMovieA, {});
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->blocking_preference_ids, std::vector<std::string>{"p7"});

  const nav::DeadEnds de{dead_end({{"movie", "A"}, {"time", "x"}}, "seat", {"p3"})};
  const auto via_dead_end = nav::detect_conflict(s, view_of("time", {"x"}), kMovieA, de);
  ASSERT_TRUE(via_dead_end.has_value());
  EXPECT_EQ(via_dead_end->blocking_preference_ids, std::vector<std::string>{"p3"});
}

TEST(Invalidation, DropsLinkedDeadEndsAndMarksStale) {
  nav::AlternativeLedger ledger;
  ledger.entries["time"] = {0, "h", false, {"imax"}};
  ledger.entries["theater"] = {2, "h", false, {}};
  const nav::DeadEnds de{dead_end(kMovieA, "time", {"imax"}), dead_end(kMovieC, "time", {"other"})};
  const auto r = nav::invalidate_on_preference_change(de, ledger, "imax");
  ASSERT_EQ(r.dead_ends.size(), 1u);
  EXPECT_EQ(r.dead_ends[0].prefix, kMovieC);
  EXPECT_TRUE(r.ledger.entries.at("time").stale);
  EXPECT_FALSE(r.ledger.entries.at("theater").stale);
  EXPECT_EQ(r.stale_stage_ids, std::vector<std::string>{"time"});
}

TEST(NavigateBack, TruncatesPathAndLaterLedger) {
  const auto sc = fixture("backtrack_example");
  nav::NavigationState st;
  st.path = {{"movie", "quiet-harbor"}, {"theater", "elm-street"}, {"date", "mar-14"}};
  for (const auto *id : {"movie", "theater", "date"}) st.ledger.entries[id].count = 1;
  const auto out = nav::navigate_back(st, "theater", sc->workflow());
  EXPECT_EQ(out.path, (Path{{"movie", "quiet-harbor"}}));
  EXPECT_TRUE(out.ledger.entries.count("theater"));
  EXPECT_FALSE(out.ledger.entries.count("date"));
  EXPECT_THROW(nav::navigate_back(st, "time", sc->workflow()), Error);
  EXPECT_THROW(nav::navigate_back(st, "nowhere", sc->workflow()), Error);
}

TEST(NavigationJson, RoundTrips) {
  nav::AlternativeLedger ledger;
  ledger.entries["date"] = {3, "abc", true, {"p1", "p2"}};
  EXPECT_EQ(nav::ledger_from_json(nav::ledger_to_json(ledger)), ledger);
  const nav::DeadEnds de{dead_end({{"movie", "A"}, {"theater", "B"}}, "time", {"p1"})};
  EXPECT_EQ(nav::dead_ends_from_json(nav::dead_ends_to_json(de)), de);
}
