#include "support.hpp"

#include <gtest/gtest.h>

using namespace maestro;
using testutil::fixture;

namespace {

prefs::PreferenceRecord hard(const std::string &id, const std::string &stage, prefs::Constraint c) {
  prefs::PreferenceRecord r;
  r.id = id;
  r.strength = prefs::Strength::hard;
  r.relevant_stages = {stage};
  r.compiled = std::move(c);
  return r;
}

prefs::PreferenceRecord soft(const std::string &id, const std::string &stage, prefs::Objective o) {
  prefs::PreferenceRecord r;
  r.id = id;
  r.strength = prefs::Strength::soft;
  r.relevant_stages = {stage};
  r.compiled = std::move(o);
  return r;
}

std::vector<adapt::ActionKind> kinds(const adapt::Plan &p) {
  std::vector<adapt::ActionKind> out;
  for (const auto &a : p.actions) out.push_back(a.kind);
  return out;
}

std::vector<std::string> visible_labels(const adapt::AdaptedView &v) {
  std::vector<std::string> out;
  for (const auto &o : v.visible) out.push_back(v.labels.at(o.id));
  return out;
}

const std::vector<adapt::ActionKind> kFourStep{adapt::ActionKind::augment, adapt::ActionKind::filter, adapt::ActionKind::sort,
                                               adapt::ActionKind::highlight};

} // namespace

TEST(Plan, KidFriendlyShorter) {
  const auto sc = fixture("kid_movie");
  const auto &st = *sc->workflow().stage("movie");
  const auto opts = catalog::options_at(*sc, {});
  const std::vector<prefs::PreferenceRecord> records{
      hard("p1", "movie", {"rating", prefs::Comparator::in_set, {Value{"G"}, Value{"PG"}}, "", {}}),
      soft("p2", "movie", {"runtime", prefs::Direction::minimize, {}})};
  const auto plan = adapt::plan_adaptations(st, opts, records);
  EXPECT_EQ(kinds(plan), kFourStep);
  EXPECT_EQ(plan.actions[0].attributes, (std::vector<std::string>{"rating", "runtime"}));
  EXPECT_EQ(plan.actions[2].sort_attribute, "runtime");
  EXPECT_EQ(plan.actions[2].direction, adapt::SortDirection::asc);
  EXPECT_EQ(plan.actions[3].option_ids, std::vector<std::string>{"pocket-parade"});
  EXPECT_EQ(plan.actions[3].intent, adapt::Intent::emphasize);

  const auto view = adapt::apply(st, opts, plan.actions);
  EXPECT_EQ(visible_labels(view), (std::vector<std::string>{"Pocket Parade — PG, 1h 32m", "Lantern Bakery — PG, 2h 4m"}));
  EXPECT_EQ(view.hidden_count, 2u);
  EXPECT_EQ(view.highlighted, std::set<std::string>{"pocket-parade"});
}

TEST(Plan, ImaxByDistance) {
  const auto sc = fixture("imax_theaters");
  const auto &st = *sc->workflow().stage("theater");
  const Path prefix{{"movie", "starfall-circuit"}};
  const auto opts = catalog::options_at(*sc, prefix);
  const std::vector<prefs::PreferenceRecord> records{hard("p1", "theater", {"imax", prefs::Comparator::eq, {Value{true}}, "", {}}),
                                                     soft("p2", "theater", {"distance", prefs::Direction::minimize, {}})};
  const auto plan = adapt::plan_adaptations(st, opts, records);
  EXPECT_EQ(kinds(plan), kFourStep);
  EXPECT_EQ(plan.actions[0].attributes, (std::vector<std::string>{"distance", "imax"}));
  EXPECT_EQ(plan.actions[3].option_ids, std::vector<std::string>{"cedar-commons-6"});
  const auto view = adapt::apply(st, opts, plan.actions);
  EXPECT_EQ(visible_labels(view),
            (std::vector<std::string>{"Cedar Commons 6 — 4.6 mi, IMAX Available", "Riverview 8 — 6.3 mi, IMAX Available"}));
  EXPECT_EQ(view.hidden_count, 1u);
}

TEST(Plan, CalendarHardPreferenceHighlightsInsteadOfFiltering) {
  const auto sc = testutil::scenario(testutil::kParents);
  const auto &st = *sc->workflow().stage("date");
  ASSERT_FALSE(st.filterable);
  const Path prefix(sc->solution().begin(), sc->solution().begin() + 2);
  const auto opts = catalog::options_at(*sc, prefix);
  ASSERT_GE(opts.size(), 2u);
  const Value first = opts[0].attributes.at("date"), second = opts[1].attributes.at("date");
  const auto plan = adapt::plan_adaptations(st, opts, {hard("p1", "date", {"date", prefs::Comparator::in_set, {first, second}, "", {}})});
  ASSERT_EQ(kinds(plan), (std::vector<adapt::ActionKind>{adapt::ActionKind::augment, adapt::ActionKind::highlight}));
  EXPECT_EQ(plan.actions[0].attributes, std::vector<std::string>{"weekday"});
  EXPECT_EQ(plan.actions[1].intent, adapt::Intent::reduce);
  EXPECT_EQ(plan.actions[1].option_ids, (std::vector<std::string>{opts[0].id, opts[1].id}));
  const auto view = adapt::apply(st, opts, plan.actions);
  EXPECT_EQ(view.visible.size(), opts.size());
  EXPECT_EQ(adapt::candidate_ids(view), (std::vector<std::string>{opts[0].id, opts[1].id}));
}

TEST(Plan, EmptyRecordsGiveEmptyPlanAndIdentityView) {
  const auto sc = fixture("kid_movie");
  const auto &st = *sc->workflow().stage("movie");
  const auto opts = catalog::options_at(*sc, {});
  const auto plan = adapt::plan_adaptations(st, opts, {});
  EXPECT_TRUE(plan.actions.empty());
  const auto view = adapt::apply(st, opts, {});
  EXPECT_EQ(view.visible, opts);
  EXPECT_EQ(view.hidden_count, 0u);
  for (const auto &o : opts) EXPECT_EQ(view.labels.at(o.id), o.label);
}

TEST(Plan, UnknownAttributeSkippedWithWarning) {
  const auto sc = fixture("kid_movie");
  const auto &st = *sc->workflow().stage("movie");
  const auto plan = adapt::plan_adaptations(st, catalog::options_at(*sc, {}),
                                            {hard("p1", "movie", {"screen", prefs::Comparator::eq, {Value{"imax"}}, "", {}})});
  EXPECT_TRUE(plan.actions.empty());
  EXPECT_FALSE(plan.warnings.empty());
}

TEST(Plan, SoftCategoricalEmphasizes) {
  const auto sc = fixture("kid_movie");
  const auto &st = *sc->workflow().stage("movie");
  const auto opts = catalog::options_at(*sc, {});
  prefs::Objective o;
  o.attribute = "genre";
  o.prefer_set = {Value{"animation"}};
  const auto plan = adapt::plan_adaptations(st, opts, {soft("p1", "movie", o)});
  ASSERT_EQ(kinds(plan), (std::vector<adapt::ActionKind>{adapt::ActionKind::augment, adapt::ActionKind::highlight}));
  EXPECT_EQ(plan.actions[1].intent, adapt::Intent::emphasize);
  const auto view = adapt::apply(st, opts, plan.actions);
  EXPECT_EQ(view.visible.size(), opts.size());
}

TEST(ShowAll, RevealsNonMatchingKeepsHighlight) {
  const auto sc = fixture("kid_movie");
  const auto &st = *sc->workflow().stage("movie");
  const auto opts = catalog::options_at(*sc, {});
  const auto plan = adapt::plan_adaptations(st, opts,
                                            {hard("p1", "movie", {"rating", prefs::Comparator::in_set, {Value{"G"}, Value{"PG"}}, "", {}}),
                                             soft("p2", "movie", {"runtime", prefs::Direction::minimize, {}})});
  const auto view = adapt::apply(st, opts, plan.actions);
  const auto all = adapt::show_all(view);
  EXPECT_EQ(all.visible.size(), 4u);
  EXPECT_TRUE(all.show_all_engaged);
  EXPECT_EQ(all.hidden_count, 0u);
  EXPECT_EQ(all.highlighted, view.highlighted);

  // Recomposition: the same plan without its filter gives the revealed order.
  std::vector<adapt::AdaptationAction> no_filter;
  for (const auto &a : plan.actions) {
    if (a.kind != adapt::ActionKind::filter) no_filter.push_back(a);
  }
  const auto unfiltered = adapt::apply(st, opts, no_filter);
  EXPECT_EQ(all.visible, unfiltered.visible);
  std::set<std::string> expected_nm;
  for (const auto &o : opts) {
    if (const std::string r = std::get<std::string>(o.attributes.at("rating")); r != "G" && r != "PG") expected_nm.insert(o.id);
  }
  EXPECT_EQ(all.non_matching, expected_nm);
  EXPECT_EQ(expected_nm.size(), 2u);
  EXPECT_EQ(adapt::show_all(all), all);
}

TEST(Label, RendersUnitsDurationsAndPresence) {
  const auto sc = fixture("imax_theaters");
  const auto &st = *sc->workflow().stage("theater");
  const auto *cedar = sc->option("theater", "cedar-commons-6");
  ASSERT_NE(cedar, nullptr);
  EXPECT_EQ(adapt::render_label(*cedar, {"distance", "imax"}, st.attribute_specs), "Cedar Commons 6 — 4.6 mi, IMAX Available");
  EXPECT_EQ(adapt::render_label(*cedar, {}, st.attribute_specs), "Cedar Commons 6");
  std::vector<std::string> warnings;
  EXPECT_EQ(adapt::render_label(*cedar, {"runtime"}, st.attribute_specs, &warnings), "Cedar Commons 6");
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(ViewJson, RoundTrips) {
  const auto sc = fixture("kid_movie");
  const auto &st = *sc->workflow().stage("movie");
  const auto opts = catalog::options_at(*sc, {});
  const auto plan = adapt::plan_adaptations(st, opts,
                                            {hard("p1", "movie", {"rating", prefs::Comparator::in_set, {Value{"G"}, Value{"PG"}}, "", {}}),
                                             soft("p2", "movie", {"runtime", prefs::Direction::minimize, {}})});
  const auto view = adapt::show_all(adapt::apply(st, opts, plan.actions));
  const json j = adapt::view_to_json(view);
  EXPECT_EQ(adapt::view_to_json(adapt::view_from_json(j)), j);
  EXPECT_EQ(adapt::view_hash(adapt::view_from_json(j)), adapt::view_hash(view));
}
