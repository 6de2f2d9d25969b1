#include "algebra.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace maestro;
using namespace algebra;

namespace {

constexpr int kCases = 1500;

} // namespace

TEST(OperatorAlgebra, FilterConjunction) {
  Gen g(11);
  const auto st = random_stage();
  for (int i = 0; i < kCases; ++i) {
    const auto opts = g.options();
    const auto c1 = g.constraint(), c2 = g.constraint();
    const auto both = adapt::apply(st, opts, {filter(c1), filter(c2)});
    const auto stepwise = adapt::apply(st, adapt::apply(st, opts, {filter(c1)}).visible, {filter(c2)});
    std::vector<std::string> expected;
    for (const auto &o : opts) {
      if (holds(c1, o) && holds(c2, o)) expected.push_back(o.id);
    }
    ASSERT_EQ(ids_of(both.visible), expected) << "case " << i;
    ASSERT_EQ(ids_of(stepwise.visible), expected) << "case " << i;
    ASSERT_EQ(both.hidden_count, opts.size() - expected.size());
    ASSERT_EQ(ids_of(adapt::apply(st, opts, {filter(c2), filter(c1)}).visible), expected);
  }
}

TEST(OperatorAlgebra, SortIsStable) {
  Gen g(23);
  const auto st = random_stage();
  for (int i = 0; i < kCases; ++i) {
    const auto opts = g.options();
    const std::string attr = g.coin() ? "price" : "rating";
    const auto dir = g.coin() ? adapt::SortDirection::asc : adapt::SortDirection::desc;
    const auto view = adapt::apply(st, opts, {sort_by(attr, dir)});
    ASSERT_EQ(ids_of(view.visible), reference_sort(opts, attr, dir)) << "case " << i << " " << attr;
    ASSERT_EQ(view.visible.size(), opts.size());
  }
}

TEST(OperatorAlgebra, AugmentPreservesVisibleSetAndOrder) {
  Gen g(37);
  const auto st = random_stage();
  for (int i = 0; i < kCases; ++i) {
    const auto opts = g.options();
    std::vector<adapt::AdaptationAction> base;
    if (g.coin()) base.push_back(filter(g.constraint()));
    if (g.coin()) base.push_back(sort_by("price", adapt::SortDirection::asc));
    adapt::AdaptationAction aug;
    aug.kind = adapt::ActionKind::augment;
    aug.attributes = {"rating", "price", "imax"};
    auto with = base;
    with.insert(with.begin(), aug);
    const auto a = adapt::apply(st, opts, base), b = adapt::apply(st, opts, with);
    ASSERT_EQ(ids_of(a.visible), ids_of(b.visible)) << "case " << i;
    ASSERT_EQ(a.hidden_count, b.hidden_count);
    for (const auto &o : b.visible) ASSERT_EQ(b.labels.at(o.id).rfind(o.label, 0), 0u);
  }
}

TEST(OperatorAlgebra, HighlightPreservesVisibleOrderAndLabels) {
  Gen g(41);
  const auto st = random_stage();
  for (int i = 0; i < kCases; ++i) {
    const auto opts = g.options();
    std::vector<adapt::AdaptationAction> base;
    adapt::AdaptationAction aug;
    aug.kind = adapt::ActionKind::augment;
    aug.attributes = {"genre"};
    base.push_back(aug);
    if (g.coin()) base.push_back(filter(g.constraint()));
    adapt::AdaptationAction hl;
    hl.kind = adapt::ActionKind::highlight;
    hl.intent = g.coin() ? adapt::Intent::emphasize : adapt::Intent::reduce;
    std::set<std::string> picked;
    for (const auto &o : opts) {
      if (g.coin(0.3)) {
        hl.option_ids.push_back(o.id);
        picked.insert(o.id);
      }
    }
    auto with = base;
    with.push_back(hl);
    const auto a = adapt::apply(st, opts, base), b = adapt::apply(st, opts, with);
    ASSERT_EQ(ids_of(a.visible), ids_of(b.visible)) << "case " << i;
    ASSERT_EQ(a.labels, b.labels);
    const auto shown = ids_of(b.visible);
    for (const auto &id : b.highlighted) {
      ASSERT_TRUE(picked.count(id));
      ASSERT_NE(std::find(shown.begin(), shown.end(), id), shown.end());
    }
  }
}

TEST(OperatorAlgebra, ShowAllRoundTrip) {
  Gen g(53);
  const auto st = random_stage();
  for (int i = 0; i < kCases; ++i) {
    const auto opts = g.options();
    std::vector<adapt::AdaptationAction> plan;
    std::vector<prefs::Constraint> cs;
    for (int k = g.uniform(0, 2); k > 0; --k) {
      cs.push_back(g.constraint());
      plan.push_back(filter(cs.back()));
    }
    if (g.coin()) plan.push_back(sort_by(g.coin() ? "price" : "rating", g.coin() ? adapt::SortDirection::asc : adapt::SortDirection::desc));
    const auto view = adapt::apply(st, opts, plan);
    const auto all = adapt::show_all(view);
    ASSERT_EQ(all.visible.size(), opts.size());
    ASSERT_EQ(all.hidden_count, 0u);
    ASSERT_EQ(all.highlighted, view.highlighted);
    ASSERT_EQ(adapt::show_all(all), all);

    // Re-filter the revealed list with the original constraints.
    std::vector<std::string> refiltered;
    for (const auto &o : all.visible) {
      if (std::all_of(cs.begin(), cs.end(), [&](const prefs::Constraint &c) { return holds(c, o); })) refiltered.push_back(o.id);
    }
    ASSERT_EQ(refiltered, ids_of(view.visible)) << "case " << i;
    std::vector<std::string> matching;
    for (const auto &o : all.visible) {
      if (!all.non_matching.count(o.id)) matching.push_back(o.id);
    }
    ASSERT_EQ(matching, ids_of(view.visible));
  }
}

TEST(PlannerProperties, AugmentFirstAndDeterministic) {
  Gen g(67);
  const auto st = random_stage();
  for (int i = 0; i < kCases; ++i) {
    const auto opts = g.options();
    std::vector<prefs::PreferenceRecord> records;
    for (int k = g.uniform(0, 3); k > 0; --k) {
      prefs::PreferenceRecord r;
      r.id = "p" + std::to_string(k);
      r.relevant_stages = {"movie"};
      if (g.coin()) {
        r.strength = prefs::Strength::hard;
        r.compiled = g.constraint();
      } else {
        prefs::Objective o;
        o.attribute = g.coin() ? "price" : "rating";
        o.direction = g.coin() ? prefs::Direction::minimize : prefs::Direction::maximize;
        r.compiled = o;
      }
      records.push_back(r);
    }
    const auto plan = adapt::plan_adaptations(st, opts, records);
    ASSERT_EQ(plan.actions, adapt::plan_adaptations(st, opts, records).actions);
    if (plan.actions.empty()) {
      ASSERT_TRUE(records.empty());
      continue;
    }
    const auto &first = plan.actions.front();
    ASSERT_EQ(first.kind, adapt::ActionKind::augment);
    for (const auto &a : plan.actions) {
      std::string read;
      if (a.kind == adapt::ActionKind::filter) read = a.constraint->attribute;
      if (a.kind == adapt::ActionKind::sort) read = a.sort_attribute;
      if (!read.empty()) ASSERT_NE(std::find(first.attributes.begin(), first.attributes.end(), read), first.attributes.end());
    }
    // Stage order of operators.
    for (std::size_t k = 1; k < plan.actions.size(); ++k) {
      ASSERT_LE(static_cast<int>(plan.actions[k - 1].kind), static_cast<int>(plan.actions[k].kind));
    }
  }
}

TEST(OperatorAlgebra, CombinedLawsHaveNoCounterexamples) {
  for (const auto &[law, n] : algebra::counterexamples(97, kCases)) EXPECT_EQ(n, 0u) << law;
}
