#include "support.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace maestro;
using testutil::fixture;

namespace {

const std::vector<std::string> kPersonas{"s1-guided", "s1-optimal", "s1-repeat-mistake",
                                         "s2-guided", "s2-optimal", "s2-repeat-mistake"};

catalog::ScenarioPtr scenario_for(const harness::Persona &p) {
  return testutil::scenario("data/scenarios/" + p.scenario_id + ".json");
}

harness::TrialResult run(const std::string &persona_id, harness::TrialOptions opts = {}) {
  const auto p = testutil::persona(persona_id);
  return harness::run_trial(scenario_for(p), p, opts);
}

} // namespace

TEST(Metrics, OptimalPersonasSucceedCleanly) {
  for (const auto *id : {"s1-optimal", "s2-optimal"}) {
    const auto r = run(id);
    EXPECT_TRUE(r.valid) << id << " " << r.protocol_error;
    EXPECT_EQ(r.metrics.task_success, 1) << id;
    EXPECT_EQ(r.metrics.violation_count, 0u) << id;
    EXPECT_EQ(r.metrics.unpreferred_selection_count, 0u) << id;
  }
}

TEST(Metrics, RepeatMistakeCountsTwoUnpreferredSelections) {
  for (const auto *id : {"s1-repeat-mistake", "s2-repeat-mistake"}) {
    const auto r = run(id);
    EXPECT_TRUE(r.valid) << id;
    EXPECT_EQ(r.metrics.unpreferred_selection_count, 2u) << id;
    EXPECT_EQ(r.metrics.violation_count, 0u) << id;
    EXPECT_EQ(r.metrics.task_success, 1) << id;
  }
}

TEST(Metrics, GuidedPersonasFinish) {
  for (const auto *id : {"s1-guided", "s2-guided"}) {
    const auto r = run(id);
    EXPECT_TRUE(r.valid) << id;
    EXPECT_EQ(r.metrics.task_success, 1) << id;
    EXPECT_EQ(r.metrics.violation_count, 0u) << id;
    EXPECT_GE(r.metrics.backtracks, 1u) << id;
    EXPECT_GE(r.metrics.dead_ends_recorded, r.metrics.backtracks) << id;
  }
}

TEST(Metrics, EmptyPersona) {
  auto p = testutil::persona("s1-optimal");
  p.script.clear();
  const auto sc = scenario_for(p);
  const auto r = harness::run_trial(sc, p);
  EXPECT_EQ(r.metrics.turn_count, 0u);
  EXPECT_EQ(r.metrics.task_success, 0);
  std::size_t hard = 0;
  for (const auto &sp : sc->scripted_preferences()) hard += sp.hard;
  EXPECT_EQ(r.metrics.violation_count, hard);
  ASSERT_EQ(r.metrics.utterance_counts.size(), 4u);
  for (const auto &[cls, n] : r.metrics.utterance_counts) EXPECT_EQ(n, 0u) << cls;
}

TEST(Metrics, UtteranceCountsCoverChatTurnsOnly) {
  const auto p = testutil::persona("s1-guided");
  const auto r = run("s1-guided");
  std::size_t says = 0, total = 0;
  for (const auto &s : p.script) says += s.kind == harness::PersonaStep::Kind::say;
  for (const auto &[cls, n] : r.metrics.utterance_counts) total += n;
  // Auto-responses to proposals are chat turns too.
  EXPECT_GE(total, says);
  EXPECT_LE(total, r.metrics.turn_count);
}

TEST(Metrics, TurnLimitStopsTrial) {
  harness::TrialOptions opts;
  opts.turn_limit = 3;
  const auto r = run("s1-guided", opts);
  EXPECT_EQ(r.metrics.turn_count, 3u);
  EXPECT_EQ(r.metrics.task_success, 0);
}

TEST(Violations, Examples) {
  const auto sc = testutil::scenario(testutil::kParents);
  EXPECT_EQ(harness::compute_violations(sc->solution(), *sc), 0u);
  std::size_t hard = 0;
  for (const auto &sp : sc->scripted_preferences()) hard += sp.hard;
  EXPECT_EQ(harness::compute_violations({}, *sc), hard);
  // Dropping the seat leaves exactly the seat requirements unmet.
  Path no_seat(sc->solution().begin(), sc->solution().end() - 1);
  std::size_t seat_hard = 0;
  for (const auto &sp : sc->scripted_preferences()) seat_hard += sp.hard && sp.stage_id == "seat";
  EXPECT_EQ(harness::compute_violations(no_seat, *sc), seat_hard);
}

TEST(Violations, UnpreferredCountsEachSelectionEvent) {
  const auto sc = testutil::scenario(testutil::kParents);
  const auto &sol = sc->solution();
  std::vector<agent::LoggedSelection> log;
  for (std::size_t i = 0; i < sol.size(); ++i) log.push_back({Path(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(i)), sol[i]});
  EXPECT_EQ(harness::compute_unpreferred(log, *sc), 0u);
  // A movie no hard preference accepts, chosen twice.
  std::string wrong;
  for (const auto &o : catalog::options_at(*sc, {})) {
    bool ok = true;
    for (const auto &sp : sc->scripted_preferences()) {
      if (sp.hard && sp.stage_id == "movie" && !catalog::scripted_satisfied(*sc, sp, {}, o)) ok = false;
    }
    if (!ok) {
      wrong = o.id;
      break;
    }
  }
  ASSERT_FALSE(wrong.empty());
  log.push_back({{}, {"movie", wrong}});
  log.push_back({{}, {"movie", wrong}});
  EXPECT_EQ(harness::compute_unpreferred(log, *sc), 2u);
}

TEST(Oracle, MatchesLedgerAtEveryStepOfEveryPersona) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t checked = 0;
  for (const auto &id : kPersonas) {
    const auto p = testutil::persona(id);
    const auto sc = scenario_for(p);
    harness::TrialOptions opts;
    std::size_t step = 0;
    opts.observer = [&](const agent::SessionState &s) {
      const auto expected = harness::oracle_counts(*sc, s);
      ASSERT_EQ(expected.size(), s.ledger.entries.size()) << id << " step " << step;
      for (const auto &[stage, n] : expected) {
        EXPECT_EQ(s.ledger.count(stage), n) << id << " step " << step << " stage " << stage;
        ++checked;
      }
      ++step;
    };
    const auto r = harness::run_trial(sc, p, opts);
    EXPECT_TRUE(r.valid) << id;
    EXPECT_GT(step, 5u) << id;
  }
  EXPECT_GT(checked, 100u);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(60));
}

TEST(Oracle, CountsEveryPathWithoutRecords) {
  for (const auto *rel : {testutil::kParents, testutil::kSibling}) {
    const auto sc = testutil::scenario(rel);
    const auto o = harness::brute_force_oracle(*sc, {});
    std::size_t n = 0;
    testutil::RawWalker(sc->document()).walk([&](const auto &, const auto &) { ++n; });
    EXPECT_EQ(o.feasible_paths.size(), n);
    EXPECT_EQ(o.feasible_paths.size(), catalog::enumerate_paths(*sc).size());
    ASSERT_TRUE(o.optimal_path.has_value());
    EXPECT_EQ(*o.optimal_path, o.feasible_paths.front());
  }
}

TEST(Oracle, ScaleGuard) {
  const auto sc = testutil::scenario(testutil::kParents);
  try {
    harness::brute_force_oracle(*sc, {}, {}, 10);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), "scale_guard");
  }
}

TEST(Oracle, HardRecordAndDeadEndNarrowCounts) {
  const auto sc = fixture("invalidation");
  prefs::PreferenceRecord r;
  r.id = "p1";
  r.strength = prefs::Strength::hard;
  r.relevant_stages = {"time"};
  prefs::Constraint c;
  c.attribute = "imax";
  c.values = {Value{true}};
  r.compiled = c;
  const auto o = harness::brute_force_oracle(*sc, {r});
  ASSERT_EQ(o.feasible_paths.size(), 1u);
  EXPECT_EQ(o.feasible_paths[0], sc->solution());
  EXPECT_EQ(o.per_prefix_viable.at("comet-run/alder").size(), 0u);
  EXPECT_EQ(o.per_prefix_viable.at("comet-run/cypress"), std::vector<std::string>{"t2045-2245-imax"});
  EXPECT_EQ(o.alternative_count(std::vector<PathSelection>{{"movie", "comet-run"}}, "alder"), 2u);

  const nav::DeadEnds de{{{{"movie", "comet-run"}, {"theater", "alder"}}, "time", {"p1"}, "x"}};
  const auto blocked = harness::brute_force_oracle(*sc, {r}, de);
  EXPECT_EQ(blocked.alternative_count(std::vector<PathSelection>{{"movie", "comet-run"}}, "birch"), 1u);
  EXPECT_FALSE(blocked.alternative_count(std::vector<PathSelection>{{"movie", "nowhere"}}, "birch").has_value());
}

TEST(Determinism, TwoRunsAreByteIdentical) {
  for (const auto &id : kPersonas) {
    const auto a = run(id), b = run(id);
    EXPECT_EQ(harness::transcript_jsonl(a.transcript), harness::transcript_jsonl(b.transcript)) << id;
    EXPECT_EQ(a.metrics, b.metrics) << id;
  }
}

TEST(Determinism, SnapshotRestoreMidRunMatches) {
  for (const auto &id : kPersonas) {
    const auto whole = run(id);
    for (std::size_t k : {1u, 4u, 9u}) {
      harness::TrialOptions opts;
      opts.restore_after = k;
      const auto resumed = run(id, opts);
      EXPECT_EQ(harness::transcript_jsonl(resumed.transcript), harness::transcript_jsonl(whole.transcript)) << id << " after " << k;
    }
  }
}

TEST(Transcript, ShapeAndParse) {
  const auto r = run("s1-optimal");
  ASSERT_GE(r.transcript.size(), 3u);
  EXPECT_EQ(r.transcript.front().at("type"), "header");
  EXPECT_EQ(r.transcript.back().at("type"), "result");
  EXPECT_EQ(r.transcript.size(), r.metrics.turn_count + 3);  // header, turn 0, turns, footer
  const auto text = harness::transcript_jsonl(r.transcript);
  EXPECT_EQ(harness::parse_transcript(text), r.transcript);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(r.transcript.size()));
  EXPECT_THROW(harness::parse_transcript("{\"type\":\n"), Error);
}

TEST(Replay, FreshTranscriptHasEmptyDiff) {
  const auto p = testutil::persona("s2-guided");
  const auto sc = scenario_for(p);
  const auto r = harness::run_trial(sc, p);
  const auto rep = harness::replay(sc, harness::parse_transcript(harness::transcript_jsonl(r.transcript)));
  EXPECT_TRUE(rep.identical) << rep.detail;
  EXPECT_EQ(rep.verified_lines, r.transcript.size());
}

TEST(Replay, ModifiedScenarioLocalizesDivergence) {
  const auto p = testutil::persona("s1-optimal");
  const auto sc = scenario_for(p);
  const auto r = harness::run_trial(sc, p);
  json doc = sc->document();
  // Rename the solution theater; the first turn that shows it diverges.
  const std::string theater = sc->solution()[1].option_id;
  for (auto &it : doc["options"]["theater"]["items"]) {
    if (it["id"] == theater) it["label"] = "Renamed Hall";
  }
  const auto changed = std::make_shared<const catalog::Scenario>(catalog::load_scenario_json(doc));
  const auto rep = harness::replay(changed, r.transcript);
  EXPECT_FALSE(rep.identical);
  ASSERT_TRUE(rep.divergent_line.has_value());
  EXPECT_GT(*rep.divergent_line, 1u);
  EXPECT_EQ(rep.verified_lines, *rep.divergent_line);
  EXPECT_TRUE(rep.divergent_event.has_value());
}

TEST(Replay, TruncatedTranscriptReportsMissing) {
  const auto p = testutil::persona("s1-optimal");
  const auto sc = scenario_for(p);
  const auto r = harness::run_trial(sc, p);
  std::vector<json> cut(r.transcript.begin(), r.transcript.begin() + 5);
  const auto rep = harness::replay(sc, cut);
  EXPECT_FALSE(rep.identical);
  EXPECT_FALSE(rep.divergent_line.has_value());
  EXPECT_EQ(rep.verified_lines, 5u);
  EXPECT_EQ(rep.missing_lines, r.transcript.size() - 5);
}

TEST(MetricsTable, HeaderAndRowAlign) {
  const auto r = run("s1-optimal");
  const auto header = harness::metrics_header();
  const auto row = harness::metrics_row("parents-anniversary-gift", "s1-optimal", agent::Mode::maestro, r.metrics);
  EXPECT_EQ(std::count(header.begin(), header.end(), '\t'), std::count(row.begin(), row.end(), '\t'));
  EXPECT_EQ(row.rfind("parents-anniversary-gift\ts1-optimal\tmaestro\t1\t", 0), 0u) << row;
}

TEST(Personas, FilesRoundTrip) {
  const auto all = harness::load_persona_dir(testutil::source_path("data/personas"));
  ASSERT_EQ(all.size(), kPersonas.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].id, kPersonas[i]);
    EXPECT_EQ(harness::persona_from_json(harness::persona_to_json(all[i])), all[i]);
  }
  EXPECT_THROW(harness::persona_from_json(json::parse(R"({"id":"x"})")), Error);
}
