#include "support.hpp"

#include <gtest/gtest.h>

using namespace maestro;
using testutil::fixture;

namespace {

struct Extracted {
  nlu::ExtractionResult result;
  std::vector<json> records;  // compiled forms only
};

Extracted extract(const catalog::ScenarioPtr &sc, const std::string &stage_id, const std::string &text) {
  nlu::RulesProvider p;
  nlu::Context ctx;
  ctx.scenario = sc.get();
  ctx.stage = sc->workflow().stage(stage_id);
  const auto k = static_cast<std::size_t>(sc->workflow().index_of(stage_id));
  const Path pre(sc->solution().begin(), sc->solution().begin() + static_cast<std::ptrdiff_t>(std::min(k, sc->solution().size())));
  ctx.options = catalog::options_at(*sc, pre);
  Extracted e{p.extract({text, 1, nlu::Channel::chat}, ctx), {}};
  for (const auto &r : e.result.records) {
    json j = prefs::to_json(r.compiled);
    j["strength"] = r.hard() ? "hard" : "soft";
    j["stages"] = r.relevant_stages;
    e.records.push_back(j);
  }
  return e;
}

} // namespace

TEST(Rules, KidMovieUtterance) {
  const auto e = extract(fixture("kid_movie"), "movie", "I need a G or PG rated kid-friendly movie, preferably the shorter one");
  EXPECT_EQ(e.result.utterance_class, nlu::UtteranceClass::preference_statement);
  ASSERT_EQ(e.records.size(), 2u);
  EXPECT_EQ(e.records[0], json::parse(R"({"type":"constraint","attribute":"rating","comparator":"inSet","value":["G","PG"],
                                          "strength":"hard","stages":["movie"]})"));
  EXPECT_EQ(e.records[1], json::parse(R"({"type":"objective","attribute":"runtime","direction":"minimize",
                                          "strength":"soft","stages":["movie"]})"));
}

TEST(Rules, ImaxTeaserGivesThreeRecords) {
  const auto e = extract(fixture("imax_theaters"), "movie", "I would like to watch a blockbuster on an IMAX screen. The closer the better!");
  ASSERT_EQ(e.records.size(), 3u);
  EXPECT_EQ(e.records[0]["attribute"], "genre");
  EXPECT_EQ(e.records[0]["stages"], json::array({"movie"}));
  EXPECT_EQ(e.records[1], json::parse(R"({"type":"constraint","attribute":"imax","comparator":"eq","value":true,
                                          "strength":"hard","stages":["theater"]})"));
  EXPECT_EQ(e.records[2], json::parse(R"({"type":"objective","attribute":"distance","direction":"minimize",
                                          "strength":"soft","stages":["theater"]})"));
}

TEST(Rules, DismissedValueIsNotWanted) {
  const auto e = extract(testutil::scenario(testutil::kParents), "seat", "I need two adjacent premium seats, standard would feel too ordinary.");
  bool tier = false, count = false;
  for (const auto &r : e.records) {
    if (r.dump().find("premium") != std::string::npos) tier = true;
    EXPECT_EQ(r.dump().find("standard"), std::string::npos) << r.dump();
    if (r.dump().find("adjacentSeats") != std::string::npos) count = true;
    EXPECT_EQ(r["strength"], "hard");
  }
  EXPECT_TRUE(tier);
  EXPECT_TRUE(count);
}

TEST(Rules, DateOnlyIsHard) {
  const auto e = extract(fixture("backtrack_example"), "movie", "We can only go on March 14, and we need four seats together.");
  ASSERT_EQ(e.records.size(), 2u);
  std::set<std::string> attrs;
  for (const auto &r : e.records) {
    attrs.insert(r["attribute"].get<std::string>());
    EXPECT_EQ(r["strength"], "hard");
  }
  EXPECT_EQ(attrs, (std::set<std::string>{"count", "date"}));
}

TEST(Rules, ReleaseWording) {
  const auto e = extract(fixture("invalidation"), "time", "Actually IMAX doesn't matter to me.");
  EXPECT_EQ(e.result.utterance_class, nlu::UtteranceClass::preference_statement);
}

TEST(Rules, ActionsAndReplies) {
  const auto sc = fixture("kid_movie");
  EXPECT_EQ(extract(sc, "movie", "yes").result.action.kind, nlu::ActionKind::affirm);
  EXPECT_EQ(extract(sc, "movie", "no thanks").result.action.kind, nlu::ActionKind::decline);
  EXPECT_EQ(extract(sc, "movie", "show me all the options").result.action.kind, nlu::ActionKind::show_all);
  EXPECT_EQ(extract(sc, "movie", "submit my booking").result.action.kind, nlu::ActionKind::submit);
  EXPECT_EQ(extract(sc, "movie", "continue").result.action.kind, nlu::ActionKind::next);
  for (const char *text : {"Let's go with Pocket Parade", "I'll take Pocket Parade", "Pocket Parade please"}) {
    const auto e = extract(sc, "movie", text);
    EXPECT_EQ(e.result.action.kind, nlu::ActionKind::select) << text;
    EXPECT_EQ(e.result.action.option_id, "pocket-parade") << text;
    EXPECT_EQ(e.result.utterance_class, nlu::UtteranceClass::action_request);
  }
  const auto back = extract(testutil::scenario(testutil::kParents), "seat", "go back to the theater step");
  EXPECT_EQ(back.result.action.kind, nlu::ActionKind::back);
  EXPECT_EQ(back.result.action.target_stage, "theater");
}

TEST(Rules, ClassifiesEveryClass) {
  const auto sc = fixture("kid_movie");
  nlu::RulesProvider p;
  nlu::Context ctx;
  ctx.scenario = sc.get();
  ctx.stage = sc->workflow().stage("movie");
  ctx.options = catalog::options_at(*sc, {});
  const std::vector<std::pair<std::string, nlu::UtteranceClass>> cases{
      {"I need a G or PG rated movie", nlu::UtteranceClass::preference_statement},
      {"What is the runtime of Pocket Parade?", nlu::UtteranceClass::information_seeking},
      {"go back", nlu::UtteranceClass::action_request},
      {"hello there", nlu::UtteranceClass::other},
  };
  for (const auto &[text, cls] : cases) {
    EXPECT_EQ(p.classify_only({text, 1, nlu::Channel::chat}, &ctx), cls) << text;
    EXPECT_EQ(p.extract({text, 1, nlu::Channel::chat}, ctx).utterance_class, cls) << text;
  }
  const auto q = p.extract({"How long is Pocket Parade?", 1, nlu::Channel::chat}, ctx);
  EXPECT_EQ(q.asked_attributes, std::vector<std::string>{"runtime"});
}

TEST(Rules, GuiChannelExtractsNothing) {
  const auto sc = fixture("kid_movie");
  nlu::RulesProvider p;
  nlu::Context ctx;
  ctx.scenario = sc.get();
  const auto r = p.extract({"I need a G movie", 1, nlu::Channel::gui_action}, ctx);
  EXPECT_TRUE(r.records.empty());
}

TEST(Rules, PersonaUtterancesProduceRecordsOnTheirStages) {
  // Each persona's first utterances should be understood as preferences.
  for (const auto *id : {"s1-guided", "s2-guided"}) {
    const auto persona = testutil::persona(id);
    const auto sc = testutil::scenario(std::string("data/scenarios/") +
                                       (persona.scenario_id == "parents-anniversary-gift" ? "parents-anniversary-gift.json"
                                                                                          : "sibling-b-movie-comedy-night.json"));
    nlu::RulesProvider p;
    for (const auto &step : persona.script) {
      if (step.kind != harness::PersonaStep::Kind::say || step.text.find("submit") != std::string::npos) continue;
      nlu::Context ctx;
      ctx.scenario = sc.get();
      ctx.stage = &sc->workflow().stages.front();
      ctx.options = catalog::options_at(*sc, {});
      const auto r = p.extract({step.text, 1, nlu::Channel::chat}, ctx);
      if (r.utterance_class == nlu::UtteranceClass::action_request) continue;
      EXPECT_EQ(r.utterance_class, nlu::UtteranceClass::preference_statement) << step.text;
      EXPECT_FALSE(r.records.empty()) << step.text;
    }
  }
}

TEST(Provider, RemoteNeedsEndpoint) {
  nlu::ProviderConfig cfg;
  cfg.kind = nlu::ProviderKind::remote;
  EXPECT_THROW(nlu::make_provider(cfg), Error);
  cfg.kind = nlu::ProviderKind::rules;
  EXPECT_EQ(nlu::make_provider(cfg)->name(), "rules");
}

TEST(Provider, RemoteFallsBackWhenUnreachable) {
  nlu::ProviderConfig cfg;
  cfg.kind = nlu::ProviderKind::remote;
  cfg.endpoint = "http://127.0.0.1:9/v1";
  cfg.timeout = std::chrono::milliseconds(300);
  cfg.retry_limit = 0;
  auto p = nlu::make_provider(cfg);
  const auto sc = fixture("kid_movie");
  nlu::Context ctx;
  ctx.scenario = sc.get();
  ctx.stage = sc->workflow().stage("movie");
  ctx.options = catalog::options_at(*sc, {});
  const auto r = p->extract({"I need a G or PG rated kid-friendly movie, preferably the shorter one", 1, nlu::Channel::chat}, ctx);
  EXPECT_TRUE(r.degraded);
  EXPECT_EQ(r.records.size(), 2u);
}
