#include "maestro/catalog.hpp"
#include "maestro/harness.hpp"
#include "maestro/server.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace maestro;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInputError = 2;

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io_error", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string path_text(const Path &p) {
  std::string out;
  for (const auto &s : p) out += (out.empty() ? "" : " > ") + s.option_id;
  return out;
}

// A path to a scenario file, or an id looked up in the scenario directory.
catalog::ScenarioPtr resolve_scenario(const std::string &ref, const std::string &dir) {
  if (fs::is_regular_file(ref)) return std::make_shared<const catalog::Scenario>(catalog::load_scenario_file(ref));
  if (!dir.empty() && fs::is_directory(dir)) {
    for (const auto &entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".json") continue;
      auto sc = catalog::load_scenario_file(entry.path().string());
      if (sc.brief().id == ref) return std::make_shared<const catalog::Scenario>(std::move(sc));
    }
  }
  throw Error("unknown_scenario", "no scenario '" + ref + "' (not a file, not found in " + dir + ")");
}

struct ServeOpts {
  std::string scenario_dir = "data/scenarios";
  std::string snapshot_dir;
  std::string listen = "127.0.0.1:8080";
  std::string provider = "rules";
  std::string endpoint;
  std::string model = "gpt-4o";
};

server::SessionServer *g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

nlu::ProviderConfig provider_config(const std::string &kind, const std::string &endpoint, const std::string &model) {
  nlu::ProviderConfig pc;
  pc.kind = kind == "remote" ? nlu::ProviderKind::remote : nlu::ProviderKind::rules;
  pc.endpoint = endpoint;
  pc.model = model;
  if (const char *e = std::getenv("MAESTRO_ENDPOINT"); e && *e && pc.endpoint.empty()) pc.endpoint = e;
  return pc;
}

int serve(const ServeOpts &o) {
  const auto colon = o.listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "error: --listen wants host:port, got '" << o.listen << "'\n";
    return kInputError;
  }
  const std::string host = o.listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(o.listen.substr(colon + 1));
  } catch (const std::exception &) {
    std::cerr << "error: bad port in '" << o.listen << "'\n";
    return kInputError;
  }
  server::ServerConfig cfg;
  cfg.scenario_dir = o.scenario_dir;
  cfg.snapshot_dir = o.snapshot_dir;
  try {
    cfg.provider = provider_config(o.provider, o.endpoint, o.model);
    server::SessionServer srv(cfg);
    const auto report = srv.load();
    for (const auto &w : report.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto &id : report.loaded) std::cerr << "loaded scenario " << id << "\n";
    g_server = &srv;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    if (!srv.listen(host, port)) {
      std::cerr << "error: cannot listen on " << o.listen << "\n";
      g_server = nullptr;
      return kFailed;
    }
    g_server = nullptr;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

int validate(const std::string &path) {
  catalog::Scenario sc;
  try {
    sc = catalog::load_scenario_file(path);
  } catch (const Error &e) {
    std::cerr << (e.code() == "parse_error" ? "parse error: " : "invalid scenario: ") << e.what() << "\n";
    return kInputError;
  }
  const auto report = catalog::validate_unique_solution(sc);
  std::cout << "scenario: " << sc.brief().id << "\n";
  std::cout << "full paths: " << catalog::enumerate_paths(sc).size() << "\n";
  std::cout << "solution count: " << report.solution_count << "\n";
  for (const auto &w : report.witness_paths) std::cout << "witness: " << path_text(w) << "\n";
  std::cout << "declared: " << path_text(sc.solution()) << "\n";
  if (report.passed()) {
    std::cout << "unique solution: yes\n";
    return kOk;
  }
  std::cout << "unique solution: no" << (report.solution_count == 1 ? " (witness differs from declared solution)" : "") << "\n";
  return kFailed;
}

struct RunOpts {
  std::string scenario;
  std::string scenario_dir = "data/scenarios";
  std::string persona;
  std::string mode = "maestro";
  std::size_t turn_limit = 0;
  std::string out = "runs";
  unsigned workers = 1;
};

int run(const RunOpts &o) {
  std::vector<harness::Persona> personas;
  agent::Mode mode;
  try {
    mode = agent::mode_from_string(o.mode);
    personas = fs::is_directory(o.persona) ? harness::load_persona_dir(o.persona)
                                           : std::vector<harness::Persona>{harness::load_persona_file(o.persona)};
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }

  struct Job {
    harness::Persona persona;
    catalog::ScenarioPtr scenario;
    harness::TrialResult result;
  };
  std::vector<Job> jobs;
  try {
    std::map<std::string, catalog::ScenarioPtr> cache;
    for (auto &p : personas) {
      const std::string ref = o.scenario.empty() ? p.scenario_id : o.scenario;
      if (!cache.count(ref)) cache[ref] = resolve_scenario(ref, o.scenario_dir);
      const auto &sc = cache[ref];
      if (sc->brief().id != p.scenario_id) continue;  // persona written for another scenario
      jobs.push_back({std::move(p), sc, {}});
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  if (jobs.empty()) {
    std::cerr << "error: no persona matches the scenario\n";
    return kInputError;
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      harness::TrialOptions opts;
      opts.mode = mode;
      if (o.turn_limit) opts.turn_limit = o.turn_limit;
      jobs[i].result = harness::run_trial(jobs[i].scenario, jobs[i].persona, opts);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < std::max(1u, o.workers); ++w) pool.emplace_back(work);
  work();
  for (auto &t : pool) t.join();

  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) {
    std::cerr << "error: cannot create " << o.out << ": " << ec.message() << "\n";
    return kInputError;
  }
  std::ofstream table(fs::path(o.out) / "metrics.tsv");
  table << harness::metrics_header() << "\n";
  std::cout << harness::metrics_header() << "\n";
  int rc = kOk;
  for (const auto &j : jobs) {
    const std::string sid = j.scenario->brief().id;
    const std::string row = harness::metrics_row(sid, j.persona.id, mode, j.result.metrics);
    table << row << "\n";
    std::cout << row << "\n";
    std::ofstream(fs::path(o.out) / (sid + "__" + j.persona.id + "__" + o.mode + ".jsonl"), std::ios::binary)
        << harness::transcript_jsonl(j.result.transcript);
    if (!j.result.valid) {
      std::cerr << "invalid trial " << j.persona.id << ": " << j.result.protocol_error << "\n";
      rc = kFailed;
    }
  }
  return rc;
}

int replay_cmd(const std::string &transcript_path, const std::string &scenario, const std::string &dir) {
  std::vector<json> lines;
  catalog::ScenarioPtr sc;
  try {
    lines = harness::parse_transcript(read_file(transcript_path));
    if (lines.empty()) throw Error("parse_error", "empty transcript");
    sc = resolve_scenario(scenario.empty() ? lines.front().value("scenarioId", "") : scenario, dir);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  harness::ReplayReport r;
  try {
    r = harness::replay(sc, lines);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  std::cout << "verified lines: " << r.verified_lines << "\n";
  if (r.identical) {
    std::cout << "diff: empty\n";
    return kOk;
  }
  if (r.divergent_line) {
    std::cout << "first divergence: line " << *r.divergent_line + 1;
    if (r.divergent_event) std::cout << ", event " << *r.divergent_event;
    std::cout << "\n" << r.detail << "\n";
  } else {
    std::cout << "transcript is a verified prefix; " << r.detail << "\n";
  }
  return kFailed;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Preference-aware booking agent: server, scenario validation and headless trials"};
  app.require_subcommand(1);

  ServeOpts so;
  auto *serve_cmd = app.add_subcommand("serve", "Run the HTTP session server");
  serve_cmd->add_option("--scenario-dir", so.scenario_dir, "Directory of scenario files")->capture_default_str();
  serve_cmd->add_option("--snapshot-dir", so.snapshot_dir, "Directory for session snapshots");
  serve_cmd->add_option("--listen", so.listen, "host:port")->capture_default_str();
  serve_cmd->add_option("--provider", so.provider, "rules or remote")->check(CLI::IsMember({"rules", "remote"}))->capture_default_str();
  serve_cmd->add_option("--endpoint", so.endpoint, "Chat-completion base URL for the remote provider");
  serve_cmd->add_option("--model", so.model, "Model name for the remote provider")->capture_default_str();

  std::string validate_path;
  auto *validate_cmd = app.add_subcommand("validate", "Check that a scenario has exactly its declared solution");
  validate_cmd->add_option("path", validate_path, "Scenario file")->required();

  RunOpts ro;
  auto *run_cmd = app.add_subcommand("run", "Run personas headlessly and write metrics and transcripts");
  run_cmd->add_option("--scenario", ro.scenario, "Scenario file or id; defaults to each persona's scenario");
  run_cmd->add_option("--scenario-dir", ro.scenario_dir, "Directory searched for scenario ids")->capture_default_str();
  run_cmd->add_option("--persona", ro.persona, "Persona file or directory")->required();
  run_cmd->add_option("--mode", ro.mode, "maestro or baseline")->check(CLI::IsMember({"maestro", "baseline"}))->capture_default_str();
  run_cmd->add_option("--turn-limit", ro.turn_limit, "Override the persona turn limit");
  run_cmd->add_option("--out", ro.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--workers", ro.workers, "Parallel trials")->capture_default_str();

  std::string transcript, replay_scenario, replay_dir = "data/scenarios";
  auto *replay_sub = app.add_subcommand("replay", "Re-execute a transcript and report the first difference");
  replay_sub->add_option("transcript", transcript, "Transcript file (.jsonl)")->required();
  replay_sub->add_option("--scenario", replay_scenario, "Scenario file or id; defaults to the transcript header");
  replay_sub->add_option("--scenario-dir", replay_dir, "Directory searched for scenario ids")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kInputError;
  }

  if (*serve_cmd) return serve(so);
  if (*validate_cmd) return validate(validate_path);
  if (*run_cmd) return run(ro);
  if (*replay_sub) return replay_cmd(transcript, replay_scenario, replay_dir);
  return kInputError;
}
