#include "maestro/server.hpp"

#include <httplib.h>

#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace maestro::server {

namespace fs = std::filesystem;

struct SessionServer::Session {
  mutable std::mutex mu;
  mutable std::condition_variable cv;
  const agent::Agent *engine = nullptr;
  agent::SessionState state;
  std::vector<agent::AgentEvent> log;
};

namespace {

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string new_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return std::string("s-") + buf;
}

json events_json(const std::vector<agent::AgentEvent> &events) {
  json out = json::array();
  for (const auto &e : events) out.push_back(agent::event_to_json(e));
  return out;
}

} // namespace

int status_for(const std::string &code) {
  if (code == "unknown_session" || code == "unknown_scenario") return 404;
  if (code == "conflict") return 409;
  if (code == "payload_too_large") return 413;
  if (code == "internal") return 500;
  return 400;
}

json error_body(const std::string &code, const std::string &message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

SessionServer::SessionServer(ServerConfig config) : config_(std::move(config)) {
  if (!config_.clock) config_.clock = agent::system_clock();
  provider_ = std::shared_ptr<nlu::Provider>(nlu::make_provider(config_.provider));
}

SessionServer::~SessionServer() { stop(); }

void SessionServer::add_scenario(catalog::ScenarioPtr scenario) {
  std::unique_lock lock(mu_);
  const std::string id = scenario->brief().id;
  for (const auto mode : {agent::Mode::maestro, agent::Mode::baseline}) {
    agent::AgentConfig cfg;
    cfg.mode = mode;
    cfg.clock = config_.clock;
    agents_[id + "|" + std::string(agent::to_string(mode))] = std::make_unique<agent::Agent>(scenario, provider_, cfg);
  }
  scenarios_[id] = std::move(scenario);
}

LoadReport SessionServer::load() {
  LoadReport report;
  if (!config_.scenario_dir.empty()) {
    std::error_code ec;
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(config_.scenario_dir, ec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    if (ec) report.warnings.push_back("cannot read scenario directory " + config_.scenario_dir + ": " + ec.message());
    std::sort(files.begin(), files.end());
    for (const auto &f : files) {
      try {
        auto sc = std::make_shared<const catalog::Scenario>(catalog::load_scenario(read_file(f)));
        report.loaded.push_back(sc->brief().id);
        add_scenario(std::move(sc));
      } catch (const Error &e) {
        report.warnings.push_back(f.filename().string() + ": " + e.what());
      }
    }
    if (files.empty() && !ec) report.warnings.push_back("no scenarios found in " + config_.scenario_dir);
  }
  if (!config_.snapshot_dir.empty() && fs::is_directory(config_.snapshot_dir)) {
    for (const auto &entry : fs::directory_iterator(config_.snapshot_dir)) {
      if (entry.path().extension() != ".json") continue;
      try {
        restore(json::parse(read_file(entry.path())));
      } catch (const std::exception &e) {
        report.warnings.push_back("snapshot " + entry.path().filename().string() + ": " + e.what());
      }
    }
  }
  return report;
}

json SessionServer::scenarios() const {
  std::shared_lock lock(mu_);
  json out = json::array();
  for (const auto &[id, sc] : scenarios_) {
    json stages = json::array();
    for (const auto &st : sc->workflow().stages) stages.push_back(st.id);
    out.push_back({{"id", id}, {"title", sc->brief().title}, {"background", sc->brief().background}, {"stages", stages}});
  }
  return out;
}

const agent::Agent &SessionServer::agent_for(const std::string &scenario_id, agent::Mode mode) {
  std::shared_lock lock(mu_);
  const auto it = agents_.find(scenario_id + "|" + std::string(agent::to_string(mode)));
  if (it == agents_.end()) throw Error("unknown_scenario", "unknown scenario '" + scenario_id + "'");
  return *it->second;
}

std::shared_ptr<SessionServer::Session> SessionServer::find(const std::string &session_id) const {
  std::shared_lock lock(mu_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error("unknown_session", "unknown session '" + session_id + "'");
  return it->second;
}

void SessionServer::persist(const Session &s) const {
  if (config_.snapshot_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(config_.snapshot_dir, ec);
  const fs::path final_path = fs::path(config_.snapshot_dir) / (s.state.session_id + ".json");
  const fs::path tmp = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << agent::snapshot(s.state).dump();
  }
  fs::rename(tmp, final_path, ec);
}

std::string SessionServer::create_session(const std::string &scenario_id, agent::Mode mode) {
  const agent::Agent &engine = agent_for(scenario_id, mode);
  auto s = std::make_shared<Session>();
  s->engine = &engine;
  std::string id;
  {
    std::unique_lock lock(mu_);
    do id = new_id(); while (sessions_.count(id));
    s->state = engine.start(id);
    s->log = agent::event_log(s->state);
    sessions_[id] = s;
  }
  std::lock_guard lock(s->mu);
  persist(*s);
  return id;
}

std::vector<agent::AgentEvent> SessionServer::run(
    const std::string &session_id,
    const std::function<std::vector<agent::AgentEvent>(const agent::Agent &, agent::SessionState &)> &turn) {
  auto s = find(session_id);
  std::vector<agent::AgentEvent> events;
  {
    std::lock_guard lock(s->mu);
    if (s->state.submitted) throw Error("conflict", "session '" + session_id + "' is already submitted");
    events = turn(*s->engine, s->state);
    s->log.insert(s->log.end(), events.begin(), events.end());
    persist(*s);
  }
  s->cv.notify_all();
  return events;
}

std::vector<agent::AgentEvent> SessionServer::post_message(const std::string &session_id, const std::string &text) {
  return run(session_id, [&](const agent::Agent &a, agent::SessionState &st) { return a.handle_user_message(st, text); });
}

std::vector<agent::AgentEvent> SessionServer::post_action(const std::string &session_id, const agent::GuiAction &action) {
  return run(session_id, [&](const agent::Agent &a, agent::SessionState &st) { return a.handle_gui_action(st, action); });
}

std::vector<agent::AgentEvent> SessionServer::events(const std::string &session_id, std::size_t from) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  if (from > s->log.size()) from = 0;
  return {s->log.begin() + static_cast<std::ptrdiff_t>(from), s->log.end()};
}

bool SessionServer::wait_for(const std::string &session_id, std::size_t from, std::chrono::milliseconds timeout) const {
  auto s = find(session_id);
  std::unique_lock lock(s->mu);
  return s->cv.wait_for(lock, timeout, [&] { return s->log.size() > from || stopping_.load(); }) && s->log.size() > from;
}

json SessionServer::state(const std::string &session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  json out = agent::session_to_json(s->state);
  out["eventCount"] = s->log.size();
  out["context"] = s->engine->build_context(s->state);
  return out;
}

json SessionServer::snapshot(const std::string &session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  return agent::snapshot(s->state);
}

std::string SessionServer::restore(const json &doc) {
  agent::SessionState st = agent::restore(doc);
  const agent::Agent &engine = agent_for(st.scenario_id, st.mode);
  auto s = std::make_shared<Session>();
  s->engine = &engine;
  s->log = agent::event_log(st);
  s->state = std::move(st);
  const std::string id = s->state.session_id;
  std::shared_ptr<Session> old;
  {
    std::unique_lock lock(mu_);
    if (auto it = sessions_.find(id); it != sessions_.end()) old = it->second;
    sessions_[id] = s;
  }
  if (old) old->cv.notify_all();
  return id;
}

void SessionServer::register_routes(httplib::Server &http) {
  auto fail = [](httplib::Response &res, const std::string &code, const std::string &message) {
    res.status = status_for(code);
    res.set_content(error_body(code, message).dump(), "application/json");
  };
  // Runs a handler, mapping Error codes and malformed bodies to error JSON.
  auto guarded = [this, fail](auto body) {
    return [this, fail, body](const httplib::Request &req, httplib::Response &res) {
      try {
        if (req.body.size() > config_.max_body_bytes) {
          fail(res, "payload_too_large", "request body exceeds " + std::to_string(config_.max_body_bytes) + " bytes");
          return;
        }
        body(req, res);
      } catch (const Error &e) {
        fail(res, e.code(), e.what());
      } catch (const json::exception &e) {
        fail(res, "bad_request", std::string("malformed JSON body: ") + e.what());
      } catch (const std::exception &e) {
        fail(res, "internal", e.what());
      }
    };
  };
  auto parse_body = [](const httplib::Request &req) {
    auto j = json::parse(req.body.empty() ? "{}" : req.body);
    if (!j.is_object()) throw Error("bad_request", "request body must be a JSON object");
    return j;
  };
  auto reply = [](httplib::Response &res, const json &j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  };

  http.Get("/scenarios", guarded([this, reply](const httplib::Request &, httplib::Response &res) {
             reply(res, {{"scenarios", scenarios()}});
           }));

  http.Post("/sessions", guarded([this, parse_body, reply](const httplib::Request &req, httplib::Response &res) {
              const json b = parse_body(req);
              if (!b.contains("scenarioId") || !b["scenarioId"].is_string()) throw Error("bad_request", "scenarioId is required");
              agent::Mode mode = agent::Mode::maestro;
              try {
                mode = agent::mode_from_string(b.value("mode", "maestro"));
              } catch (const Error &e) {
                throw Error("bad_request", e.what());
              }
              const std::string id = create_session(b["scenarioId"].get<std::string>(), mode);
              reply(res, {{"sessionId", id}, {"events", events_json(events(id, 0))}}, 201);
            }));

  http.Post(R"(/sessions/([^/]+)/message)",
            guarded([this, parse_body, reply](const httplib::Request &req, httplib::Response &res) {
              const json b = parse_body(req);
              if (!b.contains("text") || !b["text"].is_string()) throw Error("bad_request", "text is required");
              const auto evs = post_message(req.matches[1], b["text"].get<std::string>());
              reply(res, {{"accepted", true}, {"events", events_json(evs)}});
            }));

  http.Post(R"(/sessions/([^/]+)/action)",
            guarded([this, parse_body, reply](const httplib::Request &req, httplib::Response &res) {
              const auto action = agent::action_from_json(parse_body(req));
              const auto evs = post_action(req.matches[1], action);
              reply(res, {{"accepted", true}, {"events", events_json(evs)}});
            }));

  http.Get(R"(/sessions/([^/]+)/state)", guarded([this, reply](const httplib::Request &req, httplib::Response &res) {
             reply(res, state(req.matches[1]));
           }));

  http.Get(R"(/sessions/([^/]+)/snapshot)", guarded([this, reply](const httplib::Request &req, httplib::Response &res) {
             reply(res, snapshot(req.matches[1]));
           }));

  http.Post("/sessions/restore", guarded([this, parse_body, reply](const httplib::Request &req, httplib::Response &res) {
              reply(res, {{"sessionId", restore(parse_body(req))}}, 201);
            }));

  http.Get(R"(/sessions/([^/]+)/events)", guarded([this](const httplib::Request &req, httplib::Response &res) {
             const std::string id = req.matches[1];
             find(id);  // 404 before the stream starts
             std::size_t from = 0;
             if (req.has_param("from")) {
               try {
                 const long long v = std::stoll(req.get_param_value("from"));
                 from = v < 0 ? 0 : static_cast<std::size_t>(v);
               } catch (const std::exception &) {
                 from = 0;
               }
             }
             const bool follow = req.get_param_value("follow") != "0";
             if (from > events(id, 0).size()) from = 0;
             auto next = std::make_shared<std::size_t>(from);
             res.set_header("Cache-Control", "no-cache");
             res.set_chunked_content_provider("text/event-stream", [this, id, next, follow](std::size_t, httplib::DataSink &sink) {
               std::vector<agent::AgentEvent> batch;
               try {
                 batch = events(id, *next);
                 if (*next > 0 && batch.size() && batch.front().index != *next) batch.clear();
               } catch (const Error &) {
                 sink.done();
                 return false;
               }
               for (const auto &e : batch) {
                 const std::string frame = "id: " + std::to_string(e.index) + "\nevent: " + std::string(agent::to_string(e.kind)) +
                                           "\ndata: " + agent::event_to_json(e).dump() + "\n\n";
                 if (!sink.write(frame.data(), frame.size())) return false;
                 *next = e.index + 1;
               }
               if (!follow && batch.empty()) {
                 sink.done();
                 return true;
               }
               if (stopping_) {
                 sink.done();
                 return true;
               }
               if (batch.empty()) {
                 if (!wait_for(id, *next, config_.keepalive)) {
                   static const std::string ping = ": keepalive\n\n";
                   if (!sink.write(ping.data(), ping.size())) return false;
                 }
               }
               return true;
             });
           }));
}

bool SessionServer::listen(const std::string &host, int port) {
  if (!http_) {
    http_ = std::make_unique<httplib::Server>();
    http_->set_payload_max_length(config_.max_body_bytes * 4);
    register_routes(*http_);
  }
  return http_->listen(host, port);
}

int SessionServer::bind_any_port(const std::string &host) {
  http_ = std::make_unique<httplib::Server>();
  http_->set_payload_max_length(config_.max_body_bytes * 4);
  register_routes(*http_);
  return http_->bind_to_any_port(host);
}

bool SessionServer::listen_after_bind() { return http_ && http_->listen_after_bind(); }

void SessionServer::stop() {
  stopping_ = true;
  std::vector<std::shared_ptr<Session>> all;
  {
    std::shared_lock lock(mu_);
    for (const auto &[id, s] : sessions_) all.push_back(s);
  }
  for (const auto &s : all) s->cv.notify_all();
  if (http_) http_->stop();
}

} // namespace maestro::server
