#pragma once

#include "maestro/agent.hpp"
#include "maestro/catalog.hpp"
#include "maestro/nlu.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace maestro::server {

struct ServerConfig {
  std::string scenario_dir;
  std::string snapshot_dir;  // empty disables persistence
  nlu::ProviderConfig provider;
  agent::Clock clock;  // defaults to the system clock
  std::size_t max_body_bytes = 64 * 1024;
  std::chrono::milliseconds keepalive{15000};
};

struct LoadReport {
  std::vector<std::string> loaded;
  std::vector<std::string> warnings;
};

// Session registry plus the HTTP front end. The session operations are usable
// without a socket.
class SessionServer {
public:
  explicit SessionServer(ServerConfig config);
  ~SessionServer();

  // Loads every *.json scenario in the configured directory, and any
  // snapshots found in the snapshot directory.
  LoadReport load();
  void add_scenario(catalog::ScenarioPtr scenario);

  json scenarios() const;

  // Errors carry codes unknown_scenario, unknown_session, conflict,
  // bad_request, schema_mismatch, parse_error.
  std::string create_session(const std::string &scenario_id, agent::Mode mode);
  std::vector<agent::AgentEvent> post_message(const std::string &session_id, const std::string &text);
  std::vector<agent::AgentEvent> post_action(const std::string &session_id, const agent::GuiAction &action);

  // Events with index >= from. An index past the end replays from 0.
  std::vector<agent::AgentEvent> events(const std::string &session_id, std::size_t from) const;
  // Blocks until an event with index >= from exists, the timeout elapses or
  // the server stops. Returns whether one exists.
  bool wait_for(const std::string &session_id, std::size_t from, std::chrono::milliseconds timeout) const;

  json state(const std::string &session_id) const;
  json snapshot(const std::string &session_id) const;
  // Registers the snapshot's session under its own id, replacing any live one.
  std::string restore(const json &snapshot);

  void register_routes(httplib::Server &http);
  // Blocks. Returns false when the address cannot be bound.
  bool listen(const std::string &host, int port);
  int bind_any_port(const std::string &host);
  bool listen_after_bind();
  void stop();

private:
  struct Session;
  std::shared_ptr<Session> find(const std::string &session_id) const;
  const agent::Agent &agent_for(const std::string &scenario_id, agent::Mode mode);
  void persist(const Session &s) const;
  std::vector<agent::AgentEvent> run(const std::string &session_id,
                                     const std::function<std::vector<agent::AgentEvent>(const agent::Agent &, agent::SessionState &)> &turn);

  ServerConfig config_;
  std::shared_ptr<nlu::Provider> provider_;
  mutable std::shared_mutex mu_;
  std::map<std::string, catalog::ScenarioPtr> scenarios_;
  std::map<std::string, std::unique_ptr<agent::Agent>> agents_;  // scenario|mode
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
  std::unique_ptr<httplib::Server> http_;
  std::atomic<bool> stopping_{false};
};

// HTTP status for an Error code.
int status_for(const std::string &code);
json error_body(const std::string &code, const std::string &message);

} // namespace maestro::server
