#pragma once

#include "maestro/catalog.hpp"
#include "maestro/preference_memory.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace maestro::nlu {

enum class UtteranceClass { preference_statement, information_seeking, action_request, other };

std::string_view to_string(UtteranceClass c);
UtteranceClass utterance_class_from_string(std::string_view text);

enum class Channel { chat, gui_action };

struct Utterance {
  std::string text;
  int turn_index = 0;
  Channel channel = Channel::chat;
};

enum class ActionKind { none, affirm, decline, back, next, show_all, submit, select };

std::string_view to_string(ActionKind kind);
ActionKind action_kind_from_string(std::string_view text);

struct ActionIntent {
  ActionKind kind = ActionKind::none;
  std::string target_stage;  // back
  std::string option_id;     // select; empty when the reference did not resolve
  std::string mention;       // the text that referred to an option

  bool operator==(const ActionIntent &) const = default;
};

struct ExtractionResult {
  std::vector<prefs::PreferenceRecord> records;
  UtteranceClass utterance_class = UtteranceClass::other;
  ActionIntent action;
  std::vector<std::string> asked_attributes;  // information-seeking targets
  bool degraded = false;
  json provider_trace = json::object();
};

// What the provider may look at besides the utterance itself.
struct Context {
  const catalog::Scenario *scenario = nullptr;
  const catalog::StageDef *stage = nullptr;
  std::vector<catalog::OptionItem> options;  // options at the current stage
  json block = json::object();               // condensed session context
};

enum class ProviderKind { rules, remote };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::rules;
  std::string endpoint;  // base URL of a chat-completion API, e.g. http://host:port/v1
  std::string model;
  std::chrono::milliseconds timeout{10000};
  int retry_limit = 2;
  std::string api_key_env = "MAESTRO_API_KEY";
};

class Provider {
public:
  virtual ~Provider() = default;
  virtual ExtractionResult extract(const Utterance &utterance, const Context &context) = 0;
  virtual UtteranceClass classify_only(const Utterance &utterance, const Context *context) = 0;
  virtual std::string name() const = 0;
};

// Deterministic pattern grammar over the scenario's attribute vocabulary.
class RulesProvider final : public Provider {
public:
  ExtractionResult extract(const Utterance &utterance, const Context &context) override;
  UtteranceClass classify_only(const Utterance &utterance, const Context *context) override;
  std::string name() const override { return "rules"; }
};

// Chat-completion endpoint with tool schemas; falls back to the rules
// provider when the endpoint fails or returns something unusable.
class RemoteProvider final : public Provider {
public:
  explicit RemoteProvider(ProviderConfig config);
  ExtractionResult extract(const Utterance &utterance, const Context &context) override;
  UtteranceClass classify_only(const Utterance &utterance, const Context *context) override;
  std::string name() const override { return "remote"; }

private:
  // Returns the parsed tool-call arguments, or nullopt after retries.
  std::optional<json> call_tool(const std::string &tool, const Utterance &utterance, const Context *context,
                                json &trace);

  ProviderConfig config_;
  RulesProvider fallback_;
};

// Throws Error("invalid_config") for a remote config without an endpoint.
std::unique_ptr<Provider> make_provider(const ProviderConfig &config);

// Prompt material bundled with the library.
const std::string &system_prompt();
const json &tool_schemas();

} // namespace maestro::nlu
