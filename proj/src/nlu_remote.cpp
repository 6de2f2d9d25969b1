#include "maestro/nlu.hpp"

#include "maestro_bundled_data.hpp"

#include <httplib.h>

#include <cstdlib>

namespace maestro::nlu {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host:port
  std::string base;    // path prefix without trailing slash
};

Endpoint split_endpoint(const std::string &url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("invalid_config", "endpoint must be an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  e.base = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!e.base.empty() && e.base.back() == '/') e.base.pop_back();
  return e;
}

const json *find_tool(const std::string &name) {
  for (const auto &t : tool_schemas().at("tools")) {
    if (t.at("function").at("name") == name) return &t;
  }
  return nullptr;
}

// Pulls the first tool call's arguments out of a chat-completion response.
std::optional<json> tool_arguments(const json &response, const std::string &tool) {
  if (!response.contains("choices") || response["choices"].empty()) return std::nullopt;
  const json &msg = response["choices"][0].value("message", json::object());
  if (!msg.contains("tool_calls")) return std::nullopt;
  for (const auto &call : msg["tool_calls"]) {
    const json &fn = call.value("function", json::object());
    if (fn.value("name", "") != tool) continue;
    const json &args = fn.value("arguments", json());
    if (args.is_object()) return std::optional<json>(std::in_place, args);
    if (args.is_string()) {
      auto parsed = json::parse(args.get<std::string>(), nullptr, false);
      if (!parsed.is_discarded() && parsed.is_object()) return std::optional<json>(std::in_place, std::move(parsed));
    }
    return std::nullopt;
  }
  return std::nullopt;
}

} // namespace

const std::string &system_prompt() {
  static const std::string prompt = kBundledSystemPrompt;
  return prompt;
}

const json &tool_schemas() {
  static const json tools = json::parse(kBundledToolSchemas);
  return tools;
}

RemoteProvider::RemoteProvider(ProviderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error("invalid_config", "remote provider needs an endpoint");
  split_endpoint(config_.endpoint);
}

std::optional<json> RemoteProvider::call_tool(const std::string &tool, const Utterance &utterance, const Context *context,
                                              json &trace) {
  const Endpoint ep = split_endpoint(config_.endpoint);
  const json *schema = find_tool(tool);
  json body = {{"model", config_.model},
               {"temperature", 0},
               {"messages",
                {{{"role", "system"}, {"content", system_prompt()}},
                 {{"role", "user"},
                  {"content", "Context:\n" + (context ? context->block.dump(2) : std::string("{}")) +
                                  "\n\nUser message: " + utterance.text}}}},
               {"tools", json::array({*schema})},
               {"tool_choice", {{"type", "function"}, {"function", {{"name", tool}}}}}};

  httplib::Headers headers;
  if (const char *key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);

  const int attempts = 1 + std::max(0, config_.retry_limit);
  json errors = json::array();
  for (int attempt = 0; attempt < attempts; ++attempt) {
    httplib::Client client(ep.origin);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(ep.base + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      errors.push_back("transport: " + httplib::to_string(res.error()));
      continue;
    }
    if (res->status != 200) {
      errors.push_back("http status " + std::to_string(res->status));
      continue;
    }
    const auto parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
      errors.push_back("response is not JSON");
      continue;
    }
    if (auto args = tool_arguments(parsed, tool)) {
      trace["attempts"] = attempt + 1;
      return args;
    }
    errors.push_back("response carries no usable " + tool + " call");
  }
  trace["attempts"] = attempts;
  trace["errors"] = errors;
  return std::nullopt;
}

ExtractionResult RemoteProvider::extract(const Utterance &utterance, const Context &context) {
  json trace = {{"provider", "remote"}, {"model", config_.model}};
  auto degrade = [&](const std::string &why) {
    ExtractionResult r = fallback_.extract(utterance, context);
    trace["degradedBecause"] = why;
    trace["fallback"] = r.provider_trace;
    r.provider_trace = trace;
    r.degraded = true;
    return r;
  };
  if (utterance.channel == Channel::gui_action) return ExtractionResult{};

  const auto args = call_tool("extract_preferences", utterance, &context, trace);
  if (!args) return degrade("endpoint unavailable");

  ExtractionResult out;
  try {
    out.utterance_class = utterance_class_from_string(args->at("utteranceClass").get<std::string>());
    for (const auto &jr : args->value("records", json::array())) {
      try {
        auto r = prefs::record_from_json(jr);
        r.id.clear();
        r.active = true;
        r.origin_turn = utterance.turn_index;
        if (context.scenario) prefs::validate_record(r, context.scenario->workflow());
        out.records.push_back(std::move(r));
      } catch (const Error &e) {
        trace["rejected"].push_back({{"record", jr}, {"reason", e.what()}});
      }
    }
    if (args->contains("action") && args->at("action").is_object()) {
      const json &a = args->at("action");
      out.action.kind = action_kind_from_string(a.value("kind", "none"));
      out.action.target_stage = a.value("targetStage", "");
      out.action.option_id = a.value("optionId", "");
    }
    out.asked_attributes = args->value("askedAttributes", std::vector<std::string>{});
  } catch (const std::exception &e) {
    return degrade(std::string("unparseable tool arguments: ") + e.what());
  }
  if (out.utterance_class != UtteranceClass::preference_statement) out.records.clear();
  trace["arguments"] = *args;
  out.provider_trace = trace;
  return out;
}

UtteranceClass RemoteProvider::classify_only(const Utterance &utterance, const Context *context) {
  json trace = json::object();
  if (const auto args = call_tool("classify_utterance", utterance, context, trace)) {
    try {
      return utterance_class_from_string(args->at("utteranceClass").get<std::string>());
    } catch (const std::exception &) {
    }
  }
  return fallback_.classify_only(utterance, context);
}

std::unique_ptr<Provider> make_provider(const ProviderConfig &config) {
  if (config.kind == ProviderKind::remote) return std::make_unique<RemoteProvider>(config);
  return std::make_unique<RulesProvider>();
}

} // namespace maestro::nlu
