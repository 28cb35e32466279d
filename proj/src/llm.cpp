#include "ruleforge/llm.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "ruleforge/io.hpp"

namespace ruleforge {

namespace {

using json = nlohmann::ordered_json;

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

}  // namespace

LlmEndpoint LlmEndpoint::from_env() {
  LlmEndpoint e;
  e.base_url = env("RULEFORGE_LLM_BASE_URL");
  e.api_key = env("RULEFORGE_LLM_API_KEY");
  e.model = env("RULEFORGE_LLM_MODEL");
  std::string missing;
  auto need = [&](const std::string& value, const char* name) {
    if (value.empty()) missing += missing.empty() ? name : std::string(", ") + name;
  };
  need(e.base_url, "RULEFORGE_LLM_BASE_URL");
  need(e.api_key, "RULEFORGE_LLM_API_KEY");
  need(e.model, "RULEFORGE_LLM_MODEL");
  if (!missing.empty()) throw ConfigError("llm generator needs environment variables: " + missing);
  return e;
}

std::string chat_request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return json{{"model", request.model}, {"messages", std::move(messages)}, {"temperature", request.temperature}}
      .dump();
}

std::optional<std::string> chat_response_content(std::string_view body) {
  const json doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const json& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message")) return std::nullopt;
  const json& message = first["message"];
  if (!message.is_object() || !message.contains("content") || !message["content"].is_string()) return std::nullopt;
  return message["content"].get<std::string>();
}

HttpChatTransport::HttpChatTransport(LlmEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  const std::string& url = endpoint_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL lacks a scheme: '" + url + "'");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("unsupported URL scheme '" + scheme + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("https endpoints need a build with RULEFORGE_WITH_TLS");
#endif
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? std::string() : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  const bool has_v1 = prefix.size() >= 3 && prefix.compare(prefix.size() - 3, 3, "/v1") == 0;
  path_ = prefix + (has_v1 ? "/chat/completions" : "/v1/chat/completions");
}

ChatExchange HttpChatTransport::exchange(const ChatRequest& request) {
  ChatExchange out;
  out.request_body = chat_request_body(request);
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(endpoint_.timeout);
  client.set_read_timeout(endpoint_.timeout);
  client.set_write_timeout(endpoint_.timeout);
  client.set_bearer_token_auth(endpoint_.api_key);
  const auto res = client.Post(path_, out.request_body, "application/json");
  if (!res) {
    out.error = "transport error: " + httplib::to_string(res.error());
    return out;
  }
  out.http_status = res->status;
  out.response_body = res->body;
  if (res->status != 200) {
    out.error = "transport error: HTTP " + std::to_string(res->status);
    return out;
  }
  if (auto content = chat_response_content(res->body)) {
    out.content = std::move(*content);
  } else {
    out.error = "transport error: response has no choices[0].message.content";
  }
  return out;
}

LlmGenerator::LlmGenerator(std::shared_ptr<ChatTransport> transport, std::string model)
    : transport_(std::move(transport)), model_(std::move(model)) {
  if (!transport_) throw ConfigError("llm generator needs a transport");
}

GenerationResult LlmGenerator::generate(const RefinementContext& ctx, int attempt) {
  Transcript t;
  t.attempt = attempt;
  t.prompt = build_prompt(ctx);
  t.exchange = transport_->exchange({model_, {{"user", t.prompt}}, 0.0});
  transcripts_.push_back(t);
  if (!t.exchange.error.empty()) return GenerationFailure{t.exchange.error};
  return candidate_from_response(t.exchange.content, ctx, CandidateSource::LLM, attempt);
}

std::string write_transcripts_json(const std::vector<Transcript>& transcripts) {
  json doc{{"schema_version", kSchemaVersion}, {"transcripts", json::array()}};
  for (const auto& t : transcripts) {
    doc["transcripts"].push_back({{"attempt", t.attempt},
                                  {"prompt", t.prompt},
                                  {"request_body", t.exchange.request_body},
                                  {"http_status", t.exchange.http_status},
                                  {"response_body", t.exchange.response_body},
                                  {"content", t.exchange.content},
                                  {"error", t.exchange.error}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace ruleforge
