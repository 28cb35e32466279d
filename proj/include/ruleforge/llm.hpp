#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ruleforge/candidates.hpp"

namespace ruleforge {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
};

// One request/response round trip, kept verbatim for audit. `error` is
// empty iff `content` holds the assistant reply.
struct ChatExchange {
  std::string request_body;
  std::string response_body;
  int http_status = 0;
  std::string content;
  std::string error;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // Transport failures are reported in ChatExchange::error, not thrown.
  virtual ChatExchange exchange(const ChatRequest& request) = 0;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LlmEndpoint {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string api_key;
  std::string model;
  std::chrono::seconds timeout{120};

  // Reads RULEFORGE_LLM_BASE_URL, RULEFORGE_LLM_API_KEY, RULEFORGE_LLM_MODEL.
  // Throws ConfigError naming every missing variable.
  static LlmEndpoint from_env();
};

// OpenAI-style chat completions body: {"model", "messages", "temperature"}.
std::string chat_request_body(const ChatRequest& request);
// Extracts choices[0].message.content; nullopt if the body has another shape.
std::optional<std::string> chat_response_content(std::string_view body);

// POSTs to <base>/v1/chat/completions, or <base>/chat/completions when the
// base URL already ends in /v1. https needs a TLS-enabled build.
class HttpChatTransport final : public ChatTransport {
 public:
  explicit HttpChatTransport(LlmEndpoint endpoint);
  ChatExchange exchange(const ChatRequest& request) override;
  const LlmEndpoint& endpoint() const { return endpoint_; }

 private:
  LlmEndpoint endpoint_;
  std::string scheme_host_port_;
  std::string path_;
};

struct Transcript {
  int attempt = 0;
  std::string prompt;
  ChatExchange exchange;
};

// Sends build_prompt(ctx) as a single user message at temperature 0 and
// pipes the reply through the response parser.
class LlmGenerator final : public CandidateGenerator {
 public:
  LlmGenerator(std::shared_ptr<ChatTransport> transport, std::string model);
  GenerationResult generate(const RefinementContext& ctx, int attempt) override;
  CandidateSource source() const override { return CandidateSource::LLM; }
  const std::vector<Transcript>& transcripts() const { return transcripts_; }

 private:
  std::shared_ptr<ChatTransport> transport_;
  std::string model_;
  std::vector<Transcript> transcripts_;
};

std::string write_transcripts_json(const std::vector<Transcript>& transcripts);

}  // namespace ruleforge
