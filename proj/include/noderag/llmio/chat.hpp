#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace noderag::llmio {

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatRequest {
  /// Registry name of the template this request was rendered from; empty for
  /// free-form requests.
  std::string template_name;
  /// Placeholder values the prompts were rendered with.
  std::map<std::string, std::string> fields;
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  int max_output_tokens = 2048;
};

struct ChatResponse {
  std::string text;
  Usage usage;
};

/// Thread-safe chat-completion client.
class ChatClient {
public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;

  std::string chat(const ChatRequest& request) { return complete(request).text; }
};

/// The text a mock digests: system and user prompt joined by a blank line.
std::string flatten_prompt(const ChatRequest& request);

/// Offline chat client. Free-form templates answer "MOCK:" followed by the
/// first 8 hex digits of SHA-256 over the flattened prompt. The structured
/// templates (decompose, high_level, query_entities) answer with JSON
/// derived from the request fields by fixed text heuristics, so an all-mock
/// pipeline produces a real graph.
class MockChatClient final : public ChatClient {
public:
  ChatResponse complete(const ChatRequest& request) override;
};

/// Decorator recording every request that passes through it.
class AuditingChatClient final : public ChatClient {
public:
  explicit AuditingChatClient(std::shared_ptr<ChatClient> inner) : inner_(std::move(inner)) {}

  ChatResponse complete(const ChatRequest& request) override;
  std::vector<ChatRequest> requests() const;

private:
  std::shared_ptr<ChatClient> inner_;
  mutable std::mutex mu_;
  std::vector<ChatRequest> log_;
};

}  // namespace noderag::llmio
