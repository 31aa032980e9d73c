#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "noderag/llmio/chat.hpp"
#include "noderag/llmio/embed.hpp"

namespace noderag::llmio {

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{20'000};
};

struct EndpointConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  RetryPolicy retry;
  double requests_per_minute = 0.0;  // 0 = unlimited
  std::chrono::seconds timeout{120};
};

/// Process-wide ceiling on in-flight provider requests.
void set_global_request_ceiling(std::size_t ceiling);
std::size_t global_request_ceiling();

/// POSTs JSON to `<base_url><path>` under the global ceiling and the
/// endpoint's token bucket, retrying transport failures, 408, 429 and 5xx
/// with exponential backoff. Throws AuthError on 401/403,
/// ContextLengthError when the provider rejects the prompt size, and
/// RetriesExhaustedError once max_attempts is spent.
nlohmann::json post_json(const EndpointConfig& endpoint, const std::string& path,
                         const nlohmann::json& body);

/// OpenAI-compatible /chat/completions client.
class OpenAiChatClient final : public ChatClient {
public:
  explicit OpenAiChatClient(EndpointConfig endpoint) : endpoint_(std::move(endpoint)) {}
  ChatResponse complete(const ChatRequest& request) override;

private:
  EndpointConfig endpoint_;
};

/// OpenAI-compatible /embeddings client. Every returned vector must have
/// `dim` components; anything else is a hard error.
class OpenAiEmbedder final : public Embedder {
public:
  OpenAiEmbedder(EndpointConfig endpoint, std::size_t dim, std::size_t max_batch = 64)
      : endpoint_(std::move(endpoint)), dim_(dim), max_batch_(max_batch) {}

  std::string model_tag() const override { return endpoint_.model; }
  std::size_t dim() const override { return dim_; }
  std::size_t max_batch() const override { return max_batch_; }
  std::vector<Vector> embed(std::span<const std::string> texts) override;

private:
  EndpointConfig endpoint_;
  std::size_t dim_;
  std::size_t max_batch_;
};

}  // namespace noderag::llmio
