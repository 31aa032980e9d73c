#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "noderag/llmio/http.hpp"

#include <algorithm>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "noderag/common/error.hpp"

namespace noderag::llmio {
namespace {

using Clock = std::chrono::steady_clock;

class RequestGate {
public:
  static RequestGate& instance() {
    static RequestGate gate;
    return gate;
  }

  void set_ceiling(std::size_t n) {
    std::lock_guard lock(mu_);
    ceiling_ = std::max<std::size_t>(n, 1);
    cv_.notify_all();
  }
  std::size_t ceiling() const {
    std::lock_guard lock(mu_);
    return ceiling_;
  }
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < ceiling_; });
    ++in_flight_;
  }
  void release() {
    std::lock_guard lock(mu_);
    --in_flight_;
    cv_.notify_one();
  }

private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t ceiling_ = 16;
  std::size_t in_flight_ = 0;
};

struct GateSlot {
  GateSlot() { RequestGate::instance().acquire(); }
  ~GateSlot() { RequestGate::instance().release(); }
  GateSlot(const GateSlot&) = delete;
  GateSlot& operator=(const GateSlot&) = delete;
};

/// Requests-per-minute token bucket, one per base URL.
class TokenBucket {
public:
  explicit TokenBucket(double per_minute)
      : rate_per_sec_(per_minute / 60.0), capacity_(std::max(1.0, per_minute / 60.0)),
        tokens_(capacity_), last_(Clock::now()) {}

  void take() {
    std::unique_lock lock(mu_);
    for (;;) {
      const auto now = Clock::now();
      tokens_ = std::min(capacity_,
                         tokens_ + std::chrono::duration<double>(now - last_).count() * rate_per_sec_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_sec_);
      lock.unlock();
      std::this_thread::sleep_for(wait);
      lock.lock();
    }
  }

private:
  std::mutex mu_;
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

TokenBucket* bucket_for(const EndpointConfig& ep) {
  if (ep.requests_per_minute <= 0.0) return nullptr;
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<TokenBucket>> buckets;
  std::lock_guard lock(mu);
  auto& b = buckets[ep.base_url];
  if (!b) b = std::make_unique<TokenBucket>(ep.requests_per_minute);
  return b.get();
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& base) {
  const auto scheme = base.find("://");
  const auto path_start = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  SplitUrl out;
  out.origin = base.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = base.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

bool looks_like_context_overflow(const std::string& body) {
  return body.find("context_length") != std::string::npos ||
         body.find("maximum context") != std::string::npos ||
         body.find("too many tokens") != std::string::npos;
}

}  // namespace

void set_global_request_ceiling(std::size_t ceiling) { RequestGate::instance().set_ceiling(ceiling); }
std::size_t global_request_ceiling() { return RequestGate::instance().ceiling(); }

nlohmann::json post_json(const EndpointConfig& endpoint, const std::string& path,
                         const nlohmann::json& body) {
  const auto url = split_url(endpoint.base_url);
  const auto payload = body.dump();
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  }

  auto backoff = endpoint.retry.initial_backoff;
  std::string last_error;
  const int attempts = std::max(1, endpoint.retry.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(endpoint.retry.max_backoff,
                         std::chrono::milliseconds(static_cast<std::int64_t>(
                             static_cast<double>(backoff.count()) * endpoint.retry.multiplier)));
    }
    if (auto* bucket = bucket_for(endpoint)) bucket->take();

    httplib::Result res{nullptr, httplib::Error::Unknown};
    {
      GateSlot slot;
      httplib::Client cli(url.origin);
      cli.set_connection_timeout(std::chrono::seconds(10));
      cli.set_read_timeout(endpoint.timeout);
      cli.set_write_timeout(endpoint.timeout);
      res = cli.Post(url.prefix + path, headers, payload, "application/json");
    }

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      spdlog::warn("{} (attempt {}/{})", last_error, attempt, attempts);
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("provider returned invalid JSON: ") + e.what(), status);
      }
    }
    if (status == 401 || status == 403) {
      throw AuthError("provider rejected credentials (HTTP " + std::to_string(status) + ")");
    }
    if ((status == 400 || status == 413) && looks_like_context_overflow(res->body)) {
      throw ContextLengthError("provider rejected prompt length: " + res->body);
    }
    if (status == 408 || status == 429 || status >= 500) {
      last_error = "HTTP " + std::to_string(status);
      spdlog::warn("provider returned {} (attempt {}/{})", status, attempt, attempts);
      continue;
    }
    throw Error("provider request failed with HTTP " + std::to_string(status) + ": " + res->body);
  }
  throw RetriesExhaustedError("gave up after " + std::to_string(attempts) +
                              " attempts; last failure: " + last_error);
}

ChatResponse OpenAiChatClient::complete(const ChatRequest& request) {
  nlohmann::json body = {
      {"model", endpoint_.model},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", request.system_prompt}},
                              {{"role", "user"}, {"content", request.user_prompt}}})},
  };
  const auto reply = post_json(endpoint_, "/chat/completions", body);
  ChatResponse out;
  try {
    out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    if (reply.contains("usage")) {
      out.usage.prompt_tokens = reply["usage"].value("prompt_tokens", std::int64_t{0});
      out.usage.completion_tokens = reply["usage"].value("completion_tokens", std::int64_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected chat response shape: ") + e.what());
  }
  return out;
}

std::vector<Vector> OpenAiEmbedder::embed(std::span<const std::string> texts) {
  if (texts.size() > max_batch_) throw Error("embedding batch exceeds configured maximum");
  for (const auto& t : texts) {
    if (t.empty()) throw Error("cannot embed empty text");
  }
  nlohmann::json body = {{"model", endpoint_.model},
                         {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto reply = post_json(endpoint_, "/embeddings", body);
  std::vector<Vector> out(texts.size());
  try {
    const auto& data = reply.at("data");
    if (data.size() != texts.size()) throw Error("embedding count does not match input count");
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto idx = data[i].value("index", i);
      if (idx >= out.size()) throw Error("embedding index out of range");
      out[idx] = data[i].at("embedding").get<Vector>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unexpected embedding response shape: ") + e.what());
  }
  for (auto& v : out) {
    if (v.size() != dim_) {
      throw Error("embedding dimension drift: model " + endpoint_.model + " returned " +
                  std::to_string(v.size()) + ", store expects " + std::to_string(dim_));
    }
    normalize(v);
  }
  return out;
}

}  // namespace noderag::llmio
