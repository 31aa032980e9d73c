#pragma once

// Loopback HTTP stub for provider tests.
#include <httplib.h>

#include <atomic>
#include <string>
#include <thread>

namespace stub {

class Server {
public:
  Server() { port_ = svr_.bind_to_any_port("127.0.0.1"); }
  ~Server() { stop(); }

  httplib::Server& routes() { return svr_; }

  void start() {
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }
  void stop() {
    if (thread_.joinable()) {
      svr_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
  httplib::Server svr_;
  std::thread thread_;
  int port_ = 0;
};

inline std::string chat_reply(const std::string& content) {
  return R"({"choices":[{"message":{"role":"assistant","content":)" +
         nlohmann::json(content).dump() + R"(}}],"usage":{"prompt_tokens":3,"completion_tokens":1}})";
}

}  // namespace stub
