#pragma once

// Minimal chat-completion client abstraction. The HTTP implementation talks
// an OpenAI-style wire format; tests plug in stubs.

#include <functional>
#include <memory>
#include <string>

namespace navmem {

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the assistant message text. Throws TransportError on
  // network-level failure, ParseError on an unintelligible response body.
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct HttpChatConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  // Bearer token read from the NAVMEM_API_KEY environment variable when set.
  int max_in_flight = 8;
  int transport_attempts = 3;
  int backoff_initial_ms = 100;  // doubles per retry
  int timeout_seconds = 120;
};

// Thread-safe; callers block when max_in_flight requests are outstanding,
// and transport errors are retried with exponential backoff.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatConfig config);
  ~HttpChatClient() override;
  std::string complete(const ChatRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Test double driven by a callback.
class StubChatClient : public ChatClient {
 public:
  using Handler = std::function<std::string(const ChatRequest&)>;
  explicit StubChatClient(Handler handler) : handler_(std::move(handler)) {}
  std::string complete(const ChatRequest& request) override {
    ++calls_;
    return handler_(request);
  }
  int calls() const { return calls_; }

 private:
  Handler handler_;
  int calls_ = 0;
};

}  // namespace navmem
