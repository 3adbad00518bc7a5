#include "navmem/chat_client.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "navmem/errors.hpp"

namespace navmem {

namespace {

using nlohmann::json;

// Splits "http://host:port" into host:port; httplib takes the scheme-host
// part directly.
std::string strip_trailing_slash(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url;
}

}  // namespace

struct HttpChatClient::Impl {
  HttpChatConfig config;
  std::mutex mutex;
  std::condition_variable slot_free;
  int in_flight = 0;

  std::string post_once(const std::string& body) {
    httplib::Client client(strip_trailing_slash(config.base_url));
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv("NAVMEM_API_KEY")) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(config.path, headers, body, "application/json");
    if (!res) {
      throw TransportError("chat endpoint unreachable: " +
                           httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("chat endpoint returned status " +
                           std::to_string(res->status));
    }
    return res->body;
  }
};

HttpChatClient::HttpChatClient(HttpChatConfig config)
    : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
}

HttpChatClient::~HttpChatClient() = default;

std::string HttpChatClient::complete(const ChatRequest& request) {
  const json body = {
      {"model", impl_->config.model},
      {"temperature", request.temperature},
      {"messages",
       json::array({json{{"role", "system"}, {"content", request.system}},
                    json{{"role", "user"}, {"content", request.user}}})},
  };
  const std::string payload = body.dump();

  {
    std::unique_lock lock(impl_->mutex);
    impl_->slot_free.wait(
        lock, [&] { return impl_->in_flight < impl_->config.max_in_flight; });
    ++impl_->in_flight;
  }
  struct SlotGuard {
    Impl* impl;
    ~SlotGuard() {
      std::lock_guard lock(impl->mutex);
      --impl->in_flight;
      impl->slot_free.notify_one();
    }
  } guard{impl_.get()};

  std::string response_body;
  int backoff_ms = impl_->config.backoff_initial_ms;
  for (int attempt = 1;; ++attempt) {
    try {
      response_body = impl_->post_once(payload);
      break;
    } catch (const TransportError&) {
      if (attempt >= impl_->config.transport_attempts) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
  }

  try {
    const json parsed = json::parse(response_body);
    return parsed.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed chat completion response: ") +
                         e.what(),
                     response_body);
  }
}

}  // namespace navmem
