#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "guessgame/agents/prompts.hpp"
#include "guessgame/core/errors.hpp"

namespace gg {

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct AgentConfig {
  AgentRole role = AgentRole::Guesser;
  std::string endpoint = "scripted";
  std::string model_name;
  double temperature = 0.6;
  double top_p = 1.0;
  double timeout_seconds = 60;
  int max_retries = 3;

  static AgentConfig defaults_for(AgentRole role) {
    AgentConfig c;
    c.role = role;
    if (role == AgentRole::Interpreter) {
      c.temperature = 0.3;
      c.top_p = 0.8;
    }
    return c;
  }

  void validate() const {
    if (temperature < 0) throw InvariantError("agent temperature must be >= 0");
    if (!(timeout_seconds > 0)) throw InvariantError("agent timeout must be > 0");
    if (max_retries < 0) throw InvariantError("max_retries must be >= 0");
  }
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;  // system message first
  double temperature = 0.6;
  double top_p = 1.0;
  double timeout_seconds = 60;
};

/// One completion per call. Transient failures throw TransportError with
/// transient() set; the retry policy lives in chat().
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// Pops canned replies in order. Records every request it sees.
class ScriptedBackend final : public ChatBackend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<std::string> replies) : queue_(replies.begin(), replies.end()) {}

  void push(std::string reply) {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(reply));
  }

  std::string complete(const ChatRequest& request) override {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    if (queue_.empty()) throw QueueExhausted();
    auto r = std::move(queue_.front());
    queue_.pop_front();
    return r;
  }

  std::size_t remaining() const {
    std::lock_guard lock(mu_);
    return queue_.size();
  }
  std::vector<ChatRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  mutable std::mutex mu_;
  std::deque<std::string> queue_;
  std::vector<ChatRequest> requests_;
};

/// Replies computed by a function of the request; used by simulated agents.
class FunctionBackend final : public ChatBackend {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const ChatRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

/// Sends system + dialogue to the backend, retrying transient transport
/// failures up to agent.max_retries times with exponential backoff.
inline std::string chat(ChatBackend& backend, const AgentConfig& agent, const std::string& system,
                        const std::vector<ChatMessage>& messages, const Sleeper& sleep = real_sleeper(),
                        std::chrono::milliseconds base_delay = std::chrono::milliseconds(250)) {
  ChatRequest req;
  req.model = agent.model_name;
  req.temperature = agent.temperature;
  req.top_p = agent.top_p;
  req.timeout_seconds = agent.timeout_seconds;
  req.messages.reserve(messages.size() + 1);
  req.messages.push_back({"system", system});
  req.messages.insert(req.messages.end(), messages.begin(), messages.end());
  for (int attempt = 0;; ++attempt) {
    try {
      return backend.complete(req);
    } catch (const TransportError& e) {
      if (!e.transient() || attempt >= agent.max_retries) throw;
      sleep(base_delay * (1 << attempt));
    }
  }
}

}  // namespace gg
