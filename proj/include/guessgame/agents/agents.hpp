#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "guessgame/agents/backend.hpp"
#include "guessgame/agents/interpreter.hpp"
#include "guessgame/agents/prompts.hpp"
#include "guessgame/core/text.hpp"
#include "guessgame/core/types.hpp"
#include "guessgame/taxonomy/classifier.hpp"

namespace gg {

inline constexpr std::string_view kGuesserMarker = "Guesser said:";
inline constexpr std::string_view kOracleMarker = "Oracle said:";
inline constexpr std::string_view kOpeningMessage = "Oracle said: I am thinking of an object. Ask your first question.";

/// A question the Checker turned down during the current turn.
struct Rejection {
  std::string question;
  std::string reason;
};

/// Adapter binding a role's AgentConfig to a chat backend.
class Agent {
 public:
  Agent(AgentConfig config, std::shared_ptr<ChatBackend> backend, Sleeper sleep = real_sleeper())
      : config_(std::move(config)), backend_(std::move(backend)), sleep_(std::move(sleep)) {
    config_.validate();
  }
  const AgentConfig& config() const noexcept { return config_; }
  ChatBackend& backend() const noexcept { return *backend_; }

 protected:
  std::string send(const std::string& system, const std::vector<ChatMessage>& messages) const {
    return chat(*backend_, config_, system, messages, sleep_);
  }

 private:
  AgentConfig config_;
  std::shared_ptr<ChatBackend> backend_;
  Sleeper sleep_;
};

class GuesserAgent : public Agent {
 public:
  using Agent::Agent;

  static std::vector<ChatMessage> dialogue(const std::vector<TurnRecord>& history,
                                           std::span<const Rejection> rejections) {
    std::vector<ChatMessage> msgs;
    msgs.push_back({"user", std::string(kOpeningMessage)});
    for (const auto& t : history) {
      msgs.push_back({"assistant", std::string(kGuesserMarker) + " " + t.question});
      msgs.push_back({"user", std::string(kOracleMarker) + " " + t.answer});
    }
    for (const auto& r : rejections) {
      msgs.push_back({"assistant", std::string(kGuesserMarker) + " " + r.question});
      msgs.push_back({"user", "Checker said: That question is not allowed (" + r.reason +
                                  "). Ask a different question."});
    }
    return msgs;
  }

  /// Next question text with the speaker marker removed.
  std::string ask(const std::vector<TurnRecord>& history, std::span<const Rejection> rejections,
                  bool forced_open) const {
    PromptParams p;
    p.forced_open = forced_open;
    auto reply = send(render_prompt(AgentRole::Guesser, p), dialogue(history, rejections));
    return std::string(text::strip_marker(reply, kGuesserMarker));
  }
};

class OracleAgent : public Agent {
 public:
  using Agent::Agent;

  static std::vector<ChatMessage> dialogue(const std::vector<TurnRecord>& history, const std::string& question) {
    std::vector<ChatMessage> msgs;
    for (const auto& t : history) {
      msgs.push_back({"user", std::string(kGuesserMarker) + " " + t.question});
      msgs.push_back({"assistant", std::string(kOracleMarker) + " " + t.answer});
    }
    msgs.push_back({"user", std::string(kGuesserMarker) + " " + question});
    return msgs;
  }

  /// Raw Oracle reply, marker included.
  std::string respond(const std::string& secret, const std::vector<TurnRecord>& history,
                      const std::string& question) const {
    PromptParams p;
    p.object = secret;
    return send(render_prompt(AgentRole::Oracle, p), dialogue(history, question));
  }
};

class InterpreterAgent : public Agent {
 public:
  using Agent::Agent;
  Interpretation interpret(std::string_view question, std::string_view answer) const {
    return gg::interpret(question, answer, backend(), config());
  }
};

/// The LLM Checker as a question classifier. A reply that names no type falls
/// back to the rule cascade; transport errors propagate.
class LlmCheckerClassifier final : public QuestionClassifier {
 public:
  explicit LlmCheckerClassifier(std::shared_ptr<const Agent> agent) : agent_(std::move(agent)) {}

  QuestionType classify(std::string_view question) const override {
    std::vector<ChatMessage> msgs{
        {"user", std::string(kGuesserMarker) + " " + std::string(text::strip_marker(question, kGuesserMarker))}};
    auto reply = chat(agent_->backend(), agent_->config(), render_prompt(AgentRole::Checker), msgs);
    for (const auto& w : text::words(reply)) {
      if (auto t = parse_question_type(w)) return *t;
    }
    ++fallbacks_;
    return classify_type(question);
  }
  int fallbacks() const noexcept { return fallbacks_; }

 private:
  std::shared_ptr<const Agent> agent_;
  mutable std::atomic<int> fallbacks_{0};
};

/// Correct iff, after dropping an "Oracle said:" marker and surrounding
/// punctuation, the reply begins with "correct" (case-insensitive).
inline TurnVerdict judge_oracle_reply(std::string_view reply) {
  auto s = text::strip_marker(reply, kOracleMarker);
  constexpr std::string_view kPunct = " \t\r\n.,!?;:\"'`*()[]{}-";
  while (!s.empty() && kPunct.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
  return text::starts_with_ci(s, "correct") ? TurnVerdict::Correct : TurnVerdict::Continue;
}

}  // namespace gg
