#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "guessgame/agents/agents.hpp"
#include "guessgame/core/text.hpp"
#include "guessgame/core/types.hpp"
#include "guessgame/engine/scorers.hpp"
#include "guessgame/taxonomy/classifier.hpp"

namespace gg {

inline constexpr int kMaxRevisions = 3;

enum class ViolationReason { DisallowedType, RepeatLimitExceeded, ClosedUnderForcedOpen, TrivializingQuestion };

inline constexpr std::string_view to_string(ViolationReason r) {
  switch (r) {
    case ViolationReason::DisallowedType: return "DisallowedType";
    case ViolationReason::RepeatLimitExceeded: return "RepeatLimitExceeded";
    case ViolationReason::ClosedUnderForcedOpen: return "ClosedUnderForcedOpen";
    case ViolationReason::TrivializingQuestion: return "TrivializingQuestion";
  }
  return "?";
}

/// Valid, or a violation that always carries its reason.
class Verdict {
 public:
  static Verdict valid() { return Verdict{}; }
  static Verdict violation(ViolationReason r) { return Verdict{r}; }
  bool is_valid() const noexcept { return !reason_; }
  ViolationReason reason() const { return reason_.value(); }
  friend bool operator==(const Verdict&, const Verdict&) = default;

 private:
  Verdict() = default;
  explicit Verdict(ViolationReason r) : reason_(r) {}
  std::optional<ViolationReason> reason_;
};

/// Normalized-phrase blacklist of questions that ask for the answer outright.
class TrivialQuestionFilter {
 public:
  TrivialQuestionFilter()
      : phrases_{"what is the object",        "what is it",
                 "what is it called",         "what is the object called",
                 "what object is it",         "what is the name of the object",
                 "what is the objects name",  "what is the object's name",
                 "what is its name",
                 "what are you thinking of",  "what object are you thinking of",
                 "tell me what the object is", "what is the answer"} {}
  explicit TrivialQuestionFilter(std::set<std::string> phrases) : phrases_(std::move(phrases)) {}

  bool matches(std::string_view question) const {
    return phrases_.contains(text::canonical_words(text::strip_marker(question, "Guesser said:")));
  }
  const std::set<std::string>& phrases() const noexcept { return phrases_; }

 private:
  std::set<std::string> phrases_;
};

enum class GameStatus { InProgress, Success, Failure };

struct TypeRun {
  QuestionType type;
  int length = 0;
};

struct GameState {
  GameConfig config;
  std::string secret;
  std::vector<TurnRecord> history;
  std::optional<TypeRun> consecutive_type_run;
  GameStatus status = GameStatus::InProgress;
  std::optional<std::string> error;

  GameState(GameConfig c, std::string s) : config(std::move(c)), secret(std::move(s)) {}

  int remaining_turns() const { return config.t_max - static_cast<int>(history.size()); }

  /// Run length if a question of type t were accepted next.
  int run_if(QuestionType t) const {
    if (consecutive_type_run && consecutive_type_run->type == t) return consecutive_type_run->length + 1;
    return 1;
  }
};

struct Validation {
  Verdict verdict = Verdict::valid();
  QuestionType type = QuestionType::Attribute;
  QuestionFormat format = QuestionFormat::Open;
};

/// Checks a candidate question against the trivializing filter and the game's
/// constraints (allowed types, repeat limit k, forced-open).
inline Validation validate_question(std::string_view question, const GameState& state,
                                    const QuestionClassifier& classifier,
                                    const TrivialQuestionFilter& trivial = TrivialQuestionFilter()) {
  if (state.status != GameStatus::InProgress) throw InvariantError("game is not in progress");
  Validation v;
  v.type = classifier.classify(question);
  v.format = v.type == QuestionType::Direct ? QuestionFormat::Closed : classify_format(question);
  const auto& cfg = state.config;
  if (trivial.matches(question)) {
    v.verdict = Verdict::violation(ViolationReason::TrivializingQuestion);
  } else if (!cfg.type_allowed(v.type)) {
    v.verdict = Verdict::violation(ViolationReason::DisallowedType);
  } else if (cfg.repeat_limit_k && state.run_if(v.type) > *cfg.repeat_limit_k) {
    v.verdict = Verdict::violation(ViolationReason::RepeatLimitExceeded);
  } else if (cfg.forced_open && v.type != QuestionType::Direct && v.format != QuestionFormat::Open) {
    v.verdict = Verdict::violation(ViolationReason::ClosedUnderForcedOpen);
  }
  return v;
}

struct GameAgents {
  const GuesserAgent& guesser;
  const OracleAgent& oracle;
  const QuestionClassifier& classifier;
};

struct StepResult {
  TurnRecord turn;
  IGRecord ig;
};

/// Appends an accepted turn and advances the type run and status.
inline void accept_turn(GameState& state, const TurnRecord& turn) {
  state.history.push_back(turn);
  state.consecutive_type_run = TypeRun{turn.q_type, state.run_if(turn.q_type)};
  if (turn.verdict == TurnVerdict::Correct) {
    state.status = GameStatus::Success;
  } else if (static_cast<int>(state.history.size()) >= state.config.t_max) {
    state.status = GameStatus::Failure;
  }
}

/// One turn: ask, validate with up to kMaxRevisions re-prompts, answer, score.
/// Transport errors end the game as Failure with the error recorded in state.
inline std::optional<StepResult> step(GameState& state, const GameAgents& agents, TurnScorer* hooks,
                                      const TrivialQuestionFilter& trivial = TrivialQuestionFilter()) {
  if (state.status != GameStatus::InProgress) throw InvariantError("step on a finished game");
  try {
    std::vector<Rejection> rejections;
    std::string question;
    Validation v;
    while (true) {
      question = agents.guesser.ask(state.history, rejections, state.config.forced_open);
      v = validate_question(question, state, agents.classifier, trivial);
      if (v.verdict.is_valid() || static_cast<int>(rejections.size()) >= kMaxRevisions) break;
      rejections.push_back({question, std::string(to_string(v.verdict.reason()))});
    }
    TurnRecord turn;
    turn.index = static_cast<int>(state.history.size()) + 1;
    turn.question = question;
    turn.q_type = v.type;
    turn.q_format = v.format;
    turn.revision_count = static_cast<int>(rejections.size());
    if (!v.verdict.is_valid()) turn.constraint_violation = std::string(to_string(v.verdict.reason()));
    auto reply = agents.oracle.respond(state.secret, state.history, question);
    turn.answer = std::string(text::strip_marker(reply, kOracleMarker));
    turn.is_direct_guess = v.type == QuestionType::Direct;
    turn.verdict = turn.is_direct_guess ? judge_oracle_reply(reply) : TurnVerdict::Continue;
    accept_turn(state, turn);
    IGRecord ig;
    if (hooks) ig = hooks->score(turn);
    return StepResult{std::move(turn), std::move(ig)};
  } catch (const TransportError& e) {
    state.status = GameStatus::Failure;
    state.error = std::string("agent transport error: ") + e.what();
    return std::nullopt;
  }
}

struct GameResult {
  Transcript transcript;
  std::vector<IGRecord> ig_trace;
};

inline Transcript to_transcript(const GameState& state, std::string game_id) {
  Transcript t;
  t.game_id = std::move(game_id);
  t.secret_object = state.secret;
  t.config = state.config;
  t.turns = state.history;
  t.turn_count = static_cast<int>(state.history.size());
  t.outcome = state.status == GameStatus::Success ? Outcome::Success : Outcome::Failure;
  t.error = state.error;
  return t;
}

/// Plays until a correct direct guess or t_max turns.
inline GameResult run_game(const GameConfig& config, const std::string& secret, const GameAgents& agents,
                           TurnScorer* hooks, const std::string& game_id,
                           const TrivialQuestionFilter& trivial = TrivialQuestionFilter()) {
  config.validate();
  GameState state(config, secret);
  GameResult result;
  while (state.status == GameStatus::InProgress) {
    auto r = step(state, agents, hooks, trivial);
    if (!r) break;
    r->ig.game_id = game_id;
    result.ig_trace.push_back(std::move(r->ig));
  }
  result.transcript = to_transcript(state, game_id);
  return result;
}

/// Re-scores a recorded transcript with fresh hooks; no Guesser/Oracle calls.
inline std::vector<IGRecord> score_transcript(const Transcript& transcript, const ScoringContext& ctx) {
  GameScorer scorer(ctx, transcript.config, transcript.game_id);
  std::vector<IGRecord> out;
  out.reserve(transcript.turns.size());
  for (const auto& t : transcript.turns) out.push_back(scorer.score(t));
  return out;
}

}  // namespace gg
