#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guessgame/core/errors.hpp"

namespace gg {

enum class QuestionType : std::uint8_t { Attribute, Function, Location, Category, Direct };
enum class QuestionFormat : std::uint8_t { Open, Closed };
enum class TurnVerdict : std::uint8_t { Continue, Correct };
enum class Outcome : std::uint8_t { Success, Failure };

inline constexpr std::array<QuestionType, 5> kAllQuestionTypes = {
    QuestionType::Attribute, QuestionType::Function, QuestionType::Location,
    QuestionType::Category, QuestionType::Direct};

inline constexpr std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::Attribute: return "Attribute";
    case QuestionType::Function: return "Function";
    case QuestionType::Location: return "Location";
    case QuestionType::Category: return "Category";
    case QuestionType::Direct: return "Direct";
  }
  return "?";
}

inline constexpr std::string_view to_string(QuestionFormat f) {
  return f == QuestionFormat::Open ? "Open" : "Closed";
}
inline constexpr std::string_view to_string(TurnVerdict v) {
  return v == TurnVerdict::Correct ? "Correct" : "Continue";
}
inline constexpr std::string_view to_string(Outcome o) {
  return o == Outcome::Success ? "Success" : "Failure";
}

inline std::optional<QuestionType> parse_question_type(std::string_view s) {
  for (auto t : kAllQuestionTypes) {
    std::string_view name = to_string(t);
    if (s.size() != name.size()) continue;
    bool eq = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if ((s[i] | 0x20) != (name[i] | 0x20)) {
        eq = false;
        break;
      }
    }
    if (eq) return t;
  }
  return std::nullopt;
}

/// Small bitset over the five question types.
class QuestionTypeSet {
 public:
  constexpr QuestionTypeSet() = default;
  static constexpr QuestionTypeSet all() {
    QuestionTypeSet s;
    for (auto t : kAllQuestionTypes) s.insert(t);
    return s;
  }
  constexpr void insert(QuestionType t) { bits_ |= bit(t); }
  constexpr bool contains(QuestionType t) const { return (bits_ & bit(t)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  std::vector<QuestionType> members() const {
    std::vector<QuestionType> out;
    for (auto t : kAllQuestionTypes)
      if (contains(t)) out.push_back(t);
    return out;
  }
  friend constexpr bool operator==(QuestionTypeSet, QuestionTypeSet) = default;

 private:
  static constexpr std::uint8_t bit(QuestionType t) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(t));
  }
  std::uint8_t bits_ = 0;
};

struct GameConfig {
  int t_max = 50;
  QuestionTypeSet allowed_types = QuestionTypeSet::all();
  std::optional<int> repeat_limit_k;
  bool forced_open = false;
  double temperature = 0.6;
  double interpreter_alpha = 1.0;
  double prune_fraction = 0.35;
  double epsilon = 1e-12;
  double tau = 0.60;
  std::uint64_t seed = 0;
  // Replaces the empty first-turn prior with a uniform prior over the first
  // evidence support when computing KL.
  bool seed_uniform_first_turn = false;

  friend bool operator==(const GameConfig&, const GameConfig&) = default;

  /// Throws InvariantError describing the first violated constraint.
  void validate() const {
    if (t_max < 1) throw InvariantError("t_max must be >= 1");
    if (!(temperature > 0)) throw InvariantError("temperature must be > 0");
    if (allowed_types.empty()) throw InvariantError("allowed_types must be non-empty");
    if (!(epsilon > 0)) throw InvariantError("epsilon must be > 0");
    if (!(interpreter_alpha > 0)) throw InvariantError("interpreter_alpha must be > 0");
    if (!(prune_fraction >= 0 && prune_fraction < 1))
      throw InvariantError("prune_fraction must lie in [0,1)");
    if (!(tau >= 0 && tau <= 1)) throw InvariantError("tau must lie in [0,1]");
    if (repeat_limit_k && *repeat_limit_k < 1)
      throw InvariantError("repeat_limit_k must be a positive integer");
  }

  /// Direct guesses are always allowed regardless of the configured subset.
  bool type_allowed(QuestionType t) const {
    return t == QuestionType::Direct || allowed_types.contains(t);
  }
};

struct TurnRecord {
  int index = 0;
  std::string question;
  QuestionType q_type = QuestionType::Attribute;
  QuestionFormat q_format = QuestionFormat::Open;
  int revision_count = 0;
  std::optional<std::string> constraint_violation;
  std::string answer;
  bool is_direct_guess = false;
  TurnVerdict verdict = TurnVerdict::Continue;

  friend bool operator==(const TurnRecord&, const TurnRecord&) = default;
};

struct Transcript {
  std::string game_id;
  std::string secret_object;
  GameConfig config;
  std::vector<TurnRecord> turns;
  Outcome outcome = Outcome::Failure;
  int turn_count = 0;
  // Set when the game was aborted by an agent or engine error.
  std::optional<std::string> error;

  friend bool operator==(const Transcript&, const Transcript&) = default;

  void validate() const {
    config.validate();
    if (turn_count != static_cast<int>(turns.size()))
      throw InvariantError("turn_count does not match number of turns");
    if (turn_count > config.t_max) throw InvariantError("turn_count exceeds t_max");
    for (std::size_t i = 0; i < turns.size(); ++i) {
      const auto& t = turns[i];
      if (t.index != static_cast<int>(i) + 1)
        throw InvariantError("turn indices must be 1..T in order");
      if (t.verdict == TurnVerdict::Correct && !t.is_direct_guess)
        throw InvariantError("verdict Correct on a non-direct question");
      if (t.verdict == TurnVerdict::Correct && i + 1 != turns.size())
        throw InvariantError("verdict Correct before the final turn");
      if (t.is_direct_guess != (t.q_type == QuestionType::Direct))
        throw InvariantError("is_direct_guess inconsistent with q_type");
      if (t.revision_count < 0) throw InvariantError("negative revision_count");
    }
    bool last_correct = !turns.empty() && turns.back().verdict == TurnVerdict::Correct;
    if ((outcome == Outcome::Success) != last_correct)
      throw InvariantError("outcome Success iff final verdict Correct");
    if (outcome == Outcome::Failure && !error && turn_count != config.t_max)
      throw InvariantError("Failure without error annotation requires turn_count == t_max");
  }
};

/// One Interpreter concept with its post-relabeling strength in (0,1].
struct ConceptScore {
  std::string concept_name;
  double score = 0;
  friend bool operator==(const ConceptScore&, const ConceptScore&) = default;
};

struct IGRecord {
  std::string game_id;
  int turn = 0;
  double bayes_ig = 0;    // nats
  double entropy_ig = 0;  // bits
  std::int64_t candidates_before = 0;
  std::int64_t candidates_after = 0;
  std::int64_t belief_support = 0;
  std::int64_t prior_support = 0;
  bool bayes_skipped = false;
  bool entropy_skipped = false;
  // Interpreter evidence for this turn; kept so belief sweeps need no new calls.
  std::vector<ConceptScore> evidence;

  friend bool operator==(const IGRecord&, const IGRecord&) = default;

  void validate() const {
    if (!(bayes_ig >= 0)) throw InvariantError("bayes_ig must be >= 0");
    if (!(entropy_ig >= 0)) throw InvariantError("entropy_ig must be >= 0");
    if (candidates_after > candidates_before)
      throw InvariantError("candidates_after exceeds candidates_before");
    if (candidates_after < 0 || belief_support < 0)
      throw InvariantError("negative counts");
  }
};

struct ObjectCorpus {
  std::vector<std::string> objects;
  std::string sha256;  // hash of the source file bytes
};

}  // namespace gg
