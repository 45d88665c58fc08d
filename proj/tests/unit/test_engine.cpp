#include <gtest/gtest.h>

#include "guessgame/engine/game.hpp"

using namespace gg;

namespace {

Sleeper no_sleep() {
  return [](std::chrono::milliseconds) {};
}

struct Harness {
  std::shared_ptr<ScriptedBackend> guesser_backend = std::make_shared<ScriptedBackend>();
  std::shared_ptr<ScriptedBackend> oracle_backend = std::make_shared<ScriptedBackend>();
  GuesserAgent guesser{AgentConfig::defaults_for(AgentRole::Guesser), guesser_backend, no_sleep()};
  OracleAgent oracle{AgentConfig::defaults_for(AgentRole::Oracle), oracle_backend, no_sleep()};
  RuleBasedClassifier classifier;

  GameAgents agents() const { return {guesser, oracle, classifier}; }
  void q(std::string s) { guesser_backend->push("Guesser said: " + std::move(s)); }
  void a(std::string s) { oracle_backend->push("Oracle said: " + std::move(s)); }
};

GameConfig config(int t_max = 5) {
  GameConfig c;
  c.t_max = t_max;
  return c;
}

TurnRecord accepted(QuestionType type, int index) {
  TurnRecord t;
  t.index = index;
  t.question = "q";
  t.q_type = type;
  t.answer = "a";
  return t;
}

}  // namespace

TEST(Trivial, CanonicalMatching) {
  TrivialQuestionFilter f;
  EXPECT_TRUE(f.matches("What is it?"));
  EXPECT_TRUE(f.matches("Guesser said:  what IS the object??"));
  EXPECT_TRUE(f.matches("What is the object's name?"));
  EXPECT_FALSE(f.matches("What is it made of?"));
}

TEST(Validate, DisallowedType) {
  auto c = config();
  c.allowed_types = QuestionTypeSet{};
  c.allowed_types.insert(QuestionType::Function);
  GameState s(c, "knife");
  RuleBasedClassifier cls;
  auto v = validate_question("Is it made of metal?", s, cls);
  EXPECT_EQ(v.verdict, Verdict::violation(ViolationReason::DisallowedType));
  EXPECT_TRUE(validate_question("Is it a knife?", s, cls).verdict.is_valid());
}

TEST(Validate, RepeatLimitCountsConsecutiveRun) {
  auto c = config();
  c.repeat_limit_k = 2;
  GameState s(c, "knife");
  RuleBasedClassifier cls;
  accept_turn(s, accepted(QuestionType::Attribute, 1));
  EXPECT_TRUE(validate_question("Is it red?", s, cls).verdict.is_valid());
  accept_turn(s, accepted(QuestionType::Attribute, 2));
  EXPECT_EQ(validate_question("Is it red?", s, cls).verdict, Verdict::violation(ViolationReason::RepeatLimitExceeded));
  EXPECT_TRUE(validate_question("Is it used for cutting?", s, cls).verdict.is_valid());
}

TEST(Validate, ForcedOpenRejectsClosedButNotDirect) {
  auto c = config();
  c.forced_open = true;
  GameState s(c, "knife");
  RuleBasedClassifier cls;
  EXPECT_EQ(validate_question("Is it red?", s, cls).verdict, Verdict::violation(ViolationReason::ClosedUnderForcedOpen));
  EXPECT_TRUE(validate_question("What color is it?", s, cls).verdict.is_valid());
  EXPECT_TRUE(validate_question("Is it a knife?", s, cls).verdict.is_valid());
}

TEST(Game, TwoRevisionsThenAccepted) {
  Harness h;
  h.q("What is it?");
  h.q("What is the object?");
  h.q("Is it a knife?");
  h.a("Correct!");
  auto r = run_game(config(), "knife", h.agents(), nullptr, "g");
  ASSERT_EQ(r.transcript.turns.size(), 1u);
  EXPECT_EQ(r.transcript.turns[0].revision_count, 2);
  EXPECT_FALSE(r.transcript.turns[0].constraint_violation);
  EXPECT_EQ(r.transcript.outcome, Outcome::Success);
  EXPECT_NO_THROW(r.transcript.validate());
  auto reqs = h.guesser_backend->requests();
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_NE(reqs[2].messages.back().content.find("TrivializingQuestion"), std::string::npos);
}

TEST(Game, RevisionCapAcceptsWithFlag) {
  Harness h;
  for (int i = 0; i < kMaxRevisions + 1; ++i) h.q("What is it?");
  h.a("I cannot say.");
  auto r = run_game(config(1), "knife", h.agents(), nullptr, "g");
  ASSERT_EQ(r.transcript.turns.size(), 1u);
  EXPECT_EQ(r.transcript.turns[0].revision_count, kMaxRevisions);
  EXPECT_EQ(r.transcript.turns[0].constraint_violation, "TrivializingQuestion");
  EXPECT_EQ(r.transcript.outcome, Outcome::Failure);
}

TEST(Game, RunsToTmaxWithoutCorrectGuess) {
  Harness h;
  for (int i = 0; i < 3; ++i) {
    h.q("Is it a spoon?");
    h.a("No.");
  }
  auto r = run_game(config(3), "knife", h.agents(), nullptr, "g");
  EXPECT_EQ(r.transcript.turn_count, 3);
  EXPECT_EQ(r.transcript.outcome, Outcome::Failure);
  EXPECT_FALSE(r.transcript.error);
  for (const auto& t : r.transcript.turns) EXPECT_TRUE(t.is_direct_guess);
}

TEST(Game, TransportErrorEndsAsAnnotatedFailure) {
  Harness h;
  h.q("Is it red?");
  h.a("Yes.");
  h.q("Is it big?");
  auto r = run_game(config(), "knife", h.agents(), nullptr, "g");
  EXPECT_EQ(r.transcript.turn_count, 1);
  EXPECT_EQ(r.transcript.outcome, Outcome::Failure);
  ASSERT_TRUE(r.transcript.error);
  EXPECT_NE(r.transcript.error->find("transport"), std::string::npos);
  EXPECT_NO_THROW(r.transcript.validate());
}

TEST(Game, NonDirectCorrectDoesNotEndGame) {
  Harness h;
  h.q("Is it sharp?");
  h.a("Correct, it is sharp.");
  h.q("Is it a knife?");
  h.a("Correct");
  auto r = run_game(config(), "knife", h.agents(), nullptr, "g");
  EXPECT_EQ(r.transcript.turn_count, 2);
  EXPECT_EQ(r.transcript.turns[0].verdict, TurnVerdict::Continue);
  EXPECT_EQ(r.transcript.outcome, Outcome::Success);
}

TEST(Game, HooksScoreEachAcceptedTurn) {
  Harness h;
  h.q("What is it made of?");
  h.a("It is made of metal.");
  h.q("Is it a knife?");
  h.a("Correct");
  ScoringContext ctx;
  int calls = 0;
  ctx.evidence = [&](const std::string&, const std::string& answer) {
    ++calls;
    EXPECT_EQ(answer.find("Oracle said:"), std::string::npos);
    return parse_interpretation("metal:0.9");
  };
  GameScorer scorer(ctx, config(), "g");
  auto r = run_game(config(), "knife", h.agents(), &scorer, "g");
  EXPECT_EQ(calls, 2);
  ASSERT_EQ(r.ig_trace.size(), 2u);
  EXPECT_GT(r.ig_trace[0].bayes_ig, 0.0);
  EXPECT_TRUE(r.ig_trace[0].entropy_skipped);
  auto again = score_transcript(r.transcript, ctx);
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[0].bayes_ig, r.ig_trace[0].bayes_ig);
}

TEST(Game, StepOnFinishedGameIsAnError) {
  Harness h;
  GameState s(config(), "knife");
  s.status = GameStatus::Success;
  EXPECT_THROW(step(s, h.agents(), nullptr), InvariantError);
}
