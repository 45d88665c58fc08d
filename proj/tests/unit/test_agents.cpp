#include <gtest/gtest.h>

#include "guessgame/agents/agents.hpp"

using namespace gg;

namespace {

Sleeper no_sleep(std::vector<std::chrono::milliseconds>* log = nullptr) {
  return [log](std::chrono::milliseconds d) {
    if (log) log->push_back(d);
  };
}

}  // namespace

TEST(Prompts, OracleNamesTheSecret) {
  PromptParams p;
  p.object = "knife";
  auto s = render_prompt(AgentRole::Oracle, p);
  EXPECT_NE(s.find("knife"), std::string::npos);
  EXPECT_THROW(render_prompt(AgentRole::Oracle), DataError);
}

TEST(Prompts, ForcedOpenSelectsOpenGuesserPrompt) {
  PromptParams open;
  open.forced_open = true;
  EXPECT_EQ(render_prompt(AgentRole::Guesser, open), std::string(prompts::kGuesserOpenQuestion));
  EXPECT_EQ(render_prompt(AgentRole::Guesser), std::string(prompts::kGuesserAnyQuestion));
}

TEST(Interpreter, ParsesAndRelabels) {
  auto r = parse_interpretation("metal:0.9, plastic:-0.4, Sharp : 1.0, junk, x:abc");
  ASSERT_EQ(r.scores.size(), 3u);
  EXPECT_EQ(r.scores[0], (ConceptScore{"metal", 0.9}));
  EXPECT_EQ(r.scores[1], (ConceptScore{"not plastic", 0.4}));
  EXPECT_EQ(r.scores[2], (ConceptScore{"sharp", 0.999}));
  EXPECT_EQ(r.dropped, 2);
}

TEST(Interpreter, CapsAtFivePairs) {
  auto r = parse_interpretation("a:0.9,b:0.8,c:0.7,d:0.6,e:0.5,f:0.4,g:0.3");
  EXPECT_EQ(r.scores.size(), kMaxInterpreterPairs);
  EXPECT_EQ(r.truncated, 2);
}

TEST(Interpreter, DuplicatesKeepFirst) {
  auto r = parse_interpretation("metal:0.9, Metal:0.2");
  ASSERT_EQ(r.scores.size(), 1u);
  EXPECT_EQ(r.scores[0].score, 0.9);
}

TEST(Interpreter, NothingParseableThrows) {
  EXPECT_THROW(parse_interpretation("I cannot help with that."), EmptyInterpretation);
  EXPECT_THROW(parse_interpretation(""), EmptyInterpretation);
}

TEST(Interpreter, RequestCarriesSamplingDefaults) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"metal:0.9"});
  InterpreterAgent agent(AgentConfig::defaults_for(AgentRole::Interpreter), backend);
  auto r = agent.interpret("What is it made of?", "Oracle said: It is made of metal.");
  ASSERT_EQ(r.scores.size(), 1u);
  auto req = backend->requests().at(0);
  EXPECT_EQ(req.temperature, 0.3);
  EXPECT_EQ(req.top_p, 0.8);
  ASSERT_EQ(req.messages.size(), 2u);
  EXPECT_EQ(req.messages[1].content, "Guesser said: What is it made of?\nOracle said: It is made of metal.");
}

TEST(Backend, TransientErrorsRetryWithBackoff) {
  int calls = 0;
  auto backend = std::make_shared<FunctionBackend>([&](const ChatRequest&) -> std::string {
    if (++calls < 3) throw TransportError("busy", 503, true);
    return "ok";
  });
  std::vector<std::chrono::milliseconds> waits;
  AgentConfig cfg;
  EXPECT_EQ(chat(*backend, cfg, "sys", {}, no_sleep(&waits)), "ok");
  EXPECT_EQ(calls, 3);
  ASSERT_EQ(waits.size(), 2u);
  EXPECT_EQ(waits[1], 2 * waits[0]);
}

TEST(Backend, RetriesAreBounded) {
  int calls = 0;
  FunctionBackend backend([&](const ChatRequest&) -> std::string {
    ++calls;
    throw TransportError("busy", 503, true);
  });
  AgentConfig cfg;
  cfg.max_retries = 2;
  EXPECT_THROW(chat(backend, cfg, "sys", {}, no_sleep()), TransportError);
  EXPECT_EQ(calls, 3);
}

TEST(Backend, PermanentErrorsAreNotRetried) {
  int calls = 0;
  FunctionBackend backend([&](const ChatRequest&) -> std::string {
    ++calls;
    throw TransportError("bad request", 400, false);
  });
  EXPECT_THROW(chat(backend, AgentConfig{}, "sys", {}, no_sleep()), TransportError);
  EXPECT_EQ(calls, 1);
}

TEST(Guesser, StripsMarkerAndReplaysDialogue) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"Guesser said: Is it red?"});
  GuesserAgent g(AgentConfig::defaults_for(AgentRole::Guesser), backend, no_sleep());
  TurnRecord t;
  t.index = 1;
  t.question = "Is it big?";
  t.answer = "No.";
  std::vector<Rejection> rej{{"What is it?", "TrivializingQuestion"}};
  EXPECT_EQ(g.ask({t}, rej, false), "Is it red?");
  auto msgs = backend->requests().at(0).messages;
  ASSERT_EQ(msgs.size(), 6u);
  EXPECT_EQ(msgs[1].content, std::string(kOpeningMessage));
  EXPECT_EQ(msgs[2].content, "Guesser said: Is it big?");
  EXPECT_EQ(msgs[3].content, "Oracle said: No.");
  EXPECT_NE(msgs[5].content.find("TrivializingQuestion"), std::string::npos);
}

TEST(Judge, CorrectPrefix) {
  EXPECT_EQ(judge_oracle_reply("Oracle said: Correct!"), TurnVerdict::Correct);
  EXPECT_EQ(judge_oracle_reply("**correct**"), TurnVerdict::Correct);
  EXPECT_EQ(judge_oracle_reply("Oracle said: Incorrect."), TurnVerdict::Continue);
  EXPECT_EQ(judge_oracle_reply("No, not quite."), TurnVerdict::Continue);
}

TEST(Checker, ParsesTypeAndFallsBack) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"Location", "I am not sure."});
  auto agent = std::make_shared<Agent>(AgentConfig::defaults_for(AgentRole::Checker), backend, no_sleep());
  LlmCheckerClassifier c(agent);
  EXPECT_EQ(c.classify("Is it in a kitchen?"), QuestionType::Location);
  EXPECT_EQ(c.classify("Is it a knife?"), QuestionType::Direct);
  EXPECT_EQ(c.fallbacks(), 1);
}
