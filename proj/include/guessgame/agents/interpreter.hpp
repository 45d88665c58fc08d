#pragma once

#include <cmath>
#include <cstdlib>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "guessgame/agents/backend.hpp"
#include "guessgame/agents/prompts.hpp"
#include "guessgame/core/errors.hpp"
#include "guessgame/core/text.hpp"
#include "guessgame/core/types.hpp"

namespace gg {

inline constexpr std::size_t kMaxInterpreterPairs = 5;

struct Interpretation {
  std::vector<ConceptScore> scores;
  int dropped = 0;    // tokens without a parseable concept:score pair
  int truncated = 0;  // parseable pairs beyond the cap
};

namespace detail {

inline std::string_view strip_wrapping(std::string_view s) {
  constexpr std::string_view kWrap = " \t\r\n{}[]()\"'`";
  while (!s.empty() && kWrap.find(s.front()) != std::string_view::npos) s.remove_prefix(1);
  while (!s.empty() && kWrap.find(s.back()) != std::string_view::npos) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses "concept:score, concept:score, ..." into at most five relabeled
/// concepts. Scores at or beyond +-1 are nudged to +-0.999; negative scores
/// become "not <concept>" with the absolute score. Throws EmptyInterpretation
/// when nothing parses.
inline Interpretation parse_interpretation(std::string_view raw) {
  Interpretation out;
  std::set<std::string> seen;
  for (const auto& token : text::split(raw, ',')) {
    auto t = detail::strip_wrapping(token);
    if (t.empty()) continue;
    auto colon = t.rfind(':');
    if (colon == std::string_view::npos) {
      ++out.dropped;
      continue;
    }
    auto concept_text = text::normalize(detail::strip_wrapping(t.substr(0, colon)));
    std::string number(text::trim(detail::strip_wrapping(t.substr(colon + 1))));
    char* end = nullptr;
    double r = std::strtod(number.c_str(), &end);
    if (concept_text.empty() || number.empty() || end != number.c_str() + number.size() || !std::isfinite(r) ||
        r == 0.0) {
      ++out.dropped;
      continue;
    }
    if (r >= 1.0) r = 0.999;
    if (r <= -1.0) r = -0.999;
    ConceptScore cs = r < 0 ? ConceptScore{"not " + concept_text, -r} : ConceptScore{concept_text, r};
    if (!seen.insert(cs.concept_name).second) {
      ++out.dropped;
      continue;
    }
    if (out.scores.size() >= kMaxInterpreterPairs) {
      ++out.truncated;
      continue;
    }
    out.scores.push_back(std::move(cs));
  }
  if (out.scores.empty()) throw EmptyInterpretation("no parseable concept:score pairs in interpreter output");
  return out;
}

inline std::string interpreter_user_message(std::string_view question, std::string_view answer) {
  return "Guesser said: " + std::string(text::strip_marker(question, "Guesser said:")) + "\nOracle said: " +
         std::string(text::strip_marker(answer, "Oracle said:"));
}

/// Queries the Interpreter for one question/answer pair and parses its reply.
inline Interpretation interpret(std::string_view question, std::string_view answer, ChatBackend& backend,
                                const AgentConfig& agent, const Sleeper& sleep = real_sleeper()) {
  if (text::trim(question).empty() || text::trim(answer).empty())
    throw InvariantError("interpret needs a non-empty question and answer");
  auto reply = chat(backend, agent, render_prompt(AgentRole::Interpreter),
                    {{"user", interpreter_user_message(question, answer)}}, sleep);
  return parse_interpretation(reply);
}

}  // namespace gg
