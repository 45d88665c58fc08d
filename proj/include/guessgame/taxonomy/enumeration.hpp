#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <string_view>

#include "guessgame/core/text.hpp"
#include "guessgame/core/types.hpp"
#include "guessgame/taxonomy/classifier.hpp"

namespace gg {

/// Overlap coefficient |A∩B| / min(|A|,|B|) over lowercase word tokens.
inline double question_similarity(std::string_view a, std::string_view b) {
  auto wa = taxonomy::question_words(a);
  auto wb = taxonomy::question_words(b);
  std::set<std::string> sa(wa.begin(), wa.end());
  std::set<std::string> sb(wb.begin(), wb.end());
  if (sa.empty() || sb.empty()) return sa.empty() && sb.empty() ? 1.0 : 0.0;
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  return static_cast<double>(inter) / static_cast<double>(std::min(sa.size(), sb.size()));
}

struct EnumerationStats {
  int count = 0;
  double ratio = 0;
};

/// A turn is an enumeration when it repeats the previous turn's type and its
/// question is lexically similar (>= sim_threshold) to the previous question.
inline EnumerationStats detect_enumeration(const std::vector<TurnRecord>& turns,
                                           double sim_threshold = 0.6) {
  EnumerationStats s;
  if (turns.empty()) return s;
  for (std::size_t i = 1; i < turns.size(); ++i) {
    if (turns[i].q_type != turns[i - 1].q_type) continue;
    if (question_similarity(turns[i].question, turns[i - 1].question) >= sim_threshold) ++s.count;
  }
  s.ratio = static_cast<double>(s.count) / static_cast<double>(turns.size());
  return s;
}

inline EnumerationStats detect_enumeration(const Transcript& t, double sim_threshold = 0.6) {
  return detect_enumeration(t.turns, sim_threshold);
}

}  // namespace gg
