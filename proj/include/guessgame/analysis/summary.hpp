#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "guessgame/analysis/stats.hpp"
#include "guessgame/core/types.hpp"
#include "guessgame/taxonomy/enumeration.hpp"

namespace gg {

struct MeanCI {
  double mean = 0;
  double half_width = 0;  // 95%, normal approximation
};

struct SummaryStats {
  int n_games = 0;
  int successes = 0;
  int errored = 0;  // games aborted by an agent error; counted as failures
  MeanCI sr;
  std::optional<MeanCI> anq;  // absent with zero successes
  int n_turns = 0;
  std::map<QuestionType, double> type_ratios;
  double open_ratio = 0;
  double closed_ratio = 0;
  double enumeration_ratio = 0;
};

/// SR with 1.96*sqrt(p(1-p)/N); ANQ over successes with 1.96*s/sqrt(|S|)
/// using the sample sd (0 for a single success).
inline SummaryStats summarize(const std::vector<Transcript>& transcripts) {
  if (transcripts.empty()) throw InvariantError("summarize needs at least one transcript");
  SummaryStats s;
  s.n_games = static_cast<int>(transcripts.size());
  std::vector<double> lengths;
  std::map<QuestionType, int> type_counts;
  int open = 0;
  int enumerations = 0;
  for (const auto& t : transcripts) {
    if (t.outcome == Outcome::Success) {
      ++s.successes;
      lengths.push_back(static_cast<double>(t.turn_count));
    }
    if (t.error) ++s.errored;
    for (const auto& turn : t.turns) {
      ++type_counts[turn.q_type];
      if (turn.q_format == QuestionFormat::Open) ++open;
    }
    s.n_turns += t.turn_count;
    enumerations += detect_enumeration(t).count;
  }
  double p = static_cast<double>(s.successes) / s.n_games;
  s.sr = {p, stats::kZ95 * std::sqrt(p * (1 - p) / s.n_games)};
  if (!lengths.empty()) {
    double sd = lengths.size() > 1 ? stats::stddev(lengths, 1) : 0.0;
    s.anq = MeanCI{stats::mean(lengths), stats::kZ95 * sd / std::sqrt(static_cast<double>(lengths.size()))};
  }
  for (auto t : kAllQuestionTypes) {
    s.type_ratios[t] = s.n_turns ? static_cast<double>(type_counts[t]) / s.n_turns : 0.0;
  }
  if (s.n_turns) {
    s.open_ratio = static_cast<double>(open) / s.n_turns;
    s.closed_ratio = 1.0 - s.open_ratio;
    s.enumeration_ratio = static_cast<double>(enumerations) / s.n_turns;
  }
  return s;
}

/// One accepted turn joined with its IG scores.
struct TurnIG {
  QuestionType type = QuestionType::Attribute;
  QuestionFormat format = QuestionFormat::Open;
  double bayes = 0;
  double entropy = 0;
};

/// Per-game covariates for the IG-vs-length analyses.
struct GameIG {
  std::string game_id;
  int turns = 0;
  int t_max = 0;
  bool success = false;
  double mean_bayes = 0;
  double mean_entropy = 0;
};

struct JoinedRun {
  std::vector<TurnIG> turns;
  std::vector<GameIG> games;  // games with at least one scored turn and no error
};

/// Matches IG records to transcript turns by (game_id, turn). Errored games
/// are left out of the per-game list.
inline JoinedRun join_run(const std::vector<Transcript>& transcripts, const std::vector<IGRecord>& trace) {
  std::map<std::pair<std::string, int>, const IGRecord*> by_key;
  for (const auto& r : trace) {
    if (!by_key.emplace(std::make_pair(r.game_id, r.turn), &r).second)
      throw DataError("duplicate IG record for " + r.game_id + " turn " + std::to_string(r.turn));
  }
  JoinedRun out;
  for (const auto& t : transcripts) {
    GameIG g{t.game_id, t.turn_count, t.config.t_max, t.outcome == Outcome::Success, 0, 0};
    for (const auto& turn : t.turns) {
      auto it = by_key.find({t.game_id, turn.index});
      if (it == by_key.end())
        throw DataError("no IG record for " + t.game_id + " turn " + std::to_string(turn.index));
      out.turns.push_back({turn.q_type, turn.q_format, it->second->bayes_ig, it->second->entropy_ig});
      g.mean_bayes += it->second->bayes_ig;
      g.mean_entropy += it->second->entropy_ig;
    }
    if (t.error || t.turn_count == 0) continue;
    g.mean_bayes /= t.turn_count;
    g.mean_entropy /= t.turn_count;
    out.games.push_back(std::move(g));
  }
  return out;
}

struct IGByTypeRow {
  std::string label;  // question type or format
  int count = 0;
  double proportion = 0;
  std::optional<double> sigma;  // absent for an empty group
};

/// (mean(group) - mean(all)) / sd(all), population sd; one row per question
/// type followed by Open and Closed.
inline std::vector<IGByTypeRow> ig_by_type(const std::vector<TurnIG>& turns, double TurnIG::*metric) {
  if (turns.size() < 2) throw InvariantError("ig_by_type needs at least two records");
  std::vector<double> all;
  all.reserve(turns.size());
  for (const auto& t : turns) all.push_back(t.*metric);
  double m = stats::mean(all);
  double sd = stats::stddev(all, 0);
  if (!(sd > 0)) throw NumericalError("zero overall IG variance");
  auto row = [&](std::string label, auto pred) {
    IGByTypeRow r{std::move(label), 0, 0, std::nullopt};
    double sum = 0;
    for (const auto& t : turns) {
      if (!pred(t)) continue;
      ++r.count;
      sum += t.*metric;
    }
    r.proportion = static_cast<double>(r.count) / turns.size();
    if (r.count) r.sigma = (sum / r.count - m) / sd;
    return r;
  };
  std::vector<IGByTypeRow> rows;
  for (auto qt : kAllQuestionTypes)
    rows.push_back(row(std::string(to_string(qt)), [qt](const TurnIG& t) { return t.type == qt; }));
  for (auto f : {QuestionFormat::Open, QuestionFormat::Closed})
    rows.push_back(row(std::string(to_string(f)), [f](const TurnIG& t) { return t.format == f; }));
  return rows;
}

}  // namespace gg
