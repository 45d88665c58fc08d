#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "guessgame/analysis/analysis.hpp"
#include "guessgame/cli/manifest.hpp"
#include "guessgame/engine/game.hpp"

namespace gg {

/// Agents wired for one game.
struct GameAgentSet {
  std::shared_ptr<GuesserAgent> guesser;
  std::shared_ptr<OracleAgent> oracle;
  std::shared_ptr<QuestionClassifier> classifier;
  std::shared_ptr<InterpreterAgent> interpreter;  // null when the manifest has none

  GameAgents view() const { return {*guesser, *oracle, *classifier}; }
};

inline GameAgentSet make_agents(const World& w, std::uint64_t seed) {
  GameAgentSet a;
  a.guesser = std::make_shared<GuesserAgent>(w.agent_config(AgentRole::Guesser), w.backend("guesser", seed));
  a.oracle = std::make_shared<OracleAgent>(w.agent_config(AgentRole::Oracle), w.backend("oracle", seed));
  const auto& checker = w.manifest.agents.count("checker") ? w.manifest.agent("checker").endpoint : "rules";
  if (checker == "rules") {
    a.classifier = std::make_shared<RuleBasedClassifier>();
  } else {
    auto agent = std::make_shared<Agent>(w.agent_config(AgentRole::Checker), w.backend("checker", seed));
    a.classifier = std::make_shared<LlmCheckerClassifier>(agent);
  }
  if (w.manifest.agents.count("interpreter"))
    a.interpreter =
        std::make_shared<InterpreterAgent>(w.agent_config(AgentRole::Interpreter), w.backend("interpreter", seed));
  return a;
}

inline std::string game_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "game-%04zu", index + 1);
  return buf;
}

/// Plays one game. Errors outside the agent transport (which the engine
/// already records) still yield a Failure transcript with the error noted.
inline GameResult play_one(const World& w, const std::string& object, const std::string& game_id) {
  auto seed = game_seed(w.manifest.config.seed, object);
  try {
    auto agents = make_agents(w, seed);
    GameScorer scorer(w.scoring_context(agents.interpreter), w.manifest.config, game_id);
    return run_game(w.manifest.config, object, agents.view(), &scorer, game_id);
  } catch (const std::exception& e) {
    GameResult r;
    r.transcript.game_id = game_id;
    r.transcript.secret_object = object;
    r.transcript.config = w.manifest.config;
    r.transcript.outcome = Outcome::Failure;
    r.transcript.error = std::string("game aborted: ") + e.what();
    return r;
  }
}

/// Picks `n` objects by a seeded shuffle, then restores corpus order.
inline std::vector<std::size_t> sample_indices(std::size_t total, std::optional<std::size_t> n, std::uint64_t seed) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  if (!n || *n >= total) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = total - 1; i > 0; --i) std::swap(idx[i], idx[rng() % (i + 1)]);
  idx.resize(*n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct BatchResult {
  std::vector<Transcript> transcripts;
  std::vector<IGRecord> trace;
  int errored = 0;
};

/// One game per corpus object on `parallelism` workers; output follows corpus order.
inline BatchResult run_batch(const World& w, int parallelism, std::optional<std::size_t> sample = std::nullopt) {
  auto picks = sample_indices(w.corpus.objects.size(), sample, w.manifest.config.seed);
  std::vector<GameResult> results(picks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < picks.size();) {
      results[i] = play_one(w, w.corpus.objects[picks[i]], game_id_for(picks[i]));
    }
  };
  int workers = std::clamp(parallelism, 1, std::max(1, static_cast<int>(picks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  BatchResult out;
  for (auto& r : results) {
    if (r.transcript.error) ++out.errored;
    out.transcripts.push_back(std::move(r.transcript));
    for (auto& rec : r.ig_trace) out.trace.push_back(std::move(rec));
  }
  return out;
}

}  // namespace gg
