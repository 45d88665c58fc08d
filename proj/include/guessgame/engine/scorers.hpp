#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "guessgame/agents/agents.hpp"
#include "guessgame/belief/belief.hpp"
#include "guessgame/core/types.hpp"
#include "guessgame/entropy/conceptnet.hpp"

namespace gg {

/// Per-game IG hook: called once per accepted turn, in order.
class TurnScorer {
 public:
  virtual ~TurnScorer() = default;
  virtual IGRecord score(const TurnRecord& turn) = 0;
  /// Current belief, for inspection endpoints.
  virtual const BeliefState& belief() const = 0;
};

/// Produces the Interpreter evidence for one question/answer pair.
using EvidenceSource = std::function<Interpretation(const std::string& question, const std::string& answer)>;

inline EvidenceSource evidence_from(std::shared_ptr<const InterpreterAgent> agent) {
  return [agent = std::move(agent)](const std::string& q, const std::string& a) { return agent->interpret(q, a); };
}

/// Bayesian KL scoring over an open-world concept belief.
class BayesScorer {
 public:
  struct Step {
    double ig = 0;
    std::vector<ConceptScore> evidence;
    std::size_t prior_support = 0;
    std::size_t posterior_support = 0;
    bool skipped = false;
  };

  BayesScorer(EvidenceSource source, const GameConfig& config)
      : source_(std::move(source)), belief_(BeliefParams::from(config)),
        uniform_first_(config.seed_uniform_first_turn) {}

  /// Scores with evidence already in hand (no Interpreter call).
  Step apply(std::vector<ConceptScore> evidence) {
    Step s;
    s.prior_support = belief_.size();
    s.evidence = std::move(evidence);
    if (s.evidence.empty()) {
      s.skipped = true;
      s.posterior_support = belief_.size();
      return s;
    }
    BeliefState prior = belief_;
    if (uniform_first_ && belief_.empty()) prior = uniform_over(s.evidence, belief_.params());
    auto posterior = prune(update(belief_, s.evidence));
    s.ig = kl_ig(prior, posterior);
    belief_ = std::move(posterior);
    s.posterior_support = belief_.size();
    return s;
  }

  Step observe(const std::string& question, const std::string& answer) {
    try {
      return apply(source_(question, answer).scores);
    } catch (const Error&) {
      // EmptyInterpretation or Interpreter transport failure: the turn scores 0.
      return apply({});
    }
  }

  const BeliefState& belief() const noexcept { return belief_; }

 private:
  EvidenceSource source_;
  BeliefState belief_;
  bool uniform_first_;
};

/// ConceptNet candidate-set filtering with log2 shrinkage as the gain.
class EntropyScorer {
 public:
  struct Step {
    double ig = 0;
    std::int64_t before = 0;
    std::int64_t after = 0;
    bool skipped = false;
  };

  EntropyScorer(std::shared_ptr<const AssertionMatcher> matcher, CandidateSet initial, double tau)
      : matcher_(std::move(matcher)), candidates_(std::move(initial)), tau_(tau) {
    if (candidates_.empty()) throw InvariantError("initial candidate set is empty");
  }

  Step observe(const std::string& answer) {
    Step s;
    s.before = static_cast<std::int64_t>(candidates_.size());
    std::vector<RelationConcept> matched;
    bool embed_failed = false;
    try {
      matched = matcher_->match(answer, tau_);
    } catch (const Error&) {
      embed_failed = true;
    }
    auto filtered = filter_candidates(candidates_, matched, matcher_->index());
    s.skipped = embed_failed || filtered.skipped;
    candidates_ = std::move(filtered.candidates);
    s.after = static_cast<std::int64_t>(candidates_.size());
    s.ig = entropy_ig(s.before, s.after);
    return s;
  }

  const CandidateSet& candidates() const noexcept { return candidates_; }

 private:
  std::shared_ptr<const AssertionMatcher> matcher_;
  CandidateSet candidates_;
  double tau_;
};

/// Everything needed to build a per-game scorer. Either metric may be absent.
struct ScoringContext {
  EvidenceSource evidence;                           // empty: Bayes metric disabled
  std::shared_ptr<const AssertionMatcher> matcher;   // null: entropy metric disabled
  std::optional<std::vector<std::string>> vocabulary;  // restricts D0 when set

  CandidateSet initial_candidates() const {
    if (!matcher) return {};
    return vocabulary ? CandidateSet::restricted(matcher->index(), *vocabulary) : CandidateSet::all(matcher->index());
  }
};

class GameScorer final : public TurnScorer {
 public:
  GameScorer(const ScoringContext& ctx, const GameConfig& config, std::string game_id)
      : game_id_(std::move(game_id)), empty_belief_(BeliefParams::from(config)) {
    if (ctx.evidence) bayes_.emplace(ctx.evidence, config);
    if (ctx.matcher) entropy_.emplace(ctx.matcher, ctx.initial_candidates(), config.tau);
  }

  IGRecord score(const TurnRecord& turn) override {
    IGRecord r;
    r.game_id = game_id_;
    r.turn = turn.index;
    if (bayes_) {
      auto s = bayes_->observe(turn.question, turn.answer);
      r.bayes_ig = s.ig;
      r.bayes_skipped = s.skipped;
      r.prior_support = static_cast<std::int64_t>(s.prior_support);
      r.belief_support = static_cast<std::int64_t>(s.posterior_support);
      r.evidence = std::move(s.evidence);
    } else {
      r.bayes_skipped = true;
    }
    if (entropy_) {
      auto s = entropy_->observe(turn.answer);
      r.entropy_ig = s.ig;
      r.entropy_skipped = s.skipped;
      r.candidates_before = s.before;
      r.candidates_after = s.after;
    } else {
      r.entropy_skipped = true;
    }
    ++calls_;
    return r;
  }

  const BeliefState& belief() const override { return bayes_ ? bayes_->belief() : empty_belief_; }
  int calls() const noexcept { return calls_; }

 private:
  std::string game_id_;
  std::optional<BayesScorer> bayes_;
  std::optional<EntropyScorer> entropy_;
  BeliefState empty_belief_;
  int calls_ = 0;
};

}  // namespace gg
