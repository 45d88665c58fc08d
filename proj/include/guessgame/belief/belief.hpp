#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "guessgame/core/errors.hpp"
#include "guessgame/core/types.hpp"

namespace gg {

struct BeliefParams {
  double alpha = 1.0;
  double epsilon = 1e-12;
  double prune_fraction = 0.35;

  static BeliefParams from(const GameConfig& c) {
    return {c.interpreter_alpha, c.epsilon, c.prune_fraction};
  }
};

/// Normalized distribution over concept strings. Empty only before the first
/// update (the open-world b0).
class BeliefState {
 public:
  using Mass = std::map<std::string, double>;

  BeliefState() = default;
  explicit BeliefState(BeliefParams params) : params_(params) {}
  /// Takes masses as given; they must be positive and sum to 1.
  BeliefState(Mass mass, BeliefParams params) : mass_(std::move(mass)), params_(params) {
    check();
  }

  const Mass& mass() const noexcept { return mass_; }
  const BeliefParams& params() const noexcept { return params_; }
  bool empty() const noexcept { return mass_.empty(); }
  std::size_t size() const noexcept { return mass_.size(); }

  double at(const std::string& concept_name) const {
    auto it = mass_.find(concept_name);
    return it == mass_.end() ? 0.0 : it->second;
  }

  /// Concepts sorted by mass descending, ties by name.
  std::vector<std::pair<std::string, double>> top(std::size_t k) const {
    std::vector<std::pair<std::string, double>> v(mass_.begin(), mass_.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (v.size() > k) v.resize(k);
    return v;
  }

  friend bool operator==(const BeliefState& a, const BeliefState& b) { return a.mass_ == b.mass_; }

 private:
  void check() const {
    if (mass_.empty()) return;
    double total = 0;
    for (const auto& [c, m] : mass_) {
      if (!(m > 0)) throw InvariantError("belief mass must be positive: " + c);
      total += m;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvariantError("belief masses must sum to 1");
  }

  Mass mass_;
  BeliefParams params_;
};

/// Log-linear soft-evidence update: known concepts are scaled by exp(alpha*r),
/// new concepts enter at exp(alpha*r), then every mass is floored at epsilon
/// and the result normalized. Computed in the log domain.
inline BeliefState update(const BeliefState& belief, std::span<const ConceptScore> evidence) {
  if (evidence.empty()) return belief;
  const auto& p = belief.params();
  std::map<std::string, double> log_mass;
  for (const auto& [c, m] : belief.mass()) log_mass[c] = std::log(m);
  for (const auto& e : evidence) {
    if (!(e.score > 0 && e.score <= 1)) throw InvariantError("evidence score outside (0,1]");
    auto [it, inserted] = log_mass.try_emplace(e.concept_name, 0.0);
    it->second += p.alpha * e.score;
  }
  const double log_eps = std::log(p.epsilon);
  double peak = -std::numeric_limits<double>::infinity();
  for (auto& [c, lm] : log_mass) {
    lm = std::max(lm, log_eps);
    peak = std::max(peak, lm);
  }
  double sum = 0;
  for (const auto& [c, lm] : log_mass) sum += std::exp(lm - peak);
  const double log_norm = peak + std::log(sum);
  BeliefState::Mass out;
  for (const auto& [c, lm] : log_mass) out.emplace(c, std::exp(lm - log_norm));
  return BeliefState(std::move(out), p);
}

/// Drops the lowest-mass concepts while the cumulative removed mass stays within
/// prune_fraction; the single highest-mass concept always survives.
inline BeliefState prune(const BeliefState& belief) {
  const double fraction = belief.params().prune_fraction;
  if (belief.size() <= 1 || fraction <= 0) return belief;
  std::vector<std::pair<std::string, double>> asc(belief.mass().begin(), belief.mass().end());
  std::stable_sort(asc.begin(), asc.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  double removed = 0;
  std::size_t cut = 0;
  while (cut + 1 < asc.size() && removed + asc[cut].second <= fraction) {
    removed += asc[cut].second;
    ++cut;
  }
  if (cut == 0) return belief;
  double kept_total = 0;
  for (std::size_t i = cut; i < asc.size(); ++i) kept_total += asc[i].second;
  BeliefState::Mass out;
  for (std::size_t i = cut; i < asc.size(); ++i) out.emplace(asc[i].first, asc[i].second / kept_total);
  return BeliefState(std::move(out), belief.params());
}

/// KL(posterior || prior) in nats over the posterior support, with the prior
/// floored at epsilon.
inline double kl_ig(const BeliefState& prior, const BeliefState& posterior) {
  if (posterior.empty()) throw InvariantError("kl_ig needs a non-empty posterior");
  const double eps = posterior.params().epsilon;
  double kl = 0;
  for (const auto& [c, q] : posterior.mass()) {
    double p = std::max(prior.at(c), eps);
    kl += q * std::log(q / p);
  }
  // Epsilon-floored priors can sum to 1 + O(eps); do not report that as negative gain.
  return std::max(kl, 0.0);
}

struct TurnScore {
  BeliefState belief;
  double ig = 0;
};

/// Engine hook: prune(update(b, e)) and its KL gain against the pre-update belief.
inline TurnScore score_turn(const BeliefState& belief, std::span<const ConceptScore> evidence) {
  if (evidence.empty()) return {belief, 0.0};
  auto posterior = prune(update(belief, evidence));
  double ig = kl_ig(belief, posterior);
  return {std::move(posterior), ig};
}

/// Uniform belief over the evidence support; optional first-turn prior.
inline BeliefState uniform_over(std::span<const ConceptScore> evidence, BeliefParams params) {
  BeliefState::Mass m;
  for (const auto& e : evidence) m.emplace(e.concept_name, 0.0);
  for (auto& [c, v] : m) v = 1.0 / static_cast<double>(m.size());
  return BeliefState(std::move(m), params);
}

}  // namespace gg
