#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "guessgame/analysis/aft.hpp"
#include "guessgame/analysis/stats.hpp"
#include "guessgame/analysis/summary.hpp"
#include "guessgame/core/json_io.hpp"
#include "guessgame/engine/scorers.hpp"

namespace gg {

enum class AftMode { Censored, SuccessesOnly };

inline std::string_view to_string(AftMode m) { return m == AftMode::Censored ? "censored" : "successes_only"; }

/// Spearman and AFT for one IG metric against game length.
struct MetricAnalysis {
  std::optional<stats::CorrelationResult> spearman;
  std::optional<AftFit> aft;
  std::vector<std::string> notices;
};

/// Spearman over successful games (mean IG vs T); AFT over log T with failures
/// right-censored at t_max unless successes_only.
inline MetricAnalysis analyze_metric(const std::vector<GameIG>& games, double GameIG::*metric, AftMode mode) {
  MetricAnalysis out;
  std::vector<double> ig, len;
  for (const auto& g : games) {
    if (!g.success) continue;
    ig.push_back(g.*metric);
    len.push_back(static_cast<double>(g.turns));
  }
  try {
    out.spearman = stats::spearman(ig, len);
  } catch (const Error& e) {
    out.notices.push_back(std::string("spearman omitted: ") + e.what());
  }
  std::vector<double> cov, logt;
  std::vector<bool> cens;
  for (const auto& g : games) {
    if (mode == AftMode::SuccessesOnly && !g.success) continue;
    cov.push_back(g.*metric);
    logt.push_back(std::log(static_cast<double>(g.success ? g.turns : g.t_max)));
    cens.push_back(!g.success);
  }
  try {
    if (cov.size() < 10) throw InvariantError("AFT fit needs at least 10 games");
    auto z = stats::zscore(cov);
    out.aft = fit_aft(logt, cens, z);
  } catch (const Error& e) {
    out.notices.push_back(std::string("AFT omitted: ") + e.what());
  }
  return out;
}

struct AnalysisReport {
  SummaryStats summary;
  AftMode aft_mode = AftMode::Censored;
  std::optional<std::vector<IGByTypeRow>> bayes_by_type;
  std::optional<std::vector<IGByTypeRow>> entropy_by_type;
  MetricAnalysis bayes;
  MetricAnalysis entropy;
  std::vector<std::string> notices;
};

inline AnalysisReport analyze(const std::vector<Transcript>& transcripts, const std::vector<IGRecord>& trace,
                              AftMode mode = AftMode::Censored) {
  AnalysisReport r;
  r.summary = summarize(transcripts);
  r.aft_mode = mode;
  auto joined = join_run(transcripts, trace);
  try {
    r.bayes_by_type = ig_by_type(joined.turns, &TurnIG::bayes);
  } catch (const Error& e) {
    r.notices.push_back(std::string("bayesian IG by type omitted: ") + e.what());
  }
  try {
    r.entropy_by_type = ig_by_type(joined.turns, &TurnIG::entropy);
  } catch (const Error& e) {
    r.notices.push_back(std::string("entropy IG by type omitted: ") + e.what());
  }
  r.bayes = analyze_metric(joined.games, &GameIG::mean_bayes, mode);
  r.entropy = analyze_metric(joined.games, &GameIG::mean_entropy, mode);
  return r;
}

// ---------------------------------------------------------------- sweeps

struct SweepRow {
  std::string label;
  std::map<std::string, std::string> params;
  MetricAnalysis result;
  std::optional<std::string> error;
};

struct SweepReport {
  std::string kind;  // "tau" or "belief"
  std::vector<SweepRow> rows;
};

/// Runs each grid point on a small worker pool. A failing point is recorded
/// in its row and the rest continue. Row order follows the grid.
template <class Point>
std::vector<SweepRow> run_grid(const std::vector<Point>& grid, const std::function<SweepRow(const Point&)>& runner,
                               const std::function<std::string(const Point&)>& label, int parallelism) {
  if (grid.empty()) throw InvariantError("sweep grid is empty");
  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < grid.size();) {
      try {
        rows[i] = runner(grid[i]);
      } catch (const std::exception& e) {
        rows[i] = SweepRow{};
        rows[i].error = e.what();
      }
      rows[i].label = label(grid[i]);
    }
  };
  int workers = std::clamp(parallelism, 1, static_cast<int>(grid.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

inline std::string format_number(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Re-scores the entropy metric at each tau from recorded answers.
inline SweepReport sweep_tau(const std::vector<Transcript>& transcripts, const ScoringContext& ctx,
                             const std::vector<double>& taus, AftMode mode, int parallelism) {
  if (!ctx.matcher) throw InvariantError("tau sweep needs an assertion index");
  std::function<SweepRow(const double&)> runner = [&](const double& tau) {
    if (!(tau >= 0 && tau <= 1)) throw InvariantError("tau outside [0,1]");
    std::vector<GameIG> games;
    for (const auto& t : transcripts) {
      if (t.error || t.turns.empty()) continue;
      EntropyScorer scorer(ctx.matcher, ctx.initial_candidates(), tau);
      double sum = 0;
      for (const auto& turn : t.turns) sum += scorer.observe(turn.answer).ig;
      games.push_back({t.game_id, t.turn_count, t.config.t_max, t.outcome == Outcome::Success, 0,
                       sum / t.turn_count});
    }
    SweepRow row;
    row.params["tau"] = format_number(tau, 2);
    row.result = analyze_metric(games, &GameIG::mean_entropy, mode);
    return row;
  };
  std::function<std::string(const double&)> label = [](const double& tau) { return format_number(tau, 2); };
  return {"tau", run_grid(taus, runner, label, parallelism)};
}

struct BeliefPoint {
  double alpha = 1;
  double prune_fraction = 0;  // 0 means no pruning
};

/// Re-scores the Bayesian metric at each (alpha, prune) point from the
/// Interpreter evidence stored in the IG trace; no agent calls.
inline SweepReport sweep_belief(const std::vector<Transcript>& transcripts, const std::vector<IGRecord>& trace,
                                const std::vector<BeliefPoint>& grid, AftMode mode, int parallelism) {
  std::map<std::pair<std::string, int>, const IGRecord*> by_key;
  for (const auto& r : trace) by_key[{r.game_id, r.turn}] = &r;
  std::function<SweepRow(const BeliefPoint&)> runner = [&](const BeliefPoint& pt) {
    std::vector<GameIG> games;
    for (const auto& t : transcripts) {
      if (t.error || t.turns.empty()) continue;
      GameConfig cfg = t.config;
      cfg.interpreter_alpha = pt.alpha;
      cfg.prune_fraction = pt.prune_fraction;
      cfg.validate();
      BayesScorer scorer(EvidenceSource{}, cfg);
      double sum = 0;
      for (const auto& turn : t.turns) {
        auto it = by_key.find({t.game_id, turn.index});
        if (it == by_key.end())
          throw DataError("no IG record for " + t.game_id + " turn " + std::to_string(turn.index));
        sum += scorer.apply(it->second->evidence).ig;
      }
      games.push_back({t.game_id, t.turn_count, t.config.t_max, t.outcome == Outcome::Success,
                       sum / t.turn_count, 0});
    }
    SweepRow row;
    row.params["alpha"] = format_number(pt.alpha, 2);
    row.params["threshold"] = pt.prune_fraction == 0 ? "none" : format_number(pt.prune_fraction * 100, 0) + "%";
    row.result = analyze_metric(games, &GameIG::mean_bayes, mode);
    return row;
  };
  std::function<std::string(const BeliefPoint&)> label = [](const BeliefPoint& pt) {
    return "alpha=" + format_number(pt.alpha, 2) + " threshold=" +
           (pt.prune_fraction == 0 ? std::string("none") : format_number(pt.prune_fraction * 100, 0) + "%");
  };
  return {"belief", run_grid(grid, runner, label, parallelism)};
}

inline std::vector<double> tau_grid(double lo, double hi, double step) {
  if (!(step > 0) || hi < lo) throw InvariantError("invalid tau grid");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    double v = std::round((lo + i * step) * 1e6) / 1e6;
    if (v > hi + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------- rendering

inline Json to_json(const stats::CorrelationResult& c) {
  return {{"rho", c.rho}, {"p_value", c.p_value}, {"n", c.n}};
}

inline Json to_json(const AftFit& f) {
  return {{"distribution", f.distribution}, {"beta", f.beta},       {"std_errors", f.std_errors},
          {"p_values", f.p_values},         {"sigma", f.sigma},     {"log_likelihood", f.log_likelihood},
          {"n", f.n},                       {"n_censored", f.n_censored}, {"iterations", f.iterations}};
}

inline Json to_json(const MetricAnalysis& m) {
  Json j = Json::object();
  j["spearman"] = m.spearman ? to_json(*m.spearman) : Json(nullptr);
  j["aft"] = m.aft ? to_json(*m.aft) : Json(nullptr);
  j["notices"] = m.notices;
  return j;
}

inline Json to_json(const SummaryStats& s) {
  Json j;
  j["n_games"] = s.n_games;
  j["successes"] = s.successes;
  j["errored"] = s.errored;
  j["sr"] = s.sr.mean;
  j["sr_ci"] = s.sr.half_width;
  j["anq"] = s.anq ? Json(s.anq->mean) : Json(nullptr);
  j["anq_ci"] = s.anq ? Json(s.anq->half_width) : Json(nullptr);
  j["n_turns"] = s.n_turns;
  Json types = Json::object();
  for (const auto& [t, v] : s.type_ratios) types[std::string(to_string(t))] = v;
  j["type_ratios"] = types;
  j["open_ratio"] = s.open_ratio;
  j["closed_ratio"] = s.closed_ratio;
  j["enumeration_ratio"] = s.enumeration_ratio;
  return j;
}

inline Json to_json(const std::vector<IGByTypeRow>& rows) {
  Json j = Json::array();
  for (const auto& r : rows)
    j.push_back({{"label", r.label}, {"count", r.count}, {"proportion", r.proportion},
                 {"sigma", r.sigma ? Json(*r.sigma) : Json(nullptr)}});
  return j;
}

inline Json to_json(const AnalysisReport& r) {
  Json j;
  j["summary"] = to_json(r.summary);
  j["aft_mode"] = std::string(to_string(r.aft_mode));
  j["ig_by_type"] = {{"bayesian", r.bayes_by_type ? to_json(*r.bayes_by_type) : Json(nullptr)},
                     {"entropy", r.entropy_by_type ? to_json(*r.entropy_by_type) : Json(nullptr)}};
  j["metrics"] = {{"bayesian", to_json(r.bayes)}, {"entropy", to_json(r.entropy)}};
  j["notices"] = r.notices;
  return j;
}

inline Json to_json(const SweepReport& s) {
  Json j;
  j["kind"] = s.kind;
  j["rows"] = Json::array();
  for (const auto& row : s.rows) {
    Json r;
    r["label"] = row.label;
    r["params"] = Json::object();
    for (const auto& [k, v] : row.params) r["params"][k] = v;
    r["result"] = to_json(row.result);
    r["error"] = row.error ? Json(*row.error) : Json(nullptr);
    j["rows"].push_back(std::move(r));
  }
  return j;
}

namespace report_detail {

/// Left-aligned first column, right-aligned rest, two-space gutters.
inline std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::string pad(width[i] - r[i].size(), ' ');
      line += i == 0 ? r[i] + pad : "  " + pad + r[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

inline std::string pct_ci(const MeanCI& m) {
  return format_number(100 * m.mean, 1) + " +- " + format_number(100 * m.half_width, 2);
}

inline std::string signed_num(double v, int decimals) { return (v >= 0 ? "+" : "") + format_number(v, decimals); }

inline std::string p_text(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, p < 1e-3 ? "%.2e" : "%.3f", p);
  return buf;
}

inline std::string opt_sigma(const std::optional<double>& v) { return v ? signed_num(*v, 2) : "-"; }

inline std::vector<std::string> metric_cells(const MetricAnalysis& m) {
  std::vector<std::string> cells;
  if (m.aft) {
    cells.push_back(signed_num(m.aft->beta.at(1), 3));
    cells.push_back(p_text(m.aft->p_values.at(1)));
  } else {
    cells.insert(cells.end(), {"-", "-"});
  }
  if (m.spearman) {
    cells.push_back(signed_num(m.spearman->rho, 3));
    cells.push_back(p_text(m.spearman->p_value));
  } else {
    cells.insert(cells.end(), {"-", "-"});
  }
  return cells;
}

}  // namespace report_detail

inline std::string to_text(const AnalysisReport& r) {
  using namespace report_detail;
  const auto& s = r.summary;
  std::string out = "Summary\n";
  out += table({{"N", "Successes", "Errored", "SR (%)", "ANQ"},
                {std::to_string(s.n_games), std::to_string(s.successes), std::to_string(s.errored), pct_ci(s.sr),
                 s.anq ? format_number(s.anq->mean, 2) + " +- " + format_number(s.anq->half_width, 2) : "-"}});
  out += "\nQuestion type and format\n";
  std::vector<std::vector<std::string>> rows{{"Type", "Proportion (%)", "Bayesian IG (sigma)", "Entropy IG (sigma)"}};
  for (std::size_t i = 0; i < kAllQuestionTypes.size() + 2; ++i) {
    const IGByTypeRow* b = r.bayes_by_type ? &(*r.bayes_by_type)[i] : nullptr;
    const IGByTypeRow* e = r.entropy_by_type ? &(*r.entropy_by_type)[i] : nullptr;
    std::string label = b ? b->label : e ? e->label : "";
    if (label.empty()) break;
    double prop = b ? b->proportion : e->proportion;
    rows.push_back({label, format_number(100 * prop, 1), b ? opt_sigma(b->sigma) : "-", e ? opt_sigma(e->sigma) : "-"});
  }
  if (rows.size() > 1) out += table(rows);
  out += "\nIG metrics vs game length (AFT " + std::string(to_string(r.aft_mode)) + ")\n";
  std::vector<std::vector<std::string>> m{{"IG Metric", "AFT beta", "AFT p", "Spearman rho", "Spearman p"}};
  auto bc = metric_cells(r.bayes);
  auto ec = metric_cells(r.entropy);
  bc.insert(bc.begin(), "Bayesian");
  ec.insert(ec.begin(), "Entropy");
  m.push_back(bc);
  m.push_back(ec);
  out += table(m);
  out += "\nEnumeration rate (%): " + format_number(100 * s.enumeration_ratio, 1) + "\n";
  std::vector<std::string> notes = r.notices;
  for (const auto& n : r.bayes.notices) notes.push_back("bayesian: " + n);
  for (const auto& n : r.entropy.notices) notes.push_back("entropy: " + n);
  for (const auto& n : notes) out += "note: " + n + "\n";
  return out;
}

inline std::string to_text(const SweepReport& s) {
  using namespace report_detail;
  std::vector<std::vector<std::string>> rows;
  if (s.kind == "tau") {
    rows.push_back({"tau", "AFT beta", "AFT p", "Spearman rho", "Spearman p"});
  } else {
    rows.push_back({"alpha", "Threshold", "AFT beta", "AFT p", "Spearman rho", "Spearman p"});
  }
  std::string notes;
  for (const auto& row : s.rows) {
    std::vector<std::string> cells;
    if (s.kind == "tau") {
      cells.push_back(row.label);
    } else {
      cells.push_back(row.params.count("alpha") ? row.params.at("alpha") : row.label);
      cells.push_back(row.params.count("threshold") ? row.params.at("threshold") : "-");
    }
    auto mc = metric_cells(row.result);
    cells.insert(cells.end(), mc.begin(), mc.end());
    rows.push_back(std::move(cells));
    if (row.error) notes += "note: " + row.label + ": " + *row.error + "\n";
    for (const auto& n : row.result.notices) notes += "note: " + row.label + ": " + n + "\n";
  }
  return table(rows) + notes;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string to_csv(const SweepReport& s) {
  std::string out = "label,aft_beta,aft_p,spearman_rho,spearman_p,error\n";
  for (const auto& row : s.rows) {
    const auto& m = row.result;
    out += csv_escape(row.label) + ",";
    out += m.aft ? format_number(m.aft->beta.at(1), 6) + "," + format_number(m.aft->p_values.at(1), 6) : ",";
    out += ",";
    out += m.spearman ? format_number(m.spearman->rho, 6) + "," + format_number(m.spearman->p_value, 6) : ",";
    out += "," + csv_escape(row.error.value_or("")) + "\n";
  }
  return out;
}

inline std::string to_csv(const AnalysisReport& r) {
  std::string out = "section,label,value\n";
  const auto& s = r.summary;
  auto add = [&](const std::string& sec, const std::string& label, double v) {
    out += sec + "," + csv_escape(label) + "," + format_number(v, 6) + "\n";
  };
  add("summary", "n_games", s.n_games);
  add("summary", "successes", s.successes);
  add("summary", "sr", s.sr.mean);
  add("summary", "sr_ci", s.sr.half_width);
  if (s.anq) {
    add("summary", "anq", s.anq->mean);
    add("summary", "anq_ci", s.anq->half_width);
  }
  add("summary", "enumeration_ratio", s.enumeration_ratio);
  for (const auto& [name, rows] : {std::pair{"bayesian_by_type", &r.bayes_by_type}, {"entropy_by_type", &r.entropy_by_type}}) {
    if (!*rows) continue;
    for (const auto& row : **rows) {
      add(name, row.label + ".proportion", row.proportion);
      if (row.sigma) add(name, row.label + ".sigma", *row.sigma);
    }
  }
  for (const auto& [name, m] : {std::pair{"bayesian", &r.bayes}, {"entropy", &r.entropy}}) {
    if (m->aft) {
      add(name, "aft_beta", m->aft->beta.at(1));
      add(name, "aft_p", m->aft->p_values.at(1));
    }
    if (m->spearman) {
      add(name, "spearman_rho", m->spearman->rho);
      add(name, "spearman_p", m->spearman->p_value);
    }
  }
  return out;
}

}  // namespace gg
