// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "guessgame/cli/commands.hpp"
#include "guessgame/taxonomy/evaluation.hpp"

namespace fs = std::filesystem;
using namespace gg;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kFixtures = GG_FIXTURE_DIR;
const fs::path kGolden = GG_GOLDEN_DIR;

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Runs a check body; an escaping exception is a failure of that criterion.
template <typename F>
void criterion(const std::string& name, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

// ---------------------------------------------------------------- belief

using Big = boost::multiprecision::cpp_bin_float_50;

// Direct evaluation of the log-linear update in 50-digit arithmetic.
std::map<std::string, Big> big_update(const std::map<std::string, double>& prior,
                                      const std::vector<ConceptScore>& evidence, double alpha, double eps) {
  std::map<std::string, Big> m;
  for (const auto& [c, p] : prior) m[c] = Big(p);
  for (const auto& e : evidence) {
    Big f = boost::multiprecision::exp(Big(alpha) * Big(e.score));
    auto it = m.find(e.concept_name);
    if (it == m.end()) {
      m[e.concept_name] = f;
    } else {
      it->second *= f;
    }
  }
  Big total = 0;
  for (auto& [c, v] : m) {
    if (v < Big(eps)) v = Big(eps);
    total += v;
  }
  for (auto& [c, v] : m) v /= total;
  return m;
}

void belief_oracle() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double alphas[] = {0.5, 1.0, 2.0};
  double max_err = 0;
  auto t0 = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    BeliefParams params{alphas[i % 3], 1e-12, 0.0};
    int support = static_cast<int>(rng() % 9);
    std::map<std::string, double> prior;
    double total = 0;
    for (int k = 0; k < support; ++k) {
      double w = u(rng) < 0.1 ? 1e-14 : u(rng) + 1e-3;  // occasionally below the epsilon floor
      prior["c" + std::to_string(rng() % 16)] += w;
    }
    for (auto& [c, w] : prior) total += w;
    for (auto& [c, w] : prior) w /= total;
    std::vector<ConceptScore> ev;
    std::set<std::string> used;
    int n_ev = 1 + static_cast<int>(rng() % 5);
    for (int k = 0; k < n_ev; ++k) {
      auto c = "c" + std::to_string(rng() % 16);
      if (!used.insert(c).second) continue;
      ev.push_back({c, std::max(1e-3, u(rng))});
    }
    BeliefState prior_state = prior.empty() ? BeliefState(params) : BeliefState(prior, params);
    auto got = update(prior_state, ev);
    auto want = big_update(prior, ev, params.alpha, params.epsilon);
    if (got.size() != want.size()) {
      max_err = 1;
      break;
    }
    for (const auto& [c, v] : want) max_err = std::max(max_err, std::abs(got.at(c) - v.convert_to<double>()));
  }
  double secs = seconds_since(t0);
  report("belief-oracle", max_err <= 1e-9 && secs < 5.0,
         "1000 cases, max abs error " + fmt("%.3e", max_err) + " (<= 1e-9), " + fmt("%.2f", secs) + " s (< 5)");
}

// ---------------------------------------------------------------- KL

void kl_properties() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  BeliefParams params{1.0, 1e-12, 0.0};
  auto random_dist = [&](int n) {
    std::map<std::string, double> m;
    double total = 0;
    for (int k = 0; k < n; ++k) m["c" + std::to_string(rng() % 12)] += u(rng);
    for (auto& [c, w] : m) total += w;
    for (auto& [c, w] : m) w /= total;
    return BeliefState(m, params);
  };
  double max_self = 0, min_kl = 0;
  for (int i = 0; i < 10000; ++i) {
    auto p = random_dist(1 + static_cast<int>(rng() % 8));
    auto q = random_dist(1 + static_cast<int>(rng() % 8));
    max_self = std::max(max_self, std::abs(kl_ig(p, p)));
    min_kl = std::min(min_kl, kl_ig(p, q));
  }
  // Worked pair on the empty prior, without pruning.
  std::vector<ConceptScore> ev{{"metal", 0.9}, {"steel", 0.7}, {"aluminum", 0.6}};
  auto b = update(BeliefState(params), ev);
  double z = std::exp(0.9) + std::exp(0.7) + std::exp(0.6);
  double rel = 0;
  for (const auto& e : ev) rel = std::max(rel, std::abs(b.at(e.concept_name) - std::exp(e.score) / z) / (std::exp(e.score) / z));
  bool ok = max_self == 0 && min_kl >= 0 && b.size() == 3 && rel <= 1e-12;
  report("kl-properties", ok,
         "10000 pairs, max |kl(p,p)| " + fmt("%.1e", max_self) + ", min kl " + fmt("%.1e", min_kl) +
             "; worked example max rel error " + fmt("%.2e", rel) + " (<= 1e-12)");
}

// ---------------------------------------------------------------- entropy

void entropy_metric() {
  std::mt19937_64 rng(3);
  int violations = 0, empties = 0;
  const std::vector<std::string> rels{"HasProperty", "UsedFor", "IsA"};
  for (int seq = 0; seq < 1000; ++seq) {
    std::vector<Assertion> as;
    int n_obj = 2 + static_cast<int>(rng() % 30);
    for (int o = 0; o < n_obj; ++o) {
      int n_edges = static_cast<int>(rng() % 5);
      for (int k = 0; k < n_edges; ++k)
        as.push_back({rels[rng() % rels.size()], "o" + std::to_string(o), "c" + std::to_string(rng() % 10)});
    }
    as.push_back({"IsA", "o0", "thing"});
    auto idx = AssertionIndex::build(as);
    auto d = CandidateSet::all(idx);
    for (int step = 0; step < 12; ++step) {
      std::vector<RelationConcept> matched;
      int m = static_cast<int>(rng() % 4);
      for (int k = 0; k < m; ++k) matched.push_back({rels[rng() % rels.size()], "c" + std::to_string(rng() % 12)});
      auto next = filter_candidates(d, matched, idx);
      for (auto id : next.candidates.members())
        if (!d.contains(id)) ++violations;
      if (next.candidates.empty()) ++empties;
      d = next.candidates;
    }
  }
  bool exact = entropy_ig(8, 2) == 2.0;
  std::vector<Assertion> fx{{"HasProperty", "knife", "sharp"}, {"HasProperty", "pillow", "soft"}};
  auto idx = AssertionIndex::build(fx);
  auto all = CandidateSet::all(idx);
  auto r = filter_candidates(all, {}, idx);
  bool skip = r.skipped && r.candidates == all;
  report("entropy-metric", violations == 0 && empties == 0 && exact && skip,
         "1000 sequences, " + std::to_string(violations) + " containment violations, " + std::to_string(empties) +
             " empty sets; entropy_ig(8,2) " + (exact ? "== 2.0" : "!= 2.0") + "; skip rule " +
             (skip ? "triggers" : "missing") + " on empty matches");
}

// ---------------------------------------------------------------- ingest

void ingest_fixture() {
  auto r = ingest_file(kFixtures / "conceptnet_20.csv");
  std::set<Assertion> got(r.index.assertions().begin(), r.index.assertions().end());
  std::set<Assertion> want;
  std::ifstream in(kFixtures / "conceptnet_20.expected.tsv");
  for (std::string line; std::getline(in, line);) {
    auto f = text::split(line, '\t');
    if (f.size() == 3) want.insert({f[0], f[1], f[2]});
  }
  bool quoted = got.contains({"HasProperty", "knife", "sharp"}) && got.contains({"UsedFor", "knife", "cutting"});
  std::vector<int> lines;
  for (const auto& d : r.stats.diagnostics) lines.push_back(d.line);
  bool diag = lines == std::vector<int>{10, 17};
  report("conceptnet-ingest", got == want && quoted && diag && r.stats.rows == 20,
         std::to_string(got.size()) + " triples (expected " + std::to_string(want.size()) +
             (got == want ? ", exact match" : ", MISMATCH") + "), knife/sharp and knife/cutting " +
             (quoted ? "present" : "missing") + ", malformed rows reported at lines " +
             (diag ? "10 and 17" : "unexpected lines"));
}

// ---------------------------------------------------------------- engine

void engine_fuzz() {
  auto table = std::make_shared<mock::ObjectTable>(mock::ObjectTable::load(kFixtures / "mock_objects.tsv"));
  auto names = table->names();
  std::mt19937_64 rng(4);
  int bad_term = 0, k1_pairs = 0, open_violations = 0, k1_games = 0, fo_games = 0, invalid = 0;
  RuleBasedClassifier rules;
  for (int g = 0; g < 500; ++g) {
    GameConfig c;
    c.t_max = 1 + static_cast<int>(rng() % 50);
    int mode = g % 4;  // 0 plain, 1 k=1, 2 forced-open, 3 both plus restricted types
    if (mode == 1 || mode == 3) c.repeat_limit_k = 1;
    if (mode == 2 || mode == 3) c.forced_open = true;
    if (mode == 3) {
      QuestionTypeSet s;
      for (auto t : kAllQuestionTypes)
        if (rng() % 2) s.insert(t);
      s.insert(QuestionType::Direct);
      c.allowed_types = s;
    }
    auto secret = names[rng() % names.size()];
    auto seed = rng();
    GuesserAgent guesser(AgentConfig::defaults_for(AgentRole::Guesser), mock::chaos_guesser_backend(table, seed));
    OracleAgent oracle(AgentConfig::defaults_for(AgentRole::Oracle), mock::oracle_backend(table));
    auto res = run_game(c, secret, {guesser, oracle, rules}, nullptr, "fuzz-" + std::to_string(g));
    const auto& t = res.transcript;
    try {
      t.validate();
    } catch (const Error&) {
      ++invalid;
    }
    if (t.turn_count > c.t_max || t.turn_count > 50 || t.error) ++bad_term;
    if (c.repeat_limit_k) {
      ++k1_games;
      for (std::size_t i = 1; i < t.turns.size(); ++i)
        if (t.turns[i].q_type == t.turns[i - 1].q_type && !t.turns[i].constraint_violation) ++k1_pairs;
    }
    if (c.forced_open) {
      ++fo_games;
      for (const auto& turn : t.turns)
        if (turn.q_type != QuestionType::Direct && !turn.constraint_violation && turn.q_format != QuestionFormat::Open)
          ++open_violations;
    }
  }
  report("engine-fuzz", bad_term == 0 && k1_pairs == 0 && open_violations == 0 && invalid == 0,
         "500 games, " + std::to_string(bad_term) + " bad terminations, " + std::to_string(invalid) +
             " invalid transcripts; k=1 (" + std::to_string(k1_games) + " games): " + std::to_string(k1_pairs) +
             " unflagged same-type pairs; forced-open (" + std::to_string(fo_games) +
             " games): " + std::to_string(open_violations) + " unflagged closed non-Direct turns");
}

// ---------------------------------------------------------------- golden run

const char* kGoldenFiles[] = {"transcripts.jsonl", "ig_trace.jsonl", "summary.json", "report.json", "summary.txt"};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void golden_determinism() {
  auto tmp = fs::temp_directory_path() / ("gg-acceptance-" + std::to_string(::getpid()));
  std::vector<std::string> diffs;
  for (int par : {1, 4}) {
    cli::RunOptions o;
    o.config = kFixtures / "mock_manifest.json";
    o.parallelism = par;
    o.out = tmp / ("run" + std::to_string(par));
    std::ostringstream sink;
    cli::cmd_run(o, sink);
    for (const char* f : kGoldenFiles) {
      auto want = slurp(kGolden / f);
      if (want.empty() || slurp(*o.out / f) != want) diffs.push_back(std::string(f) + "@j" + std::to_string(par));
    }
  }
  fs::remove_all(tmp);
  std::string d;
  for (const auto& x : diffs) d += " " + x;
  report("golden-determinism", diffs.empty(),
         diffs.empty() ? "20-game mock run matches 5 golden files byte-for-byte at parallelism 1 and 4"
                       : "differs:" + d);
}

void replay_equivalence() {
  auto world = World::build(load_manifest(kFixtures / "mock_manifest.json", false));
  auto ts = read_transcripts(kGolden / "transcripts.jsonl");
  auto trace = read_ig_records(kGolden / "ig_trace.jsonl");
  auto replayed = cli::rescore(world, ts);
  report("replay-equivalence", !trace.empty() && replayed == trace,
         std::to_string(replayed.size()) + " re-scored records vs " + std::to_string(trace.size()) +
             (replayed == trace ? " live records, identical" : " live records, DIFFERENT"));
}

// ---------------------------------------------------------------- statistics

long double brute_rank(const std::vector<double>& xs, std::size_t i) {
  long double less = 0, equal = 0;
  for (double x : xs) {
    if (x < xs[i]) ++less;
    if (x == xs[i]) ++equal;
  }
  return less + (equal + 1) / 2;
}

long double brute_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::size_t n = xs.size();
  std::vector<long double> rx(n), ry(n);
  for (std::size_t i = 0; i < n; ++i) {
    rx[i] = brute_rank(xs, i);
    ry[i] = brute_rank(ys, i);
  }
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Log-normal AFT sample with right-censoring at the 90th percentile of log T.
AftData synthetic_aft(std::uint64_t seed, int n, double b0, double b1, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = z(rng);
    y[i] = b0 + b1 * x[i] + sigma * z(rng);
  }
  auto sorted = y;
  std::nth_element(sorted.begin(), sorted.begin() + n * 9 / 10, sorted.end());
  double cap = sorted[n * 9 / 10];
  std::vector<bool> cens(n);
  for (int i = 0; i < n; ++i) {
    cens[i] = y[i] > cap;
    if (cens[i]) y[i] = cap;
  }
  return AftData::with_intercept(y, cens, x);
}

void statistics() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  double max_diff = 0;
  int tie_cases = 0;
  for (int c = 0; c < 200; ++c) {
    int n = 8 + static_cast<int>(rng() % 60);
    int levels = 2 + static_cast<int>(rng() % 6);  // few levels: ties guaranteed for n > levels
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
      xs[i] = static_cast<double>(rng() % levels);
      ys[i] = static_cast<double>(rng() % (levels + 3)) + (c % 2 ? 0.5 * xs[i] : 0.0);
    }
    if (std::set<double>(xs.begin(), xs.end()).size() < 2 || std::set<double>(ys.begin(), ys.end()).size() < 2) {
      --c;
      continue;
    }
    if (std::set<double>(xs.begin(), xs.end()).size() < xs.size()) ++tie_cases;
    auto got = stats::spearman(xs, ys).rho;
    max_diff = std::max(max_diff, static_cast<double>(std::abs(got - brute_spearman(xs, ys))));
  }
  report("spearman-oracle", max_diff <= 1e-12 && tie_cases == 200,
         "200 cases (" + std::to_string(tie_cases) + " with ties), max |rho - brute force| " +
             fmt("%.2e", max_diff) + " (<= 1e-12)");

  int within = 0;
  double worst = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    auto fit = fit_aft(synthetic_aft(100 + s, 2000, 2.5, -0.57, 0.5));
    double err = std::abs(fit.beta.at(1) + 0.57);
    worst = std::max(worst, err);
    if (err <= 0.05) ++within;
  }
  report("aft-recovery", within >= 18,
         std::to_string(within) + "/20 seeds recover beta1=-0.57 within 0.05 (n=2000, sigma=0.5, 10% censored); "
                                  "worst error " + fmt("%.4f", worst));

  double worst_rel = 0;
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int pt = 0; pt < 100; ++pt) {
    auto d = synthetic_aft(500 + pt, 200, 2.0, -0.5, 0.6);
    Eigen::VectorXd th(3);
    th << 2.0 + u(rng), -0.5 + u(rng), std::log(0.6) + 0.5 * u(rng);
    auto g = aft_derivatives(d, th).gradient;
    for (int j = 0; j < 3; ++j) {
      double h = 1e-5 * std::max(1.0, std::abs(th(j)));
      Eigen::VectorXd a = th, b = th;
      a(j) += h;
      b(j) -= h;
      double fd = (aft_log_likelihood(d, a) - aft_log_likelihood(d, b)) / (2 * h);
      worst_rel = std::max(worst_rel, std::abs(g(j) - fd) / std::max(1.0, std::abs(g(j))));
    }
  }
  double secs = seconds_since(t0);
  report("aft-gradient", worst_rel <= 1e-6,
         "100 random points, max relative gradient error vs central differences " + fmt("%.2e", worst_rel) +
             " (<= 1e-6)");
  report("statistics-runtime", secs < 60.0, "Spearman and AFT checks took " + fmt("%.2f", secs) + " s (< 60)");
}

// ---------------------------------------------------------------- published figures

void sr_interval() {
  std::vector<Transcript> ts(858);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto& t = ts[i];
    t.game_id = "g" + std::to_string(i);
    t.config.t_max = 50;
    bool success = i < 338;
    int n = success ? 1 + static_cast<int>(i % 40) : 50;
    for (int k = 1; k <= n; ++k) {
      TurnRecord r;
      r.index = k;
      r.question = k == n && success ? "Is it a knife?" : "What color is it?";
      r.q_type = k == n && success ? QuestionType::Direct : QuestionType::Attribute;
      r.q_format = k == n && success ? QuestionFormat::Closed : QuestionFormat::Open;
      r.is_direct_guess = r.q_type == QuestionType::Direct;
      r.verdict = k == n && success ? TurnVerdict::Correct : TurnVerdict::Continue;
      r.answer = "It is silver.";
      t.turns.push_back(r);
    }
    t.turn_count = n;
    t.outcome = success ? Outcome::Success : Outcome::Failure;
  }
  auto s = summarize(ts);
  double hw = 100 * s.sr.half_width;
  report("sr-interval", std::abs(hw - 3.27) <= 0.01,
         "338/858 successes: SR " + fmt("%.1f", 100 * s.sr.mean) + "%, CI half-width " + fmt("%.4f", hw) +
             "% (3.27 +- 0.01)");
}

void classifier_checks() {
  auto labeled = load_labeled_questions(kFixtures / "example_questions.tsv");
  auto r = evaluate_classifier(labeled, RuleBasedClassifier());
  // Toy 3-class confusion, computed by hand:
  //   gold A A A F F L L L / predicted A A F F L L L A
  //   accuracy 5/8; per-class P=R=F1 = 2/3, 1/2, 2/3; macro 11/18.
  using Q = QuestionType;
  std::vector<Q> gold{Q::Attribute, Q::Attribute, Q::Attribute, Q::Function,
                      Q::Function,  Q::Location,  Q::Location,  Q::Location};
  std::vector<Q> pred{Q::Attribute, Q::Attribute, Q::Function, Q::Function,
                      Q::Location,  Q::Location,  Q::Location, Q::Attribute};
  auto toy = evaluate_predictions(gold, pred);
  bool toy_ok = std::abs(toy.accuracy - 5.0 / 8) < 1e-15 && std::abs(toy.macro_f1 - 11.0 / 18) < 1e-15 &&
                std::abs(toy.macro_precision - 11.0 / 18) < 1e-15 && std::abs(toy.macro_recall - 11.0 / 18) < 1e-15 &&
                toy.confusion[0][1] == 1 && toy.confusion[2][0] == 1;
  report("classifier", r.accuracy == 1.0 && toy_ok,
         "rule cascade accuracy " + fmt("%.3f", r.accuracy) + " on " + std::to_string(r.n) +
             " example questions; toy confusion accuracy " + fmt("%.4f", toy.accuracy) + " (5/8), macro-F1 " +
             fmt("%.4f", toy.macro_f1) + " (11/18)" + (toy_ok ? "" : " MISMATCH"));
}

}  // namespace

int main() {
  criterion("belief-oracle", belief_oracle);
  criterion("kl-properties", kl_properties);
  criterion("entropy-metric", entropy_metric);
  criterion("conceptnet-ingest", ingest_fixture);
  criterion("engine-fuzz", engine_fuzz);
  criterion("golden-determinism", golden_determinism);
  criterion("replay-equivalence", replay_equivalence);
  criterion("statistics", statistics);
  criterion("sr-interval", sr_interval);
  criterion("classifier", classifier_checks);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures;
}
