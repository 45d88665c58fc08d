#pragma once

// Subcommand bodies for the gg tool. Each returns a process exit code.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guessgame/analysis/analysis.hpp"
#include "guessgame/cli/batch.hpp"
#include "guessgame/cli/manifest.hpp"
#include "guessgame/entropy/conceptnet.hpp"
#include "guessgame/service/server.hpp"

namespace gg::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kPartialFailure = 3 };

/// Games allowed to error before a run exits with kPartialFailure.
inline constexpr double kMaxErrorFraction = 0.10;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  auto out = detail::open_out(p);
  out << s;
}

inline std::string pretty(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- run

struct RunOptions {
  std::filesystem::path config;
  int parallelism = 1;
  std::optional<std::size_t> sample;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

inline int cmd_run(const RunOptions& o, std::ostream& os) {
  auto m = load_manifest(o.config);
  if (o.seed) m.config.seed = *o.seed;
  auto out_dir = o.out ? *o.out : m.resolve(m.output_dir);
  auto started = utc_timestamp();
  auto world = World::build(m);
  auto batch = run_batch(world, o.parallelism, o.sample);

  write_text(out_dir / "transcripts.jsonl", transcripts_to_jsonl(batch.transcripts));
  write_text(out_dir / "ig_trace.jsonl", ig_records_to_jsonl(batch.trace));
  auto summary = summarize(batch.transcripts);
  write_text(out_dir / "summary.json", pretty(to_json(summary)));

  Json info;
  info["manifest"] = to_json(world.manifest);
  info["corpus_sha256"] = world.corpus.sha256;
  info["started_at"] = started;
  info["finished_at"] = utc_timestamp();
  info["games"] = batch.transcripts.size();
  info["errored"] = batch.errored;
  info["outputs"] = {{"transcripts", "transcripts.jsonl"}, {"ig_trace", "ig_trace.jsonl"}, {"summary", "summary.json"},
                     {"report", "report.json"}, {"report_text", "summary.txt"}};
  write_text(out_dir / "run_info.json", pretty(info));

  auto report = analyze(batch.transcripts, batch.trace, AftMode::Censored);
  write_text(out_dir / "report.json", pretty(to_json(report)));
  write_text(out_dir / "summary.txt", to_text(report));
  os << to_text(report);
  os << "outputs written to " << out_dir.string() << "\n";
  double frac = batch.transcripts.empty() ? 0.0 : static_cast<double>(batch.errored) / batch.transcripts.size();
  if (frac > kMaxErrorFraction) {
    os << batch.errored << " of " << batch.transcripts.size() << " games errored\n";
    return kPartialFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------- ingest

inline int cmd_ingest(const std::filesystem::path& dump, const std::filesystem::path& out,
                      const std::vector<std::string>& whitelist, std::ostream& os) {
  if (!std::filesystem::exists(dump)) throw DataError("dump not found: " + dump.string());
  std::set<std::string> wl = whitelist.empty() ? default_relation_whitelist()
                                               : std::set<std::string>(whitelist.begin(), whitelist.end());
  auto r = ingest_file(dump, wl);
  if (r.stats.rows == 0) throw DataError("dump " + dump.string() + " has no rows");
  save_index(r.index, out, wl, file_sha256(dump));
  os << "rows " << r.stats.rows << ", kept " << r.stats.kept << ", filtered " << r.stats.filtered
     << ", duplicates " << r.stats.duplicates << ", malformed " << r.stats.malformed << "\n";
  for (const auto& [rel, n] : r.stats.per_relation) os << "  " << rel << " " << n << "\n";
  for (const auto& d : r.stats.diagnostics) os << "  line " << d.line << ": " << d.message << "\n";
  os << "objects " << r.index.object_count() << ", concepts " << r.index.concept_labels().size() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::filesystem::path transcripts;
  std::filesystem::path trace;
  bool successes_only = false;
  std::optional<std::filesystem::path> json_out;
  std::optional<std::filesystem::path> csv_out;
};

inline int cmd_analyze(const AnalyzeOptions& o, std::ostream& os) {
  auto ts = read_transcripts(o.transcripts);
  auto trace = read_ig_records(o.trace);
  if (ts.empty()) throw DataError("no transcripts in " + o.transcripts.string());
  auto report = analyze(ts, trace, o.successes_only ? AftMode::SuccessesOnly : AftMode::Censored);
  if (o.json_out) write_text(*o.json_out, pretty(to_json(report)));
  if (o.csv_out) write_text(*o.csv_out, to_csv(report));
  os << to_text(report);
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::string kind;  // tau | belief
  std::optional<std::filesystem::path> config;
  std::filesystem::path transcripts;
  std::filesystem::path trace;
  std::vector<double> taus;
  std::vector<double> alphas;
  std::vector<std::string> thresholds;  // "none" or percentages
  bool successes_only = false;
  int parallelism = 1;
  std::optional<std::filesystem::path> json_out;
  std::optional<std::filesystem::path> csv_out;
};

inline double parse_threshold(const std::string& s) {
  if (s == "none" || s == "0") return 0.0;
  std::string v = s;
  if (!v.empty() && v.back() == '%') v.pop_back();
  try {
    return std::stod(v) / 100.0;
  } catch (const std::exception&) {
    throw UsageError("bad pruning threshold '" + s + "'");
  }
}

inline int cmd_sweep(const SweepOptions& o, std::ostream& os) {
  auto mode = o.successes_only ? AftMode::SuccessesOnly : AftMode::Censored;
  SweepReport report;
  if (o.kind == "tau") {
    if (o.taus.empty()) throw UsageError("empty tau grid");
    if (!o.config) throw UsageError("tau sweep needs --config for the index and embedder");
    auto world = World::build(load_manifest(*o.config));
    if (!world.matcher) throw DataError("manifest has no index; tau sweep needs one");
    auto ts = read_transcripts(o.transcripts);
    report = sweep_tau(ts, world.scoring_context(nullptr), o.taus, mode, o.parallelism);
  } else if (o.kind == "belief") {
    if (o.alphas.empty() || o.thresholds.empty()) throw UsageError("empty alpha or threshold grid");
    std::vector<BeliefPoint> grid;
    for (double a : o.alphas)
      for (const auto& t : o.thresholds) grid.push_back({a, parse_threshold(t)});
    auto ts = read_transcripts(o.transcripts);
    auto trace = read_ig_records(o.trace);
    report = sweep_belief(ts, trace, grid, mode, o.parallelism);
  } else {
    throw UsageError("sweep kind must be 'tau' or 'belief'");
  }
  if (o.json_out) write_text(*o.json_out, pretty(to_json(report)));
  if (o.csv_out) write_text(*o.csv_out, to_csv(report));
  os << to_text(report);
  return kOk;
}

// ---------------------------------------------------------------- score / replay

inline std::shared_ptr<const InterpreterAgent> manifest_interpreter(const World& w) {
  if (!w.manifest.agents.count("interpreter")) return nullptr;
  return std::make_shared<InterpreterAgent>(w.agent_config(AgentRole::Interpreter),
                                            w.backend("interpreter", w.manifest.config.seed));
}

inline std::vector<IGRecord> rescore(const World& w, const std::vector<Transcript>& ts) {
  auto ctx = w.scoring_context(manifest_interpreter(w));
  std::vector<IGRecord> out;
  for (const auto& t : ts) {
    auto trace = score_transcript(t, ctx);
    out.insert(out.end(), trace.begin(), trace.end());
  }
  return out;
}

/// Post hoc IG scoring of recorded transcripts.
inline int cmd_score(const std::filesystem::path& config, const std::filesystem::path& transcripts,
                     const std::filesystem::path& out, std::ostream& os) {
  auto world = World::build(load_manifest(config));
  auto ts = read_transcripts(transcripts);
  if (ts.empty()) throw DataError("no transcripts in " + transcripts.string());
  auto trace = rescore(world, ts);
  write_ig_records(trace, out);
  os << "scored " << trace.size() << " turns from " << ts.size() << " games into " << out.string() << "\n";
  return kOk;
}

/// Re-scores recorded transcripts and checks them against a recorded trace.
inline int cmd_replay(const std::filesystem::path& config, const std::filesystem::path& transcripts,
                      const std::filesystem::path& trace_path, std::ostream& os) {
  auto world = World::build(load_manifest(config));
  auto ts = read_transcripts(transcripts);
  auto recorded = read_ig_records(trace_path);
  auto replayed = rescore(world, ts);
  if (replayed == recorded) {
    os << "replay matches: " << replayed.size() << " records\n";
    return kOk;
  }
  std::size_t n = std::min(replayed.size(), recorded.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(replayed[i] == recorded[i])) {
      os << "first difference at record " << i + 1 << " (" << recorded[i].game_id << " turn " << recorded[i].turn
         << ")\n  recorded " << to_json(recorded[i]).dump() << "\n  replayed " << to_json(replayed[i]).dump()
         << "\n";
      return kData;
    }
  }
  os << "record counts differ: recorded " << recorded.size() << ", replayed " << replayed.size() << "\n";
  return kData;
}

// ---------------------------------------------------------------- serve

inline int cmd_serve(const std::filesystem::path& config, const std::optional<std::string>& listen,
                     const std::optional<std::filesystem::path>& flush_dir, std::ostream& os) {
  auto world = std::make_shared<World>(World::build(load_manifest(config)));
  GameService service(world);
  if (flush_dir) service.set_flush_dir(*flush_dir);
  auto [host, port] = listen ? parse_listen(*listen) : listen_address();
  HttpServer server(service);
  os << "listening on " << host << ":" << port << std::endl;
  server.run(host, port);
  return kOk;
}

// ---------------------------------------------------------------- mock fixtures

inline int cmd_mock_conceptnet(const std::filesystem::path& objects, const std::filesystem::path& out,
                               std::ostream& os) {
  auto table = mock::ObjectTable::load(objects);
  std::string s;
  for (const auto& row : mock::conceptnet_rows(table)) s += row + "\n";
  write_text(out, s);
  os << "wrote " << table.rows().size() << " objects to " << out.string() << "\n";
  return kOk;
}

}  // namespace gg::cli
