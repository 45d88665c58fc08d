// gg: batch runs, ConceptNet ingest, analysis, sweeps and the game server.

#include <iostream>

#include "CLI11.hpp"
#include "guessgame/cli/commands.hpp"

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw gg::cli::UsageError("not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace gg::cli;
  CLI::App app{"Twenty-questions style guessing games between language-model agents"};
  app.require_subcommand(1);

  RunOptions run;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "Play one game per corpus object");
  run_cmd->add_option("-c,--config", run.config, "Run manifest (JSON)")->required();
  run_cmd->add_option("-j,--parallelism", run.parallelism, "Concurrent games")->check(CLI::PositiveNumber);
  auto* sample_opt = run_cmd->add_option("--sample", sample, "Play a seeded sample of N objects");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the manifest seed");
  auto* out_opt = run_cmd->add_option("-o,--out", run_out, "Output directory");

  std::string dump, index_out, whitelist;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build an assertion index from a ConceptNet dump");
  ingest_cmd->add_option("--dump", dump, "Assertion dump (TSV, optionally gzipped)")->required();
  ingest_cmd->add_option("-o,--out", index_out, "Index file to write")->required();
  ingest_cmd->add_option("--whitelist", whitelist, "Comma-separated relations to keep");

  AnalyzeOptions an;
  std::string an_json, an_csv;
  auto* analyze_cmd = app.add_subcommand("analyze", "Summary, IG by type and the IG-vs-length analyses");
  analyze_cmd->add_option("--transcripts", an.transcripts, "Transcripts (JSONL)")->required();
  analyze_cmd->add_option("--trace", an.trace, "IG trace (JSONL)")->required();
  analyze_cmd->add_flag("--successes-only", an.successes_only, "Fit the AFT on successful games only");
  auto* an_json_opt = analyze_cmd->add_option("--json", an_json, "Write the report as JSON");
  auto* an_csv_opt = analyze_cmd->add_option("--csv", an_csv, "Write the report as CSV");

  SweepOptions sw;
  std::string sw_config, taus, alphas, thresholds, sw_json, sw_csv;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sensitivity sweeps over tau or belief parameters");
  sweep_cmd->add_option("--kind", sw.kind)->required()->check(CLI::IsMember({"tau", "belief"}));
  auto* sw_config_opt = sweep_cmd->add_option("-c,--config", sw_config, "Run manifest (needed for tau)");
  sweep_cmd->add_option("--transcripts", sw.transcripts, "Transcripts (JSONL)")->required();
  sweep_cmd->add_option("--trace", sw.trace, "IG trace (needed for belief)");
  sweep_cmd->add_option("--taus", taus, "Comma-separated tau values");
  sweep_cmd->add_option("--alphas", alphas, "Comma-separated alpha values");
  sweep_cmd->add_option("--thresholds", thresholds, "Comma-separated pruning thresholds (e.g. none,35%)");
  sweep_cmd->add_flag("--successes-only", sw.successes_only, "Fit the AFT on successful games only");
  sweep_cmd->add_option("-j,--parallelism", sw.parallelism, "Concurrent grid points")->check(CLI::PositiveNumber);
  auto* sw_json_opt = sweep_cmd->add_option("--json", sw_json, "Write the sweep as JSON");
  auto* sw_csv_opt = sweep_cmd->add_option("--csv", sw_csv, "Write the sweep as CSV");

  std::string sc_config, sc_transcripts, sc_out, sc_trace;
  auto* score_cmd = app.add_subcommand("score", "Score recorded transcripts into an IG trace");
  score_cmd->add_option("-c,--config", sc_config, "Run manifest (JSON)")->required();
  score_cmd->add_option("--transcripts", sc_transcripts, "Transcripts (JSONL)")->required();
  score_cmd->add_option("-o,--out", sc_out, "IG trace to write")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Re-score transcripts and compare with a recorded trace");
  replay_cmd->add_option("-c,--config", sc_config, "Run manifest (JSON)")->required();
  replay_cmd->add_option("--transcripts", sc_transcripts, "Transcripts (JSONL)")->required();
  replay_cmd->add_option("--trace", sc_trace, "Recorded IG trace (JSONL)")->required();

  std::string sv_config, listen, flush_dir;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP game server");
  serve_cmd->add_option("-c,--config", sv_config, "Run manifest (JSON)")->required();
  auto* listen_opt = serve_cmd->add_option("--listen", listen, "host:port (default GG_LISTEN or 127.0.0.1:8080)");
  auto* flush_opt = serve_cmd->add_option("--flush-dir", flush_dir, "Append finished games here");

  std::string mock_objects, mock_out;
  auto* mock_cmd = app.add_subcommand("mock-conceptnet", "Write a ConceptNet-style dump for a mock object table");
  mock_cmd->add_option("--objects", mock_objects, "Mock object table (TSV)")->required();
  mock_cmd->add_option("-o,--out", mock_out, "Dump to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) {
      if (*sample_opt) run.sample = sample;
      if (*seed_opt) run.seed = seed;
      if (*out_opt) run.out = run_out;
      return cmd_run(run, std::cout);
    }
    if (*ingest_cmd) return cmd_ingest(dump, index_out, split_list(whitelist), std::cout);
    if (*analyze_cmd) {
      if (*an_json_opt) an.json_out = an_json;
      if (*an_csv_opt) an.csv_out = an_csv;
      return cmd_analyze(an, std::cout);
    }
    if (*sweep_cmd) {
      if (*sw_config_opt) sw.config = sw_config;
      if (*sw_json_opt) sw.json_out = sw_json;
      if (*sw_csv_opt) sw.csv_out = sw_csv;
      sw.taus = parse_list(taus);
      sw.alphas = parse_list(alphas);
      sw.thresholds = split_list(thresholds);
      if (sw.kind == "belief" && sw.trace.empty()) throw UsageError("belief sweep needs --trace");
      return cmd_sweep(sw, std::cout);
    }
    if (*score_cmd) return cmd_score(sc_config, sc_transcripts, sc_out, std::cout);
    if (*replay_cmd) return cmd_replay(sc_config, sc_transcripts, sc_trace, std::cout);
    if (*serve_cmd) {
      std::optional<std::string> l;
      std::optional<std::filesystem::path> f;
      if (*listen_opt) l = listen;
      if (*flush_opt) f = flush_dir;
      return cmd_serve(sv_config, l, f, std::cout);
    }
    if (*mock_cmd) return cmd_mock_conceptnet(mock_objects, mock_out, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const gg::InvariantError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const gg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
