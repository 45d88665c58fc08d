#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "guessgame/core/errors.hpp"
#include "guessgame/core/types.hpp"
#include "json.hpp"

namespace gg {

using Json = nlohmann::ordered_json;

namespace detail {

template <typename Enum, std::size_t N>
Enum enum_from(const Json& j, const std::array<Enum, N>& values, std::string_view field) {
  auto s = j.get<std::string>();
  for (auto v : values)
    if (to_string(v) == s) return v;
  throw DataError("unknown value '" + s + "' for " + std::string(field));
}

inline constexpr std::array<QuestionFormat, 2> kFormats = {QuestionFormat::Open,
                                                          QuestionFormat::Closed};
inline constexpr std::array<TurnVerdict, 2> kVerdicts = {TurnVerdict::Continue,
                                                        TurnVerdict::Correct};
inline constexpr std::array<Outcome, 2> kOutcomes = {Outcome::Success, Outcome::Failure};

}  // namespace detail

inline Json to_json(const GameConfig& c) {
  Json types = Json::array();
  for (auto t : c.allowed_types.members()) types.push_back(std::string(to_string(t)));
  Json j;
  j["t_max"] = c.t_max;
  j["allowed_types"] = std::move(types);
  j["repeat_limit_k"] = c.repeat_limit_k ? Json(*c.repeat_limit_k) : Json(nullptr);
  j["forced_open"] = c.forced_open;
  j["temperature"] = c.temperature;
  j["interpreter_alpha"] = c.interpreter_alpha;
  j["prune_fraction"] = c.prune_fraction;
  j["epsilon"] = c.epsilon;
  j["tau"] = c.tau;
  j["seed"] = c.seed;
  j["seed_uniform_first_turn"] = c.seed_uniform_first_turn;
  return j;
}

/// Missing keys fall back to defaults so hand-written configs can stay short.
inline GameConfig game_config_from_json(const Json& j) {
  GameConfig c;
  if (!j.is_object()) throw DataError("config must be a JSON object");
  c.t_max = j.value("t_max", c.t_max);
  if (j.contains("allowed_types")) {
    QuestionTypeSet set;
    for (const auto& t : j.at("allowed_types")) {
      auto parsed = parse_question_type(t.get<std::string>());
      if (!parsed) throw DataError("unknown question type: " + t.get<std::string>());
      set.insert(*parsed);
    }
    c.allowed_types = set;
  }
  if (j.contains("repeat_limit_k") && !j.at("repeat_limit_k").is_null())
    c.repeat_limit_k = j.at("repeat_limit_k").get<int>();
  c.forced_open = j.value("forced_open", c.forced_open);
  c.temperature = j.value("temperature", c.temperature);
  c.interpreter_alpha = j.value("interpreter_alpha", c.interpreter_alpha);
  c.prune_fraction = j.value("prune_fraction", c.prune_fraction);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.tau = j.value("tau", c.tau);
  c.seed = j.value("seed", c.seed);
  c.seed_uniform_first_turn = j.value("seed_uniform_first_turn", c.seed_uniform_first_turn);
  return c;
}

inline Json to_json(const TurnRecord& t) {
  Json j;
  j["index"] = t.index;
  j["question"] = t.question;
  j["q_type"] = std::string(to_string(t.q_type));
  j["q_format"] = std::string(to_string(t.q_format));
  j["revision_count"] = t.revision_count;
  j["constraint_violation"] =
      t.constraint_violation ? Json(*t.constraint_violation) : Json(nullptr);
  j["answer"] = t.answer;
  j["is_direct_guess"] = t.is_direct_guess;
  j["verdict"] = std::string(to_string(t.verdict));
  return j;
}

inline TurnRecord turn_from_json(const Json& j) {
  TurnRecord t;
  t.index = j.at("index").get<int>();
  t.question = j.at("question").get<std::string>();
  auto type = parse_question_type(j.at("q_type").get<std::string>());
  if (!type) throw DataError("unknown q_type");
  t.q_type = *type;
  t.q_format = detail::enum_from(j.at("q_format"), detail::kFormats, "q_format");
  t.revision_count = j.at("revision_count").get<int>();
  if (!j.at("constraint_violation").is_null())
    t.constraint_violation = j.at("constraint_violation").get<std::string>();
  t.answer = j.at("answer").get<std::string>();
  t.is_direct_guess = j.at("is_direct_guess").get<bool>();
  t.verdict = detail::enum_from(j.at("verdict"), detail::kVerdicts, "verdict");
  return t;
}

inline Json to_json(const Transcript& tr) {
  Json turns = Json::array();
  for (const auto& t : tr.turns) turns.push_back(to_json(t));
  Json j;
  j["game_id"] = tr.game_id;
  j["secret_object"] = tr.secret_object;
  j["config"] = to_json(tr.config);
  j["turns"] = std::move(turns);
  j["outcome"] = std::string(to_string(tr.outcome));
  j["turn_count"] = tr.turn_count;
  if (tr.error) j["error"] = *tr.error;
  return j;
}

inline Transcript transcript_from_json(const Json& j) {
  Transcript tr;
  tr.game_id = j.at("game_id").get<std::string>();
  tr.secret_object = j.at("secret_object").get<std::string>();
  tr.config = game_config_from_json(j.at("config"));
  for (const auto& t : j.at("turns")) tr.turns.push_back(turn_from_json(t));
  tr.outcome = detail::enum_from(j.at("outcome"), detail::kOutcomes, "outcome");
  tr.turn_count = j.at("turn_count").get<int>();
  if (j.contains("error")) tr.error = j.at("error").get<std::string>();
  return tr;
}

inline Json to_json(const ConceptScore& c) { return Json::array({c.concept_name, c.score}); }

inline Json to_json(const IGRecord& r) {
  Json ev = Json::array();
  for (const auto& c : r.evidence) ev.push_back(to_json(c));
  Json j;
  j["game_id"] = r.game_id;
  j["turn"] = r.turn;
  j["bayes_ig"] = r.bayes_ig;
  j["entropy_ig"] = r.entropy_ig;
  j["candidates_before"] = r.candidates_before;
  j["candidates_after"] = r.candidates_after;
  j["belief_support"] = r.belief_support;
  j["prior_support"] = r.prior_support;
  j["bayes_skipped"] = r.bayes_skipped;
  j["entropy_skipped"] = r.entropy_skipped;
  j["evidence"] = std::move(ev);
  return j;
}

inline IGRecord ig_record_from_json(const Json& j) {
  IGRecord r;
  r.game_id = j.at("game_id").get<std::string>();
  r.turn = j.at("turn").get<int>();
  r.bayes_ig = j.at("bayes_ig").get<double>();
  r.entropy_ig = j.at("entropy_ig").get<double>();
  r.candidates_before = j.at("candidates_before").get<std::int64_t>();
  r.candidates_after = j.at("candidates_after").get<std::int64_t>();
  r.belief_support = j.at("belief_support").get<std::int64_t>();
  r.prior_support = j.value("prior_support", std::int64_t{0});
  r.bayes_skipped = j.value("bayes_skipped", false);
  r.entropy_skipped = j.value("entropy_skipped", false);
  if (j.contains("evidence")) {
    for (const auto& e : j.at("evidence"))
      r.evidence.push_back({e.at(0).get<std::string>(), e.at(1).get<double>()});
  }
  return r;
}

namespace detail {

template <typename T, typename Parse>
std::vector<T> parse_jsonl(std::istream& in, Parse parse) {
  std::vector<T> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      T value = parse(Json::parse(line));
      value.validate();
      out.push_back(std::move(value));
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
void write_jsonl(std::ostream& out, const std::vector<T>& items) {
  for (const auto& item : items) out << to_json(item).dump() << '\n';
}

inline std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

}  // namespace detail

inline std::vector<Transcript> parse_transcripts(std::istream& in) {
  return detail::parse_jsonl<Transcript>(in, transcript_from_json);
}
inline std::vector<IGRecord> parse_ig_records(std::istream& in) {
  return detail::parse_jsonl<IGRecord>(in, ig_record_from_json);
}

inline std::string transcripts_to_jsonl(const std::vector<Transcript>& ts) {
  std::ostringstream out;
  detail::write_jsonl(out, ts);
  return out.str();
}
inline std::string ig_records_to_jsonl(const std::vector<IGRecord>& rs) {
  std::ostringstream out;
  detail::write_jsonl(out, rs);
  return out.str();
}

inline void write_transcripts(const std::vector<Transcript>& ts, const std::filesystem::path& p) {
  auto out = detail::open_out(p);
  detail::write_jsonl(out, ts);
}
inline std::vector<Transcript> read_transcripts(const std::filesystem::path& p) {
  auto in = detail::open_in(p);
  return parse_transcripts(in);
}
inline void write_ig_records(const std::vector<IGRecord>& rs, const std::filesystem::path& p) {
  auto out = detail::open_out(p);
  detail::write_jsonl(out, rs);
}
inline std::vector<IGRecord> read_ig_records(const std::filesystem::path& p) {
  auto in = detail::open_in(p);
  return parse_ig_records(in);
}

}  // namespace gg
