#pragma once

// Simulated agents for offline runs: an Oracle, Guesser and Interpreter that
// answer from a small table of object properties. All replies are pure
// functions of the request (plus a seed), so runs are reproducible.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "guessgame/agents/agents.hpp"
#include "guessgame/agents/backend.hpp"
#include "guessgame/agents/prompts.hpp"
#include "guessgame/core/errors.hpp"
#include "guessgame/core/text.hpp"
#include "guessgame/taxonomy/classifier.hpp"

namespace gg::mock {

enum class Slot { Material, Color, Shape, Function, Location, Category };

inline constexpr std::array<Slot, 6> kSlots = {Slot::Material, Slot::Color,    Slot::Shape,
                                               Slot::Function, Slot::Location, Slot::Category};

struct MockObject {
  std::string name;
  std::string material;
  std::string color;
  std::string shape;
  std::string function;
  std::string location;
  std::string category;

  const std::string& get(Slot s) const {
    switch (s) {
      case Slot::Material: return material;
      case Slot::Color: return color;
      case Slot::Shape: return shape;
      case Slot::Function: return function;
      case Slot::Location: return location;
      case Slot::Category: return category;
    }
    return name;
  }
};

/// TSV with header: name material color shape function location category.
class ObjectTable {
 public:
  static ObjectTable parse(std::istream& in) {
    ObjectTable t;
    std::string line;
    int lineno = 0;
    bool header = true;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (text::trim(line).empty() || line.front() == '#') continue;
      auto f = text::split(line, '\t');
      if (f.size() != 7) throw DataError("objects table line " + std::to_string(lineno) + ": expected 7 fields");
      if (header) {
        header = false;
        if (text::normalize(f[0]) == "name") continue;
      }
      for (auto& x : f) x = text::normalize(x);
      t.rows_.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6]});
    }
    if (t.rows_.empty()) throw DataError("objects table is empty");
    return t;
  }

  static ObjectTable load(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open objects table " + p.string());
    return parse(in);
  }

  const std::vector<MockObject>& rows() const noexcept { return rows_; }

  const MockObject* find(std::string_view name) const {
    auto n = text::normalize(name);
    for (const auto& r : rows_)
      if (r.name == n) return &r;
    return nullptr;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& r : rows_) out.push_back(r.name);
    return out;
  }

 private:
  std::vector<MockObject> rows_;
};

/// ConceptNet-style rows describing the table, one per (object, property).
inline std::vector<std::string> conceptnet_rows(const ObjectTable& table) {
  auto node = [](const std::string& s) {
    std::string out = s;
    std::replace(out.begin(), out.end(), ' ', '_');
    return "/c/en/" + out;
  };
  std::vector<std::string> out;
  for (const auto& r : table.rows()) {
    const std::pair<const char*, Slot> rels[] = {{"IsA", Slot::Category},       {"MadeOf", Slot::Material},
                                                 {"UsedFor", Slot::Function},   {"AtLocation", Slot::Location},
                                                 {"HasProperty", Slot::Color},  {"HasProperty", Slot::Shape}};
    for (const auto& [rel, slot] : rels) {
      auto start = node(r.name) + "/n";
      auto end = node(r.get(slot));
      out.push_back("/a/[/r/" + std::string(rel) + "/," + start + "/," + end + "/]\t/r/" + rel + "\t" + start +
                    "\t" + end + "\t{\"weight\": 1.0}");
    }
  }
  return out;
}

namespace detail {

inline bool contains_words(std::string_view haystack, std::string_view needle) {
  auto h = " " + text::canonical_words(haystack) + " ";
  auto n = " " + text::canonical_words(needle) + " ";
  return h.find(n) != std::string::npos;
}

inline std::optional<Slot> slot_of(std::string_view question, QuestionType type) {
  auto ws = taxonomy::question_words(question);
  auto has = [&](std::string_view w) { return std::find(ws.begin(), ws.end(), w) != ws.end(); };
  switch (type) {
    case QuestionType::Function: return Slot::Function;
    case QuestionType::Location: return Slot::Location;
    case QuestionType::Category: return Slot::Category;
    default: break;
  }
  if (has("material") || has("made")) return Slot::Material;
  if (has("color") || has("colour")) return Slot::Color;
  if (has("shape")) return Slot::Shape;
  return std::nullopt;
}

inline std::string phrase(Slot s, const std::string& v) {
  switch (s) {
    case Slot::Material: return "made of " + v;
    case Slot::Color: return v;
    case Slot::Shape: return v + " in shape";
    case Slot::Function: return "used for " + v;
    case Slot::Location: return "usually found in the " + v;
    case Slot::Category: return "a kind of " + v;
  }
  return v;
}

}  // namespace detail

/// The Oracle's reply (marker included) for `question` about `secret`.
inline std::string oracle_answer(const MockObject& secret, std::string_view question) {
  auto type = classify_type(question);
  if (type == QuestionType::Direct) {
    auto ap = taxonomy::article_question(taxonomy::question_words(question));
    std::string guess;
    for (const auto& w : ap.noun_phrase) guess += (guess.empty() ? "" : " ") + w;
    if (guess == text::canonical_words(secret.name)) return "Oracle said: Correct.";
    return "Oracle said: No, it is not a " + guess + ".";
  }
  auto slot = detail::slot_of(question, type);
  if (!slot) return "Oracle said: I cannot answer that.";
  const auto& value = secret.get(*slot);
  if (classify_format(question) == QuestionFormat::Closed) {
    if (detail::contains_words(question, value)) return "Oracle said: Yes, it is " + detail::phrase(*slot, value) + ".";
    return "Oracle said: No.";
  }
  return "Oracle said: It is " + detail::phrase(*slot, value) + ".";
}

/// Question/answer pairs recovered from a Guesser dialogue. Rejected
/// questions and the opening line are skipped.
inline std::vector<std::pair<std::string, std::string>> exchanges(const std::vector<ChatMessage>& messages) {
  std::vector<std::pair<std::string, std::string>> out;
  std::optional<std::string> pending;
  for (const auto& m : messages) {
    if (m.role == "assistant") {
      pending = std::string(text::strip_marker(m.content, kGuesserMarker));
    } else if (m.role == "user" && pending && text::starts_with_ci(text::trim(m.content), kOracleMarker)) {
      out.emplace_back(*pending, std::string(text::strip_marker(m.content, kOracleMarker)));
      pending.reset();
    } else if (m.role == "user") {
      pending.reset();
    }
  }
  return out;
}

/// Oracle backend. The secret is read back from the rendered system prompt.
inline std::shared_ptr<ChatBackend> oracle_backend(std::shared_ptr<const ObjectTable> table) {
  return std::make_shared<FunctionBackend>([table](const ChatRequest& req) {
    const auto& system = req.messages.at(0).content;
    if (!system.starts_with(prompts::kOraclePrefix)) throw DataError("mock oracle: unexpected system prompt");
    auto secret_name = system.substr(prompts::kOraclePrefix.size());
    const auto* secret = table->find(secret_name);
    if (!secret) throw DataError("mock oracle: object not in table: " + secret_name);
    return oracle_answer(*secret, text::strip_marker(req.messages.back().content, kGuesserMarker));
  });
}

enum class GuesserProfile { Careful, Closed, Stubborn };

inline std::string_view to_string(GuesserProfile p) {
  switch (p) {
    case GuesserProfile::Careful: return "careful";
    case GuesserProfile::Closed: return "closed";
    case GuesserProfile::Stubborn: return "stubborn";
  }
  return "?";
}

/// Picks a profile from a game seed: mostly careful or closed, sometimes stubborn.
inline GuesserProfile profile_for(std::uint64_t seed) {
  switch (std::mt19937_64(seed)() % 5) {
    case 0:
    case 1: return GuesserProfile::Careful;
    case 2:
    case 3: return GuesserProfile::Closed;
    default: return GuesserProfile::Stubborn;
  }
}

namespace detail {

inline std::string open_question(Slot s) {
  switch (s) {
    case Slot::Material: return "What material is the object made of?";
    case Slot::Color: return "What color is the object?";
    case Slot::Shape: return "What shape is the object?";
    case Slot::Function: return "What is the object used for?";
    case Slot::Location: return "Where is the object usually found?";
    case Slot::Category: return "What kind of object is it?";
  }
  return "";
}

inline std::string closed_question(Slot s, const std::string& v) {
  switch (s) {
    case Slot::Material: return "Is the object made of " + v + "?";
    case Slot::Color: return "Is the color of the object " + v + "?";
    case Slot::Shape: return "Is the object " + v + " in shape?";
    case Slot::Function: return "Is the object used for " + v + "?";
    case Slot::Location: return "Is the object found in the " + v + "?";
    case Slot::Category: return "Is the object a kind of " + v + "?";
  }
  return "";
}

/// Uniform index in [0, n) from raw engine output; avoids the
/// implementation-defined std distributions so runs match across platforms.
inline std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline bool chance(std::mt19937_64& rng, int percent) { return static_cast<int>(rng() % 100) < percent; }

}  // namespace detail

/// Guesser that tracks the objects consistent with every answer so far and
/// asks about properties it has not pinned down yet.
inline std::string guesser_reply(const ObjectTable& table, GuesserProfile profile, std::uint64_t seed,
                                 const ChatRequest& req) {
  using namespace detail;
  bool forced_open = req.messages.at(0).content == prompts::kGuesserOpenQuestion;
  std::string transcript_text;
  for (const auto& m : req.messages) transcript_text += m.role + ":" + m.content + "\n";
  std::mt19937_64 rng(seed ^ text::fnv1a64(transcript_text));

  auto history = exchanges(req.messages);
  std::vector<const MockObject*> candidates;
  for (const auto& row : table.rows()) {
    bool ok = std::all_of(history.begin(), history.end(), [&](const auto& qa) {
      return text::strip_marker(oracle_answer(row, qa.first), kOracleMarker) == qa.second;
    });
    if (ok) candidates.push_back(&row);
  }
  if (candidates.empty())
    for (const auto& row : table.rows()) candidates.push_back(&row);

  auto say = [](const std::string& q) { return std::string(kGuesserMarker) + " " + q; };
  if (history.empty() && chance(rng, 15)) return say("What is the object?");

  if (profile == GuesserProfile::Stubborn) {
    // Never uses the answers: random closed probes and random guesses.
    const auto& row = table.rows()[pick(rng, table.rows().size())];
    if (chance(rng, 25)) return say("Is it a " + row.name + "?");
    auto slot = kSlots[pick(rng, kSlots.size())];
    return say(forced_open ? open_question(slot) : closed_question(slot, row.get(slot)));
  }

  if (candidates.size() == 1 || (candidates.size() <= 3 && chance(rng, 50)))
    return say("Is it a " + candidates[pick(rng, candidates.size())]->name + "?");

  std::vector<Slot> informative;
  for (auto s : kSlots) {
    const auto& v0 = candidates.front()->get(s);
    if (std::any_of(candidates.begin(), candidates.end(), [&](const MockObject* c) { return c->get(s) != v0; }))
      informative.push_back(s);
  }
  if (informative.empty()) return say("Is it a " + candidates[pick(rng, candidates.size())]->name + "?");
  auto slot = informative[pick(rng, informative.size())];
  bool ask_open = forced_open || profile == GuesserProfile::Careful ? !chance(rng, 10) : chance(rng, 20);
  if (ask_open || forced_open) return say(open_question(slot));
  return say(closed_question(slot, candidates[pick(rng, candidates.size())]->get(slot)));
}

inline std::shared_ptr<ChatBackend> guesser_backend(std::shared_ptr<const ObjectTable> table, GuesserProfile profile,
                                                    std::uint64_t seed) {
  return std::make_shared<FunctionBackend>(
      [table, profile, seed](const ChatRequest& req) { return guesser_reply(*table, profile, seed, req); });
}

/// Guesser that ignores the game entirely and emits an arbitrary mix of
/// questions, guesses, trivializing and malformed text. Used for fuzzing.
inline std::shared_ptr<ChatBackend> chaos_guesser_backend(std::shared_ptr<const ObjectTable> table,
                                                          std::uint64_t seed) {
  struct State {
    std::mutex mu;
    std::mt19937_64 rng;
  };
  auto state = std::make_shared<State>();
  state->rng.seed(seed);
  return std::make_shared<FunctionBackend>([table, state](const ChatRequest&) {
    using namespace detail;
    std::lock_guard lock(state->mu);
    auto& rng = state->rng;
    const auto& row = table->rows()[pick(rng, table->rows().size())];
    auto slot = kSlots[pick(rng, kSlots.size())];
    std::string q;
    switch (pick(rng, 9)) {
      case 0: q = open_question(slot); break;
      case 1: q = closed_question(slot, row.get(slot)); break;
      case 2: q = "Is it a " + row.name + "?"; break;
      case 3: q = "What is the object?"; break;
      case 4: q = "Is the object a type of " + row.category + "?"; break;
      case 5: q = "Where would I find it?"; break;
      case 6: q = "Does it " + row.function + "?"; break;
      case 7: q = "hmm"; break;
      default: q = "Is it " + row.color + " or " + row.material + "?"; break;
    }
    return chance(rng, 50) ? std::string(kGuesserMarker) + " " + q : q;
  });
}

/// Interpreter: one concept per content word of the answer, scored
/// 0.9, 0.8, ... and negated when the answer opens with "No".
inline std::string interpreter_reply(const ChatRequest& req) {
  const auto& user = req.messages.back().content;
  auto pos = user.find("Oracle said:");
  std::string_view answer = pos == std::string::npos ? std::string_view(user) : std::string_view(user).substr(pos + 12);
  auto ws = text::words(answer);
  bool negative = !ws.empty() && ws.front() == "no";
  static const std::unordered_set<std::string> kFiller = {"made", "used", "found", "usually", "kind",
                                                           "shape", "cannot", "answer"};
  std::vector<std::string> concepts;
  for (const auto& w : text::content_words(answer)) {
    if (kFiller.contains(w) || std::find(concepts.begin(), concepts.end(), w) != concepts.end()) continue;
    concepts.push_back(w);
  }
  if (concepts.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < concepts.size() && i < 5; ++i) {
    double s = 0.9 - 0.1 * static_cast<double>(i);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", negative ? -s : s);
    out += (out.empty() ? "" : ", ") + concepts[i] + ":" + buf;
  }
  return out;
}

inline std::shared_ptr<ChatBackend> interpreter_backend() {
  return std::make_shared<FunctionBackend>([](const ChatRequest& req) { return interpreter_reply(req); });
}

}  // namespace gg::mock
