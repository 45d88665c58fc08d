#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "guessgame/core/text.hpp"
#include "guessgame/core/types.hpp"

namespace gg {

/// Anything that can assign one of the five question types.
class QuestionClassifier {
 public:
  virtual ~QuestionClassifier() = default;
  virtual QuestionType classify(std::string_view question) const = 0;
};

namespace taxonomy {

/// Question text with any "Guesser said:" marker removed, as canonical words.
inline std::vector<std::string> question_words(std::string_view question) {
  return text::words(text::strip_marker(question, "Guesser said:"));
}

inline const std::unordered_set<std::string>& category_nouns() {
  static const std::unordered_set<std::string> kNouns = {
      "instrument", "tool",      "appliance", "furniture", "vehicle",   "container",
      "device",     "utensil",   "weapon",    "toy",       "clothing",  "garment",
      "accessory",  "machine",   "electronic", "material", "animal",    "plant",
      "food",       "object",    "item",      "equipment", "gadget",    "decoration",
      "fixture",    "implement", "product",   "thing",     "apparel",   "vessel",
      "structure",  "substance", "artifact",  "household", "kitchenware", "tableware",
      "stationery", "jewelry",   "cookware",  "footwear",  "hardware"};
  return kNouns;
}

inline bool contains_phrase(const std::vector<std::string>& ws, std::initializer_list<std::string_view> phrase) {
  if (phrase.size() == 0 || ws.size() < phrase.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= ws.size(); ++i) {
    std::size_t k = 0;
    for (auto p : phrase) {
      if (ws[i + k] != p) break;
      ++k;
    }
    if (k == phrase.size()) return true;
  }
  return false;
}

inline bool has_any(const std::vector<std::string>& ws, const std::unordered_set<std::string>& lex) {
  return std::any_of(ws.begin(), ws.end(), [&](const std::string& w) { return lex.contains(w); });
}

struct ArticlePhrase {
  bool matched = false;
  std::vector<std::string> noun_phrase;
};

/// Matches "is it a/an X", "is the object a/an X" (also "could it be a X").
inline ArticlePhrase article_question(const std::vector<std::string>& ws) {
  ArticlePhrase out;
  if (ws.empty()) return out;
  std::size_t i = 0;
  if (ws[0] == "is" || ws[0] == "if") {
    i = 1;
  } else if ((ws[0] == "could" || ws[0] == "would" || ws[0] == "might") && ws.size() > 2 &&
             ws[2] == "be") {
    i = 1;
  } else {
    return out;
  }
  if (i >= ws.size()) return out;
  if (ws[i] == "it" || ws[i] == "this") {
    i += 1;
  } else if (i + 1 < ws.size() && ws[i] == "the" && (ws[i + 1] == "object" || ws[i + 1] == "item")) {
    i += 2;
  } else {
    return out;
  }
  if (i < ws.size() && ws[i] == "be") ++i;
  if (i < ws.size() && (ws[i] == "a" || ws[i] == "an")) {
    out.matched = true;
    out.noun_phrase.assign(ws.begin() + static_cast<std::ptrdiff_t>(i + 1), ws.end());
  }
  return out;
}

inline bool mentions_kind_of(const std::vector<std::string>& ws) {
  return contains_phrase(ws, {"type", "of"}) || contains_phrase(ws, {"kind", "of"}) ||
         contains_phrase(ws, {"sort", "of"}) || contains_phrase(ws, {"types", "of"}) ||
         contains_phrase(ws, {"kinds", "of"}) || has_any(ws, {"category", "categories", "class"});
}

inline bool is_category_noun_phrase(const std::vector<std::string>& np) {
  if (np.empty()) return false;
  const auto& nouns = category_nouns();
  // "a kitchen appliance", "a musical instrument": the head noun decides.
  auto head = np.back();
  if (head.size() > 1 && head.back() == 's') head.pop_back();
  return nouns.contains(np.back()) || nouns.contains(head) || nouns.contains(np.front());
}

/// True when the question commits to a specific object: the Direct pattern.
inline bool is_direct_guess(std::string_view question) {
  auto ws = question_words(question);
  auto ap = article_question(ws);
  if (!ap.matched || ap.noun_phrase.empty()) return false;
  if (mentions_kind_of(ap.noun_phrase)) return false;
  if (is_category_noun_phrase(ap.noun_phrase)) return false;
  return true;
}

}  // namespace taxonomy

/// Deterministic rule cascade: Direct, Category, Location, Function, Attribute.
inline QuestionType classify_type(std::string_view question) {
  using namespace taxonomy;
  auto ws = question_words(question);
  if (is_direct_guess(question)) return QuestionType::Direct;

  auto ap = article_question(ws);
  if (mentions_kind_of(ws) || (ap.matched && is_category_noun_phrase(ap.noun_phrase)))
    return QuestionType::Category;

  static const std::unordered_set<std::string> kLocation = {
      "where",   "found",   "located", "location", "indoors", "outdoors",  "inside",
      "outside", "bedroom", "kitchen", "bathroom", "garage",  "office",    "desk",
      "garden",  "yard",    "room",    "house",    "home",    "school",    "store",
      "shop",    "outdoor", "indoor",  "shelf",    "closet",  "drawer",    "basement",
      "attic",   "hospital", "street", "park",     "beach",   "farm",      "workshop",
      "classroom", "restaurant", "lives", "kept",  "stored",  "placed"};
  if (has_any(ws, kLocation) || contains_phrase(ws, {"living", "room"})) return QuestionType::Location;

  static const std::unordered_set<std::string> kFunction = {
      "purpose", "function", "functions", "use", "uses", "usage", "useful", "helps", "serve"};
  if (contains_phrase(ws, {"used", "for"}) || contains_phrase(ws, {"used", "to"}) ||
      contains_phrase(ws, {"used", "in"}) || contains_phrase(ws, {"used", "by"}) ||
      contains_phrase(ws, {"do", "with"}) || has_any(ws, kFunction) ||
      (ws.size() >= 2 && ws.back() == "for" && (ws[0] == "what")))
    return QuestionType::Function;

  return QuestionType::Attribute;
}

/// Closed iff the question opens with an auxiliary or copula.
inline QuestionFormat classify_format(std::string_view question) {
  static const std::unordered_set<std::string> kAux = {
      "is",    "are",   "was", "were", "do",  "does",   "did",
      "can",   "could", "would", "will", "has", "have", "should", "must"};
  auto ws = taxonomy::question_words(question);
  if (!ws.empty() && kAux.contains(ws.front())) return QuestionFormat::Closed;
  return QuestionFormat::Open;
}

class RuleBasedClassifier final : public QuestionClassifier {
 public:
  QuestionType classify(std::string_view question) const override { return classify_type(question); }
};

}  // namespace gg
