#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "guessgame/core/errors.hpp"
#include "guessgame/core/json_io.hpp"
#include "guessgame/core/text.hpp"
#include "guessgame/core/types.hpp"
#include "guessgame/taxonomy/classifier.hpp"

namespace gg {

struct LabeledQuestion {
  std::string question;
  QuestionType gold;
};

struct ClassMetrics {
  QuestionType type;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  int support = 0;
};

struct ClassifierReport {
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  std::vector<ClassMetrics> per_class;  // classes present in gold or predictions
  // confusion[gold][predicted], indexed by QuestionType.
  std::array<std::array<int, 5>, 5> confusion{};
  int n = 0;
};

/// Accuracy, macro P/R/F1 over labels seen in gold or predictions, and the
/// confusion matrix. Zero divisions count as 0.
inline ClassifierReport evaluate_predictions(const std::vector<QuestionType>& gold,
                                             const std::vector<QuestionType>& predicted) {
  if (gold.empty()) throw DataError("evaluate_classifier needs at least one labeled question");
  if (gold.size() != predicted.size()) throw DataError("gold/predicted size mismatch");
  ClassifierReport r;
  r.n = static_cast<int>(gold.size());
  int correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++r.confusion[static_cast<int>(gold[i])][static_cast<int>(predicted[i])];
    if (gold[i] == predicted[i]) ++correct;
  }
  r.accuracy = static_cast<double>(correct) / r.n;
  for (auto t : kAllQuestionTypes) {
    int k = static_cast<int>(t);
    int tp = r.confusion[k][k];
    int gold_n = 0, pred_n = 0;
    for (int j = 0; j < 5; ++j) {
      gold_n += r.confusion[k][j];
      pred_n += r.confusion[j][k];
    }
    if (gold_n == 0 && pred_n == 0) continue;
    ClassMetrics m{t};
    m.support = gold_n;
    m.precision = pred_n ? static_cast<double>(tp) / pred_n : 0.0;
    m.recall = gold_n ? static_cast<double>(tp) / gold_n : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    r.per_class.push_back(m);
  }
  for (const auto& m : r.per_class) {
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  auto c = static_cast<double>(r.per_class.size());
  r.macro_precision /= c;
  r.macro_recall /= c;
  r.macro_f1 /= c;
  return r;
}

inline ClassifierReport evaluate_classifier(const std::vector<LabeledQuestion>& labeled,
                                            const QuestionClassifier& classifier) {
  std::vector<QuestionType> gold, pred;
  for (const auto& l : labeled) {
    gold.push_back(l.gold);
    pred.push_back(classifier.classify(l.question));
  }
  return evaluate_predictions(gold, pred);
}

/// TSV "question \t label"; unknown labels are errors naming the line.
inline std::vector<LabeledQuestion> parse_labeled_questions(std::istream& in) {
  std::vector<LabeledQuestion> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw DataError("line " + std::to_string(line_no) + ": expected 'question<TAB>label'");
    auto label = std::string(text::trim(std::string_view(line).substr(tab + 1)));
    auto type = parse_question_type(label);
    if (!type)
      throw DataError("line " + std::to_string(line_no) + ": unknown gold label '" + label + "'");
    out.push_back({std::string(text::trim(std::string_view(line).substr(0, tab))), *type});
  }
  return out;
}

inline std::vector<LabeledQuestion> load_labeled_questions(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  return parse_labeled_questions(in);
}

inline Json to_json(const ClassifierReport& r) {
  Json j;
  j["n"] = r.n;
  j["accuracy"] = r.accuracy;
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["macro_f1"] = r.macro_f1;
  Json classes = Json::array();
  for (const auto& m : r.per_class) {
    classes.push_back({{"type", std::string(to_string(m.type))},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support}});
  }
  j["per_class"] = std::move(classes);
  Json conf = Json::object();
  for (auto g : kAllQuestionTypes) {
    Json row = Json::object();
    for (auto p : kAllQuestionTypes)
      row[std::string(to_string(p))] = r.confusion[static_cast<int>(g)][static_cast<int>(p)];
    conf[std::string(to_string(g))] = std::move(row);
  }
  j["confusion"] = std::move(conf);
  return j;
}

}  // namespace gg
