#include <gtest/gtest.h>

#include <sstream>

#include "guessgame/taxonomy/classifier.hpp"
#include "guessgame/taxonomy/enumeration.hpp"
#include "guessgame/taxonomy/evaluation.hpp"

using namespace gg;

namespace {

const std::filesystem::path kFixtures = GG_FIXTURE_DIR;

std::vector<TurnRecord> turns_of(QuestionType type, std::initializer_list<const char*> qs) {
  std::vector<TurnRecord> out;
  int i = 0;
  for (const char* q : qs) {
    TurnRecord t;
    t.index = ++i;
    t.question = q;
    t.q_type = type;
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(ClassifyType, ExampleQuestions) {
  EXPECT_EQ(classify_type("Is it a knife?"), QuestionType::Direct);
  EXPECT_EQ(classify_type("Is it a type of tool?"), QuestionType::Category);
  EXPECT_EQ(classify_type("Is it found in the kitchen?"), QuestionType::Location);
  EXPECT_EQ(classify_type("Is it used for cutting?"), QuestionType::Function);
  EXPECT_EQ(classify_type("Is it made of metal?"), QuestionType::Attribute);
  EXPECT_EQ(classify_type("What color is it?"), QuestionType::Attribute);
}

TEST(ClassifyType, ExampleFixtureIsFullyCorrect) {
  auto labeled = load_labeled_questions(kFixtures / "example_questions.tsv");
  ASSERT_GE(labeled.size(), 15u);
  RuleBasedClassifier c;
  auto r = evaluate_classifier(labeled, c);
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(ClassifyType, AdversarialSetReported) {
  auto labeled = load_labeled_questions(kFixtures / "adversarial_questions.tsv");
  RuleBasedClassifier c;
  auto r = evaluate_classifier(labeled, c);
  EXPECT_EQ(r.n, static_cast<int>(labeled.size()));
  EXPECT_GE(r.accuracy, 0.5);
  int total = 0;
  for (const auto& row : r.confusion)
    for (int v : row) total += v;
  EXPECT_EQ(total, r.n);
}

TEST(ClassifyType, DirectTakesPrecedence) {
  // An object-naming question stays Direct whatever other cue words it carries.
  const std::vector<std::string> objects{"knife", "spoon", "pillow", "toaster", "hammer"};
  const std::vector<std::string> tails{"", " used for cutting", " found in the kitchen", " made of metal"};
  for (const auto& o : objects)
    for (const auto& t : tails) {
      std::string q = "Is it a " + o + t + "?";
      EXPECT_EQ(classify_type(q), QuestionType::Direct) << q;
    }
}

TEST(ClassifyFormat, AuxiliaryOpensClosedQuestion) {
  EXPECT_EQ(classify_format("Is it red?"), QuestionFormat::Closed);
  EXPECT_EQ(classify_format("Can you eat it?"), QuestionFormat::Closed);
  EXPECT_EQ(classify_format("What is it made of?"), QuestionFormat::Open);
  EXPECT_EQ(classify_format("Where is it found?"), QuestionFormat::Open);
}

TEST(Enumeration, PlaceListing) {
  auto ts = turns_of(QuestionType::Location, {"Is it in Ohio?", "Is it in New York?", "Is it in Germany?"});
  auto s = detect_enumeration(ts);
  EXPECT_EQ(s.count, 2);
  EXPECT_NEAR(s.ratio, 2.0 / 3.0, 1e-15);
}

TEST(Enumeration, IdenticalQuestions) {
  auto ts = turns_of(QuestionType::Attribute,
                     {"Is it red?", "Is it red?", "Is it red?", "Is it red?", "Is it red?"});
  EXPECT_EQ(detect_enumeration(ts).count, 4);
}

TEST(Enumeration, TypeChangeBreaksRun) {
  auto ts = turns_of(QuestionType::Attribute, {"Is it red?", "Is it red?"});
  ts[1].q_type = QuestionType::Location;
  EXPECT_EQ(detect_enumeration(ts).count, 0);
  EXPECT_EQ(detect_enumeration(std::vector<TurnRecord>{}).ratio, 0.0);
}

TEST(Evaluation, ToyConfusion) {
  using Q = QuestionType;
  std::vector<Q> gold{Q::Attribute, Q::Attribute, Q::Function, Q::Function,
                      Q::Location,  Q::Location,  Q::Direct,   Q::Category};
  std::vector<Q> pred{Q::Attribute, Q::Function,  Q::Function, Q::Attribute,
                      Q::Location,  Q::Location,  Q::Direct,   Q::Attribute};
  auto r = evaluate_predictions(gold, pred);
  EXPECT_NEAR(r.accuracy, 5.0 / 8.0, 1e-15);
  EXPECT_EQ(r.confusion[static_cast<int>(Q::Attribute)][static_cast<int>(Q::Function)], 1);
  EXPECT_EQ(r.n, 8);
}

TEST(Evaluation, LengthMismatchRejected) {
  EXPECT_THROW(evaluate_predictions({QuestionType::Direct}, {}), DataError);
}

TEST(Evaluation, MalformedFixtureLine) {
  std::istringstream in("Is it red?\tAttribute\nno tab here\n");
  EXPECT_THROW(parse_labeled_questions(in), DataError);
}
