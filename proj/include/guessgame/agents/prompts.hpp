#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "guessgame/core/errors.hpp"

namespace gg {

enum class AgentRole { Guesser, Oracle, Checker, Interpreter };

inline constexpr std::string_view to_string(AgentRole r) {
  switch (r) {
    case AgentRole::Guesser: return "Guesser";
    case AgentRole::Oracle: return "Oracle";
    case AgentRole::Checker: return "Checker";
    case AgentRole::Interpreter: return "Interpreter";
  }
  return "?";
}

namespace prompts {

// Templates are verbatim, including spacing and trailing blanks.

inline constexpr std::string_view kGuesserAnyQuestion =
    "You are named Guesser. You are trying to guess what physical object or physical material Oracle is "
    "thinking of. You will ask questions to get more information about the object. Open ended question are "
    "questions that have a large variety of answers. A question is not open ended if the only answers to it "
    "are yes or no. An example of an open ended question is: What material is the object made of? An example "
    "of a not open ended question is: Is the material the object is made of copper?  You may ask open or not "
    "open questions. You can make direct guesses on what the object is. When you believe you have enough "
    "information about the object you will guess what it is. Your guessing will be informed by your prior "
    "guesses. Do not ask the question: What is the object? Do not explain your reasoning in your guess, only "
    "say your question. You will start each message with Guesser said: . If you guess wrong you will ask more "
    "questions about the object until you have enough information to guess again.";

inline constexpr std::string_view kGuesserOpenQuestion =
    "You are named Guesser. You are trying to guess what physical object or physical material Oracle is "
    "thinking of. You will ask open ended questions to get more information about the object. Open ended "
    "question are questions that have a large variety of answers. A question is not open ended if the only "
    "answers to it are yes or no. An example of an open ended question is: What material is the object made "
    "of? An example of a not open ended question is: Is the material the object is made of copper? You can "
    "make direct guesses on what the object is. When you believe you have enough information about the object "
    "you will guess what it is. Your guessing will be informed by your prior guesses. Do not explain your "
    "reasoning in your guess, only say your question. You will start each message with Guesser said: . If you "
    "guess wrong you will ask more questions about the object until you have enough information to guess "
    "again. ";

inline constexpr std::string_view kOraclePrefix =
    "You are named Oracle. Guesser is trying to guess what physical object you are thinking of. When Guesser "
    "correctly guesses the object, you will only return Correct. If Guesser asks: is it a type of object, and "
    "the object is the same as your object then this is also a correct guess. You can not make any guesses or "
    "ask any questions. You start each response with Oracle said: . The object you are thinking of is a ";

inline constexpr std::string_view kChecker =
    "You are an expert annotator that is categorizing the questions asked by Guesser in an object guessing "
    "game. There are 5 types of questions. The first type are Attribute questions, these involve the physical "
    "attributes of the physical object. Examples of Attribute questions are: Is the object made of metal? What "
    "color is the object? What shape is the object? The second type of questions are Function questions, these "
    "involve the function of the physical object. Example of Function questions are: Is the object used for "
    "communication? Is the object used for building? Is the object used for eating food? The third type of "
    "questions are Location questions, these ask about where a physical object is located. Examples of Location "
    "questions are: Is the object in the bedroom? Is the object located inside or outside? Is the object on the "
    "desk? The fourth type of questions are Category questions, these ask if the physical object belong to "
    "certain category of objects. Examples of Category questions are: Is the object a type of car? If the "
    "object a type of furniture? The fifth type of questions are Direct questions, these are questions that "
    "directly guess what the object is. Examples of Direct questions are: Is the object a phone? Is the object "
    "a bed? Is the object a knife? After being given Guesser's question return only what type of question it "
    "is. Return only one of the following 5 words: Attribute, Function, Location, Category, or Direct, based on "
    "what type of question Guesser is asking. Do not explain your reasoning or your thinking. What type of "
    "question is Guesser asking? ";

inline constexpr std::string_view kInterpreter =
    "You are named the Interpreter. Your task is to generate a comma-separated relevance-scored list of "
    "candidate concepts based on the Guesser's questions and the Oracle's answers to that question. Candidate "
    "concepts are inferences you can make about the physical or functional attributes or location or category "
    "of the object that the Oracle is answering about.\n"
    "Rules\n"
    "1. Every concept and its corresponding score must be separated by a colon and each concept-score pair must "
    "followed by a comma\n"
    "2. Each score is a float in (-1, 1). 1 = strongly positive correlation, -1 = strongly negative "
    "correlation.\n"
    "3. Do not output any additional text, explanation, punctuation (except commas), or commentary, metadata "
    "tags, special tokens, statements, explanations, additional works, questions or guesses.";

}  // namespace prompts

struct PromptParams {
  std::optional<std::string> object;
  bool forced_open = false;
};

inline std::string render_prompt(AgentRole role, const PromptParams& params = {}) {
  switch (role) {
    case AgentRole::Guesser:
      return std::string(params.forced_open ? prompts::kGuesserOpenQuestion : prompts::kGuesserAnyQuestion);
    case AgentRole::Oracle:
      if (!params.object || params.object->empty()) throw DataError("Oracle prompt requires an object");
      return std::string(prompts::kOraclePrefix) + *params.object;
    case AgentRole::Checker:
      return std::string(prompts::kChecker);
    case AgentRole::Interpreter:
      return std::string(prompts::kInterpreter);
  }
  throw DataError("unknown agent role");
}

}  // namespace gg
