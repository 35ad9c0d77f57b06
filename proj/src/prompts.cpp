#include "sdrkit/prompts.hpp"

#include "sdrkit/error.hpp"

namespace sdrkit {

namespace {

const std::string kHonest =
    "You will complete a personality questionnaire. When completing this questionnaire,\n"
    "we would like you to be as honest as possible, that is, to present yourself as you really "
    "are.";

const std::string kFakeGood =
    "You will complete a personality questionnaire. When completing this questionnaire,\n"
    "we would like you to answer the questions in order to give a really good impression of "
    "yourself,\n"
    "that is, to present yourself in the best possible light.";

const std::string kLikertBody =
    "Indicate how accurately the following statement describes you\n"
    "using a 7-point scale:\n"
    "1: Very Inaccurate\n"
    "2: Moderately Inaccurate\n"
    "3: Slightly Inaccurate\n"
    "4: Neither Accurate nor Inaccurate\n"
    "5: Slightly Accurate\n"
    "6: Moderately Accurate\n"
    "7: Very Accurate\n";

const std::string kGfcBody =
    "For the following pair of statements, indicate which one describes you\n"
    "more accurately and by how much\n"
    "using a 7-point bipolar scale:\n"
    "1: LEFT statement describes me much more accurately\n"
    "2: LEFT statement describes me moderately more accurately\n"
    "3: LEFT statement describes me slightly more accurately\n"
    "4: About the same\n"
    "5: RIGHT statement describes me slightly more accurately\n"
    "6: RIGHT statement describes me moderately more accurately\n"
    "7: RIGHT statement describes me much more accurately\n";

const std::string kReturnOne =
    "Return ONLY one integer (1-7).\n"
    "Do not include any other text.\n";

std::string frame(const std::string& persona_desc, Condition c, const std::string& body,
                  const std::string& payload) {
  return persona_desc + "\n\n" + instruction_block(c) + "\n\n" + body + kReturnOne + "++++\n" +
         payload + "\n++++";
}

}  // namespace

const std::string& instruction_block(Condition c) {
  return c == Condition::Honest ? kHonest : kFakeGood;
}

std::string render_likert_prompt(const std::string& persona_desc, Condition c,
                                 const std::string& statement) {
  if (statement.empty()) throw Error("prompt", "empty statement");
  return frame(persona_desc, c, kLikertBody, "Statement: " + statement);
}

std::string render_gfc_prompt(const std::string& persona_desc, Condition c,
                              const std::string& left_text, const std::string& right_text) {
  if (left_text.empty() || right_text.empty()) throw Error("prompt", "empty statement");
  return frame(persona_desc, c, kGfcBody, "LEFT: " + left_text + "  ||  RIGHT: " + right_text);
}

std::string render_rating_prompt(const std::vector<std::string>& statements) {
  if (statements.empty()) throw Error("prompt", "empty rating block");
  std::string out =
      "The following statements are characteristics of people. Indicate on a scale from 1 to 9 "
      "how desirable you think each trait or characteristic is for an adult person: "
      "1 = Very undesirable, 3 = Undesirable, 5 = Neutral, 7 = Desirable, 9 = Very desirable. "
      "Use any number from 1 through 9 (i.e., 1, 2, 3, 4, 5, 6, 7, 8, or 9) that best indicates "
      "your opinion regarding how desirable that trait is.\n\n"
      "Please return EXACTLY " +
      std::to_string(statements.size()) +
      " integers separated by single spaces, in the SAME ORDER as the statements.\n\n"
      "Do not include any other text.\n"
      "++++\n";
  for (const auto& s : statements) out += "Statement: " + s + "\n";
  return out + "++++";
}

}  // namespace sdrkit
