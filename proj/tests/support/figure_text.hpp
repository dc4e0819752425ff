#pragma once

#include <string_view>

namespace lmh::testing {

// Instruction texts as hard-wrapped source lines, one entry per
// printed line. The oracle rejoins them.
inline constexpr std::string_view kMcFigureLines[] = {
    "You are an AI legal expert with",
    "expertise in U.S. Civil Procedure",
    "and U.S. Civil Law, known for your",
    "strong reasoning abilities. Your",
    "task is to answer a Multiple",
    "Choice Question in the legal domain.",
    "Choose an answer only if you are",
    "very confident, otherwise, select",
    "\"None of The Above.\"",
    "",
    "You will be provided with:",
    "1. question: A legal question",
    "2. context: Additional context for",
    "better understanding",
    "3. choices: Multiple answer candidates",
    "",
    "Your response should be a JSON with two",
    "keys: \"correct_answer\" and \"reasoning.\"",
    "Place the correct answer exactly as",
    "provided in the \"correct_answer\" key.",
    "Provide a detailed explanation of your",
    "reasoning in the \"reasoning\" key. Do",
    "not add or remove any other text.",
    "",
    "Your goal is to ensure accurate",
    "answers and thorough reasoning.",
};

inline constexpr std::string_view kBinaryFigureLines[] = {
    "You are an AI legal expert with",
    "expertise in U.S. Civil Procedure",
    "and U.S. Civil Law, known for your",
    "strong reasoning abilities. Your",
    "task is to answer a question in",
    "the legal domain.",
    "",
    "You will be provided with:",
    "",
    "1. question: A legal question",
    "2. context: Additional context for",
    "better understanding",
    "3. answer candidate: an answer candidate",
    "that can be either correct or incorrect",
    "",
    "Your response should be a string with",
    "length 1. You will be classifying a",
    "correct answer as 1, and an",
    "incorrect answer as 0.",
    "",
    "Your goal is to ensure accurate",
    "answers and thorough reasoning.",
};

}  // namespace lmh::testing
