#include "fuzz_corpus.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include <nlohmann/json.hpp>

namespace lmh::testing {

namespace {

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

std::string obj(const std::string& answer_json, const std::string& reasoning = "Because of the rule.") {
    return "{\"correct_answer\": " + answer_json + ", \"reasoning\": " + quote(reasoning) + "}";
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string without_final_period(std::string s) {
    while (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

using Wrapper = std::function<std::string(const std::string& text, int index)>;

const std::vector<std::pair<std::string, Wrapper>>& wrappers() {
    static const std::vector<std::pair<std::string, Wrapper>> all = {
        {"bare", [](const std::string& t, int) { return obj(quote(t)); }},
        {"bare_reasoning_first",
         [](const std::string& t, int) { return "{\"reasoning\": \"x\", \"correct_answer\": " + quote(t) + "}"; }},
        {"padded_whitespace", [](const std::string& t, int) { return "\n\n   " + obj(quote(t)) + "  \n"; }},
        {"fence_json", [](const std::string& t, int) { return "```json\n" + obj(quote(t)) + "\n```"; }},
        {"fence_plain", [](const std::string& t, int) { return "```\n" + obj(quote(t)) + "\n```"; }},
        {"fence_crlf", [](const std::string& t, int) { return "```json\r\n" + obj(quote(t)) + "\r\n```\r\n"; }},
        {"prose_preamble", [](const std::string& t, int) { return "Here is my answer:\n" + obj(quote(t)); }},
        {"prose_after", [](const std::string& t, int) { return obj(quote(t)) + "\nI hope this helps."; }},
        {"prose_both_fenced",
         [](const std::string& t, int) { return "Sure! ```json " + obj(quote(t)) + " ``` Let me know."; }},
        {"braces_in_prose",
         [](const std::string& t, int) { return "Note {not json} first.\n" + obj(quote(t)); }},
        {"quoted_answer", [](const std::string& t, int) { return obj(quote("\"" + t + "\"")); }},
        {"single_quoted_answer", [](const std::string& t, int) { return obj(quote("'" + t + "'")); }},
        {"lowercase", [](const std::string& t, int) { return obj(quote(lower(t))); }},
        {"uppercase", [](const std::string& t, int) { return obj(quote(upper(t))); }},
        {"extra_spaces", [](const std::string& t, int) { return obj(quote("  " + t + "   ")); }},
        {"no_final_period", [](const std::string& t, int) { return obj(quote(without_final_period(t))); }},
        {"extra_period", [](const std::string& t, int) { return obj(quote(t + ".")); }},
        {"bold_markdown", [](const std::string& t, int) { return obj(quote("**" + t + "**")); }},
        {"index_colon",
         [](const std::string& t, int i) { return obj(quote(std::to_string(i) + ": " + t)); }},
        {"index_paren",
         [](const std::string& t, int i) { return obj(quote("(" + std::to_string(i) + ") " + t)); }},
        {"index_only", [](const std::string&, int i) { return obj(quote(std::to_string(i))); }},
        {"index_number", [](const std::string&, int i) { return obj(std::to_string(i)); }},
        {"answer_prefix", [](const std::string& t, int) { return obj(quote("Answer: " + t)); }},
        {"choice_label_prefix",
         [](const std::string& t, int i) { return obj(quote("Choice " + std::to_string(i) + " - " + t)); }},
        {"trailing_comma",
         [](const std::string& t, int) { return "{\"correct_answer\": " + quote(t) + ", \"reasoning\": \"r\",}"; }},
        {"smart_quotes",
         [](const std::string& t, int) {
             return "{\xE2\x80\x9C" "correct_answer\xE2\x80\x9D: \xE2\x80\x9C" + t + "\xE2\x80\x9D}";
         }},
        {"key_case", [](const std::string& t, int) { return "{\"Correct_Answer\": " + quote(t) + "}"; }},
        {"key_spaced", [](const std::string& t, int) { return "{\"correct answer\": " + quote(t) + "}"; }},
        {"nested",
         [](const std::string& t, int) { return "{\"result\": " + obj(quote(t)) + "}"; }},
        {"truncated",
         [](const std::string& t, int) {
             return "{\"correct_answer\": " + quote(t) + ", \"reasoning\": \"The rule says";
         }},
        {"two_objects",
         [](const std::string& t, int) { return obj(quote(t)) + "\n{\"correct_answer\": \"other\"}"; }},
        {"escaped_reasoning",
         [](const std::string& t, int) { return obj(quote(t), "Line one.\nLine \"two\" \\u00e9."); }},
        {"unicode_spaces",
         [](const std::string& t, int) {
             std::string s;
             for (char c : t) {
                 if (c == ' ') {
                     s += "\xC2\xA0";
                 } else {
                     s += c;
                 }
             }
             return obj(quote(s));
         }},
    };
    return all;
}

}  // namespace

std::vector<std::vector<std::string>> fuzz_choice_sets() {
    return {
        {"The court lacks personal jurisdiction over the defendant.",
         "Venue is proper in the Northern District.",
         "The claim is barred by claim preclusion.",
         "None of the Above"},
        {"Yes, because the amount in controversy exceeds the statutory minimum.",
         "No, because the parties are not completely diverse.",
         "None of the Above"},
        {"Rule 12(b)(6) requires dismissal.", "None of the Above"},
        {"Remand is mandatory.", "Removal was timely.", "Supplemental jurisdiction applies.",
         "The answer is waived.", "Joinder is improper.", "None of the Above"},
    };
}

std::vector<WrappedResponse> wrap_all(const std::vector<std::string>& choices, int target) {
    std::vector<WrappedResponse> out;
    const std::string& text = choices[static_cast<std::size_t>(target)];
    for (const auto& [name, fn] : wrappers()) out.push_back({name, fn(text, target), target});
    return out;
}

std::size_t wrapper_kinds() { return wrappers().size(); }

std::vector<std::string> garbage_responses() {
    return {
        "I cannot decide.",
        "",
        "   ",
        "{}",
        "{\"reasoning\": \"There is no way to tell.\"}",
        "{\"correct_answer\": \"Something unrelated entirely\"}",
        "{\"correct_answer\": \"\"}",
        "{\"correct_answer\": 17}",
        "{\"correct_answer\": true}",
        "null",
        "[0, 1]",
        "```json\n```",
        "The answer is unclear without more facts.",
        "<html><body>502 Bad Gateway</body></html>",
        "{\"correct_answer\": [\"a\", \"b\"]}",
    };
}

}  // namespace lmh::testing
