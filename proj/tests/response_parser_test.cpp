#include <gtest/gtest.h>

#include "fuzz_corpus.hpp"
#include "lmh/response_parser.hpp"

namespace lmh {
namespace {

const std::vector<std::string> kChoices = {"Personal jurisdiction is lacking.",
                                           "Venue is improper.", "None of the Above"};

TEST(ParseMc, ExactBareObjectIsOk) {
    const auto p = parse_mc_response(R"({"correct_answer": "Venue is improper.", "reasoning": "r"})", kChoices);
    EXPECT_EQ(p.index, 1);
    EXPECT_EQ(p.status, ParseStatus::ok);
    EXPECT_EQ(p.reasoning, "r");
}

TEST(ParseMc, FencedIsRecovered) {
    const auto p = parse_mc_response("```json\n{\"correct_answer\": \"Venue is improper.\"}\n```", kChoices);
    EXPECT_EQ(p.index, 1);
    EXPECT_EQ(p.status, ParseStatus::recovered);
}

TEST(ParseMc, MatchingRulesInOrder) {
    auto idx = [](const std::string& answer) {
        return parse_mc_response(nlohmann::json{{"correct_answer", answer}}.dump(), kChoices);
    };
    EXPECT_EQ(idx("venue   IS improper").index, 1);             // normalized
    EXPECT_EQ(idx("None of The Above.").index, 2);              // instruction spelling
    EXPECT_EQ(idx("0: Personal jurisdiction").index, 0);        // index pattern
    EXPECT_EQ(idx("The answer: venue is improper").index, 1);   // containment
    EXPECT_EQ(idx("venue is improper").status, ParseStatus::recovered);
    EXPECT_FALSE(idx("is").index.has_value());                  // ambiguous containment
    EXPECT_FALSE(idx("7: out of range").index.has_value());
}

TEST(ParseMc, Unparseable) {
    EXPECT_EQ(parse_mc_response("I cannot decide.", kChoices).status, ParseStatus::unparseable);
    EXPECT_FALSE(parse_mc_response("I cannot decide.", kChoices).index.has_value());
    EXPECT_EQ(parse_mc_response(R"({"reasoning": "x"})", kChoices).status, ParseStatus::unparseable);
}

// A response is "bare exact" when the whole text is a JSON object whose
// correct_answer string equals the choice verbatim.
bool bare_exact(const std::string& raw, const std::string& choice) {
    const auto doc = nlohmann::json::parse(raw, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return false;
    const auto it = doc.find("correct_answer");
    return it != doc.end() && it->is_string() && it->get<std::string>() == choice;
}

// Every wrapper around every choice of every choice set must decode to the
// wrapped choice; only bare exact forms may report ok.
TEST(ParseMc, FuzzCorpusMatchesReference) {
    std::size_t checked = 0;
    for (const auto& choices : testing::fuzz_choice_sets()) {
        for (int target = 0; target < static_cast<int>(choices.size()); ++target) {
            for (const auto& w : testing::wrap_all(choices, target)) {
                const auto p = parse_mc_response(w.raw, choices);
                ASSERT_TRUE(p.index.has_value()) << w.name << ": " << w.raw;
                EXPECT_EQ(*p.index, w.expected_index) << w.name << ": " << w.raw;
                EXPECT_NE(p.status, ParseStatus::unparseable) << w.name;
                EXPECT_EQ(p.status == ParseStatus::ok, bare_exact(w.raw, choices[static_cast<std::size_t>(target)]))
                    << w.name << ": " << w.raw;
                ++checked;
            }
        }
    }
    EXPECT_GE(testing::wrapper_kinds(), 30u);
    EXPECT_GT(checked, 300u);
}

TEST(ParseMc, GarbageIsUnparseable) {
    for (const auto& choices : testing::fuzz_choice_sets()) {
        for (const auto& g : testing::garbage_responses()) {
            const auto p = parse_mc_response(g, choices);
            EXPECT_FALSE(p.index.has_value()) << g;
            EXPECT_EQ(p.status, ParseStatus::unparseable) << g;
        }
    }
}

TEST(ExtractFirstObject, SkipsInvalidCandidates) {
    const auto o = extract_first_object("a {b} c {\"k\": {\"n\": 1}} d {\"z\": 2}");
    ASSERT_TRUE(o.has_value());
    EXPECT_EQ((*o)["k"]["n"], 1);
    EXPECT_FALSE(extract_first_object("no braces here").has_value());
    EXPECT_FALSE(extract_first_object("{\"unterminated\": ").has_value());
}

TEST(ParseBinary, Rules) {
    EXPECT_EQ(parse_binary_response("1").label, 1);
    EXPECT_EQ(parse_binary_response("1").status, ParseStatus::ok);
    EXPECT_EQ(parse_binary_response(" 0.").label, 0);
    EXPECT_EQ(parse_binary_response(" 0.").status, ParseStatus::recovered);
    EXPECT_EQ(parse_binary_response("\"1\"").status, ParseStatus::ok);
    EXPECT_EQ(parse_binary_response("\n'0'\n").label, 0);
    EXPECT_EQ(parse_binary_response("1!").status, ParseStatus::recovered);
    EXPECT_EQ(parse_binary_response("maybe").status, ParseStatus::unparseable);
    EXPECT_EQ(parse_binary_response("10").status, ParseStatus::unparseable);
    EXPECT_EQ(parse_binary_response("1 because").status, ParseStatus::unparseable);
    EXPECT_EQ(parse_binary_response("").status, ParseStatus::unparseable);
    EXPECT_FALSE(parse_binary_response("2").label.has_value());
}

}  // namespace
}  // namespace lmh
