#include <gtest/gtest.h>

#include <random>
#include <set>

#include "lmh/corpus.hpp"
#include "lmh/error.hpp"
#include "synthetic.hpp"

namespace lmh {
namespace {

using testing::TempDir;
using testing::write_text;

TEST(NormalizeQuestion, CollapsesWhitespaceAndFoldsCase) {
    EXPECT_EQ(normalize_question("  What   rule applies? ").value, "what rule applies?");
    EXPECT_EQ(normalize_question("ABC").value, "abc");
    EXPECT_EQ(normalize_question("what rule applies?").value, "what rule applies?");
    EXPECT_EQ(normalize_question("").value, "");
    EXPECT_EQ(normalize_question(" \t\n ").value, "");
}

TEST(NormalizeQuestion, UnicodeForms) {
    // fullwidth letters, no-break space, ideographic space, sharp s
    EXPECT_EQ(normalize_question("\xEF\xBC\xA1\xEF\xBC\xA2\xEF\xBC\xA3").value, "abc");
    EXPECT_EQ(normalize_question("a\xC2\xA0\xC2\xA0" "b\xE3\x80\x80" "c").value, "a b c");
    EXPECT_EQ(normalize_question("Stra\xC3\x9F" "e").value, "strasse");
    // precomposed vs combining acute accent
    EXPECT_EQ(normalize_question("Caf\xC3\xA9").value, normalize_question("Cafe\xCC\x81").value);
}

TEST(NormalizeQuestion, WeakerLevels) {
    EXPECT_EQ(normalize_question("  A  b ", Normalization::exact).value, "  A  b ");
    EXPECT_EQ(normalize_question("  A  b ", Normalization::whitespace).value, "A b");
}

TEST(NormalizeQuestion, IdempotentOnRandomText) {
    const std::vector<std::string> atoms = {
        "a", "B", " ", "  ", "\t", "\n", "\xC2\xA0", "\xC3\x89", "e\xCC\x81", "\xEF\xBC\xA1",
        "\xC3\x9F", "\xEF\xAC\x81", "?", "\xE2\x80\x83", "\xCC\x81", "\xE2\x84\xAB", "1"};
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const int len = static_cast<int>(rng() % 12);
        for (int i = 0; i < len; ++i) s += atoms[rng() % atoms.size()];
        for (auto level : {Normalization::exact, Normalization::whitespace, Normalization::full}) {
            const auto once = normalize_question(s, level);
            EXPECT_EQ(normalize_question(once.value, level), once) << "input: " << s;
        }
    }
}

TEST(LoadSplit, PreservesFileOrderAndAssignsIds) {
    TempDir dir;
    write_text(dir / "train.jsonl",
               R"({"idx": 7, "question": "Q1", "answer": "A", "label": 0, "explanation": "E"})" "\n"
               R"({"question": "Q1", "candidate": "B", "label": "1", "introduction": "I"})" "\n"
               "\n"
               R"({"id": "x", "question": "Q2", "answer": "C", "label": 0, "analysis": "why", "extra": [1]})" "\n");
    const auto recs = load_split(dir / "train.jsonl", Split::train);
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].record_id, "7");
    EXPECT_EQ(recs[0].explanation, "E");
    EXPECT_EQ(recs[1].record_id, "1");  // 0-based line number
    EXPECT_EQ(recs[1].candidate, "B");
    EXPECT_EQ(recs[1].label, 1);
    EXPECT_EQ(recs[1].explanation, "I");
    EXPECT_EQ(recs[2].record_id, "x");
    EXPECT_EQ(recs[2].analysis, "why");
    EXPECT_EQ(recs[2].extra.at("extra"), nlohmann::json::array({1}));
    EXPECT_FALSE(recs[2].extra.contains("question"));
}

TEST(LoadSplit, Errors) {
    TempDir dir;
    write_text(dir / "bad.jsonl", R"({"question": "Q", "answer": "A", "label": 0})" "\n{not json\n");
    try {
        load_split(dir / "bad.jsonl", Split::train);
        FAIL() << "expected MalformedLine";
    } catch (const MalformedLine& e) {
        EXPECT_EQ(e.line_no(), 2u);
    }

    write_text(dir / "nolabel.jsonl", R"({"question": "Q", "answer": "A"})" "\n");
    try {
        load_split(dir / "nolabel.jsonl", Split::train);
        FAIL() << "expected MissingField";
    } catch (const MissingField& e) {
        EXPECT_EQ(e.field(), "label");
        EXPECT_EQ(e.line_no(), 1u);
    }
    EXPECT_EQ(load_split(dir / "nolabel.jsonl", Split::test).size(), 1u);

    write_text(dir / "noq.jsonl", R"({"question": "   ", "answer": "A", "label": 1})" "\n");
    EXPECT_THROW(load_split(dir / "noq.jsonl", Split::validation), MissingField);

    write_text(dir / "nocand.jsonl", R"({"question": "Q", "label": 1})" "\n");
    EXPECT_THROW(load_split(dir / "nocand.jsonl", Split::validation), MissingField);

    write_text(dir / "label.jsonl", R"({"question": "Q", "answer": "A", "label": 2})" "\n");
    try {
        load_split(dir / "label.jsonl", Split::train);
        FAIL() << "expected BadLabel";
    } catch (const BadLabel& e) {
        EXPECT_EQ(e.line_no(), 1u);
    }

    write_text(dir / "dup.jsonl", R"({"idx": 1, "question": "Q", "answer": "A"})" "\n"
                                  R"({"idx": "1", "question": "Q", "answer": "B"})" "\n");
    EXPECT_THROW(load_split(dir / "dup.jsonl", Split::test), DuplicateRecordId);

    EXPECT_THROW(load_split(dir / "missing.jsonl", Split::test), Error);
}

TEST(LoadSplit, FullSizeTrainSplit) {
    TempDir dir;
    std::string body;
    for (int i = 0; i < 666; ++i) {
        body += R"({"question": "Q)" + std::to_string(i / 4) + R"(", "answer": "A)" +
                std::to_string(i) + R"(", "label": )" + (i % 4 == 0 ? "1" : "0") + "}\n";
    }
    write_text(dir / "train.jsonl", body);
    EXPECT_EQ(load_split(dir / "train.jsonl", Split::train).size(), 666u);
}

TEST(LoadSplit, WriteThenReloadIsStructurallyEqual) {
    TempDir dir;
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto recs = testing::make_corpus({.single_correct = 5, .all_zero = 2, .split = Split::validation},
                                         rng());
        recs.front().extra["source"] = "synthetic";
        recs.back().analysis.reset();
        write_split(dir / "v.jsonl", recs);
        EXPECT_EQ(load_split(dir / "v.jsonl", Split::validation), recs);
    }
}

TEST(GroupByQuestion, GroupsInFirstOccurrenceOrder) {
    using testing::record;
    const std::vector<CandidateRecord> recs = {
        record("0", "Q1", "a", 0, Split::test),
        record("1", "Q2", "b", 0, Split::test, "ctx2"),
        record("2", "Q1", "c", 1, Split::test, "ctx1"),
    };
    const auto groups = group_by_question(recs);
    ASSERT_EQ(groups.size(), 2u);
    EXPECT_EQ(groups[0].key.value, "q1");
    ASSERT_EQ(groups[0].candidates.size(), 2u);
    EXPECT_EQ(groups[0].candidates[0].record_id, "0");
    EXPECT_EQ(groups[0].candidates[1].record_id, "2");
    EXPECT_EQ(groups[0].explanation, "ctx1");  // first non-empty
    EXPECT_EQ(groups[1].candidates.size(), 1u);
    EXPECT_TRUE(group_by_question(std::vector<CandidateRecord>{}).empty());
}

TEST(GroupByQuestion, RejectsMixedSplits) {
    using testing::record;
    const std::vector<CandidateRecord> recs = {record("0", "Q", "a", 0, Split::train),
                                               record("1", "Q", "b", 0, Split::test)};
    EXPECT_THROW(group_by_question(recs), Error);
}

// Brute force: every base question is written in many whitespace/case
// spellings; grouping must recover exactly one group per base.
TEST(GroupByQuestion, NormalizationCollisionsByEnumeration) {
    const std::vector<std::string> bases = {"may the court dismiss?", "is venue proper here?",
                                            "what is the deadline?"};
    std::vector<std::string> spellings;
    std::vector<std::size_t> base_of;
    for (std::size_t b = 0; b < bases.size(); ++b) {
        const std::string& q = bases[b];
        for (int mask = 0; mask < 16; ++mask) {
            std::string v;
            if (mask & 1) v += "  ";
            for (std::size_t i = 0; i < q.size(); ++i) {
                char c = q[i];
                if ((mask & 2) && i % 3 == 0) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                if (c == ' ' && (mask & 4)) {
                    v += " \t ";
                } else {
                    v += c;
                }
            }
            if (mask & 8) v += "\n ";
            spellings.push_back(v);
            base_of.push_back(b);
        }
    }

    TempDir dir;
    std::string body;
    for (std::size_t i = 0; i < spellings.size(); ++i) {
        nlohmann::json doc = {{"question", spellings[i]}, {"answer", "c" + std::to_string(i)}};
        body += doc.dump() + "\n";
    }
    write_text(dir / "t.jsonl", body);
    const auto recs = load_split(dir / "t.jsonl", Split::test);
    const auto groups = group_by_question(recs);

    ASSERT_EQ(groups.size(), bases.size());
    std::size_t total = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        EXPECT_EQ(groups[g].key.value, bases[g]);
        total += groups[g].candidates.size();
        for (const auto& c : groups[g].candidates) {
            EXPECT_EQ(base_of[std::stoul(c.record_id)], g);
        }
    }
    EXPECT_EQ(total, recs.size());

    // byte-identical input gives identical grouping
    const auto again = group_by_question(load_split(dir / "t.jsonl", Split::test));
    ASSERT_EQ(again.size(), groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        EXPECT_EQ(again[g].key, groups[g].key);
        EXPECT_EQ(again[g].candidates, groups[g].candidates);
    }
}

TEST(GroupByQuestion, SizesSumToRecordCount) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto recs = testing::make_corpus(
            {.single_correct = static_cast<int>(rng() % 10), .all_zero = static_cast<int>(rng() % 4)}, rng());
        std::size_t total = 0;
        for (const auto& g : group_by_question(recs)) total += g.candidates.size();
        EXPECT_EQ(total, recs.size());
    }
}

}  // namespace
}  // namespace lmh
