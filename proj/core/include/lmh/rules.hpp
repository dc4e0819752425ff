#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmh/corpus.hpp"
#include "lmh/taskform.hpp"

namespace lmh {

/// Per-question label statistics from the labeled (train + validation) splits.
struct LabelIndex {
    struct Entry {
        std::size_t candidate_count = 0;
        std::size_t positive_count = 0;

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    std::map<QuestionKey, Entry> entries;

    const Entry* find(const QuestionKey& key) const;
};

/// Unlabeled records are ignored.
LabelIndex build_label_index(std::span<const CandidateRecord> records,
                             Normalization level = Normalization::full);

/// Overrides predictions whose question is indexed: every candidate of a
/// question with no known positive becomes 1, every candidate of a question
/// with a known positive becomes 0. Changed predictions are marked
/// rule_adjusted; unindexed questions pass through.
std::vector<BinaryPrediction> apply_rules(std::span<const BinaryPrediction> preds,
                                          const LabelIndex& index);

struct RuleAdjustment {
    std::string record_id;
    int from = 0;
    int to = 0;

    friend bool operator==(const RuleAdjustment&, const RuleAdjustment&) = default;
};

struct RuleReport {
    std::size_t flips_0_to_1 = 0;
    std::size_t flips_1_to_0 = 0;
    std::size_t untouched = 0;
    std::map<QuestionKey, std::vector<RuleAdjustment>> adjustments;
};

RuleReport rule_report(std::span<const BinaryPrediction> before,
                       std::span<const BinaryPrediction> after);

nlohmann::json to_json(const RuleReport& report);

}  // namespace lmh
