#include "lmh/rules.hpp"

#include "lmh/error.hpp"

namespace lmh {

const LabelIndex::Entry* LabelIndex::find(const QuestionKey& key) const {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
}

LabelIndex build_label_index(std::span<const CandidateRecord> records, Normalization level) {
    LabelIndex index;
    for (const auto& r : records) {
        if (!r.label) continue;
        auto& e = index.entries[normalize_question(r.question, level)];
        ++e.candidate_count;
        if (*r.label == 1) ++e.positive_count;
    }
    return index;
}

std::vector<BinaryPrediction> apply_rules(std::span<const BinaryPrediction> preds,
                                          const LabelIndex& index) {
    std::vector<BinaryPrediction> out(preds.begin(), preds.end());
    for (auto& p : out) {
        const LabelIndex::Entry* e = index.find(p.key);
        if (e == nullptr) continue;
        const int forced = e->positive_count == 0 ? 1 : 0;
        if (p.predicted_label != forced) {
            p.predicted_label = forced;
            p.provenance = Provenance::rule_adjusted;
        }
    }
    return out;
}

RuleReport rule_report(std::span<const BinaryPrediction> before,
                       std::span<const BinaryPrediction> after) {
    if (before.size() != after.size()) {
        throw MisalignedInputs("prediction lists differ in length (" + std::to_string(before.size()) +
                               " vs " + std::to_string(after.size()) + ")");
    }
    RuleReport report;
    for (std::size_t i = 0; i < before.size(); ++i) {
        const auto& b = before[i];
        const auto& a = after[i];
        if (b.record_id != a.record_id) {
            throw MisalignedInputs("record id mismatch at position " + std::to_string(i) + ": \"" +
                                   b.record_id + "\" vs \"" + a.record_id + "\"");
        }
        if (b.predicted_label == a.predicted_label) {
            ++report.untouched;
            continue;
        }
        (b.predicted_label == 0 ? report.flips_0_to_1 : report.flips_1_to_0) += 1;
        report.adjustments[a.key].push_back({a.record_id, b.predicted_label, a.predicted_label});
    }
    return report;
}

nlohmann::json to_json(const RuleReport& report) {
    nlohmann::json adjustments = nlohmann::json::array();
    for (const auto& [key, list] : report.adjustments) {
        nlohmann::json changes = nlohmann::json::array();
        for (const auto& adj : list) {
            changes.push_back({{"record_id", adj.record_id}, {"from", adj.from}, {"to", adj.to}});
        }
        adjustments.push_back({{"key", key.value}, {"changes", std::move(changes)}});
    }
    return {
        {"flips", {{"0->1", report.flips_0_to_1}, {"1->0", report.flips_1_to_0}}},
        {"untouched", report.untouched},
        {"adjustments", std::move(adjustments)},
    };
}

}  // namespace lmh
