#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lmh {

enum class Split { train, validation, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

/// How aggressively question text is folded before cross-split matching.
enum class Normalization {
    exact,       // byte equality
    whitespace,  // trim + collapse whitespace runs
    full,        // whitespace + NFKC + case fold
};

std::string_view to_string(Normalization level);
Normalization parse_normalization(std::string_view name);

/// Normalized question text used to match questions within and across splits.
struct QuestionKey {
    std::string value;

    friend auto operator<=>(const QuestionKey&, const QuestionKey&) = default;
};

/// One (question, answer candidate, label) row of the binary-format corpus.
struct CandidateRecord {
    std::string record_id;
    std::string question;
    std::string explanation;
    std::string candidate;
    std::optional<int> label;
    std::optional<std::string> analysis;
    Split split = Split::train;
    /// Fields the loader does not recognize, kept so a record can be written back out.
    nlohmann::json extra = nlohmann::json::object();

    friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

/// Candidates of one question within a split, in file order.
struct QuestionGroup {
    QuestionKey key;
    std::string question;
    std::string explanation;
    std::vector<CandidateRecord> candidates;
    Split split = Split::train;
};

QuestionKey normalize_question(std::string_view question,
                               Normalization level = Normalization::full);

/// Parses one JSON-lines record. `line_index` is 0-based and becomes the
/// record id when the document carries no "idx"/"id" field.
CandidateRecord parse_record(const nlohmann::json& doc, Split split, std::size_t line_index);

nlohmann::json to_json(const CandidateRecord& record);

std::vector<CandidateRecord> load_split(const std::filesystem::path& path, Split split);

void write_split(const std::filesystem::path& path, std::span<const CandidateRecord> records);

std::vector<QuestionGroup> group_by_question(std::span<const CandidateRecord> records,
                                             Normalization level = Normalization::full);

}  // namespace lmh

template <>
struct std::hash<lmh::QuestionKey> {
    std::size_t operator()(const lmh::QuestionKey& k) const noexcept {
        return std::hash<std::string>{}(k.value);
    }
};
