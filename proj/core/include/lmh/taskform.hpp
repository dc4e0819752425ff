#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmh/corpus.hpp"

namespace lmh {

inline constexpr std::string_view kNoneOfTheAbove = "None of the Above";

/// A question group rewritten as one multiple-choice question. The final
/// choice is always "None of the Above".
struct MultiChoiceItem {
    QuestionKey key;
    std::string question;
    std::string context;
    std::vector<std::string> choices;
    int nota_index = 0;
    std::optional<int> gold_index;
    std::vector<std::string> source_record_ids;

    int candidate_count() const { return nota_index; }

    friend bool operator==(const MultiChoiceItem&, const MultiChoiceItem&) = default;
};

struct ChoicePrediction {
    QuestionKey key;
    int chosen_index = 0;
    std::optional<std::string> reasoning;
    int run_id = 0;

    friend bool operator==(const ChoicePrediction&, const ChoicePrediction&) = default;
};

enum class Provenance { model, rule_adjusted, parse_fallback };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view name);

struct BinaryPrediction {
    std::string record_id;
    QuestionKey key;
    int predicted_label = 0;
    Provenance provenance = Provenance::model;

    friend bool operator==(const BinaryPrediction&, const BinaryPrediction&) = default;
};

struct TaskformOptions {
    /// Append candidate analysis text to the rendered context. Off by
    /// default: test splits do not carry analysis.
    bool append_analysis = false;
};

/// The sections of one rendered query. Kept structured so the context can
/// be shortened without touching the question or the choices.
struct QueryBlock {
    std::string question;
    std::string context;
    std::string choices_heading;  // "Choice" or "Choices"
    std::string choices_body;

    std::string render() const;

    friend bool operator==(const QueryBlock&, const QueryBlock&) = default;
};

MultiChoiceItem to_multi_choice(const QuestionGroup& group, const TaskformOptions& opts = {});

std::vector<BinaryPrediction> from_choice(const MultiChoiceItem& item, const ChoicePrediction& pred,
                                          Provenance provenance = Provenance::model);

QueryBlock binary_block(const CandidateRecord& record, const TaskformOptions& opts = {});
QueryBlock mc_block(const MultiChoiceItem& item);

std::string render_binary_block(const CandidateRecord& record, const TaskformOptions& opts = {});
std::string render_mc_block(const MultiChoiceItem& item);

nlohmann::json to_json(const MultiChoiceItem& item);
MultiChoiceItem multi_choice_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const BinaryPrediction& pred);
BinaryPrediction binary_prediction_from_json(const nlohmann::json& doc);

std::vector<MultiChoiceItem> load_multi_choice(const std::filesystem::path& path);
void write_multi_choice(const std::filesystem::path& path, std::span<const MultiChoiceItem> items);

std::vector<BinaryPrediction> load_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, std::span<const BinaryPrediction> preds);

}  // namespace lmh
