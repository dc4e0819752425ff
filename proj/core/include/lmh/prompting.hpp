#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmh/corpus.hpp"
#include "lmh/taskform.hpp"

namespace lmh {

enum class TaskMode { binary, multi_choice };

std::string_view to_string(TaskMode mode);
TaskMode parse_task_mode(std::string_view name);

/// Built-in system instruction for `mode`.
std::string_view system_instruction(TaskMode mode);

/// Reasoning used for a multiple-choice shot whose source rows carry no analysis.
inline constexpr std::string_view kDefaultShotReasoning = "See analysis.";

inline constexpr std::string_view kTruncationMarker = "[truncated]";

/// One worked example: a rendered query and the answer the model should give.
struct Shot {
    std::string query;
    std::string answer;

    friend bool operator==(const Shot&, const Shot&) = default;
};

struct PromptBundle {
    std::string system_instruction;
    std::vector<Shot> shots;
    QueryBlock query;
    TaskMode mode = TaskMode::multi_choice;
    /// Choice texts of the target item; empty in binary mode.
    std::vector<std::string> choices;
    std::int64_t estimated_tokens = 0;

    std::string query_text() const { return query.render(); }

    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

struct ChatMessage {
    std::string role;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Picks one positive and one negative example from the training groups.
/// Binary mode: a "1" row and a "0" row. Multiple-choice mode: a question
/// whose gold is a real candidate and a question whose gold is NOTA.
std::vector<Shot> select_shots(std::span<const QuestionGroup> train_groups, TaskMode mode,
                               std::uint64_t seed, const TaskformOptions& opts = {});

/// Assembles the bundle. An empty `instruction_override` selects the
/// built-in instruction for `mode`.
PromptBundle build_prompt(const QueryBlock& target, std::span<const Shot> shots, TaskMode mode,
                          std::vector<std::string> choices = {},
                          std::string_view instruction_override = {});

/// ceil(code points / 4) over every text field of the bundle.
std::int64_t estimate_tokens(const PromptBundle& bundle);

/// Shortens the query context from the end until the bundle fits.
PromptBundle fit_to_budget(PromptBundle bundle, std::int64_t max_tokens);

/// system, then alternating user/assistant shots, then the user query.
std::vector<ChatMessage> to_messages(const PromptBundle& bundle);

/// Canonical serialization; used for cache keys and reproducibility checks.
nlohmann::json to_json(const PromptBundle& bundle);

std::string render_transcript(const PromptBundle& bundle, std::string_view title);

}  // namespace lmh
