#include "lmh/prompting.hpp"

#include <random>

#include "lmh/error.hpp"
#include "lmh/text.hpp"

namespace lmh {

namespace {

constexpr std::string_view kMultiChoiceInstruction =
    "You are an AI legal expert with expertise in U.S. Civil Procedure and U.S. Civil Law, "
    "known for your strong reasoning abilities. Your task is to answer a Multiple Choice "
    "Question in the legal domain. Choose an answer only if you are very confident, otherwise, "
    "select \"None of The Above.\"\n"
    "\n"
    "You will be provided with:\n"
    "1. question: A legal question\n"
    "2. context: Additional context for better understanding\n"
    "3. choices: Multiple answer candidates\n"
    "\n"
    "Your response should be a JSON with two keys: \"correct_answer\" and \"reasoning.\" Place "
    "the correct answer exactly as provided in the \"correct_answer\" key. Provide a detailed "
    "explanation of your reasoning in the \"reasoning\" key. Do not add or remove any other "
    "text.\n"
    "\n"
    "Your goal is to ensure accurate answers and thorough reasoning.";

constexpr std::string_view kBinaryInstruction =
    "You are an AI legal expert with expertise in U.S. Civil Procedure and U.S. Civil Law, "
    "known for your strong reasoning abilities. Your task is to answer a question in the legal "
    "domain.\n"
    "\n"
    "You will be provided with:\n"
    "\n"
    "1. question: A legal question\n"
    "2. context: Additional context for better understanding\n"
    "3. answer candidate: an answer candidate that can be either correct or incorrect\n"
    "\n"
    "Your response should be a string with length 1. You will be classifying a correct answer "
    "as 1, and an incorrect answer as 0.\n"
    "\n"
    "Your goal is to ensure accurate answers and thorough reasoning.";

// Unbiased draw in [0, n) from the raw engine output; keeps shot selection
// identical across standard library implementations.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % bound);
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return static_cast<std::size_t>(x % bound);
}

bool well_defined_gold(const QuestionGroup& g) {
    int positives = 0;
    for (const auto& c : g.candidates) {
        if (!c.label) return false;
        positives += *c.label;
    }
    return positives <= 1;
}

std::string shot_reasoning(const QuestionGroup& g, const MultiChoiceItem& item) {
    std::string reasoning;
    auto add = [&](const CandidateRecord& c) {
        if (!c.analysis || text::trim(*c.analysis).empty()) return;
        if (!reasoning.empty()) reasoning += '\n';
        reasoning += *c.analysis;
    };
    if (*item.gold_index == item.nota_index) {
        for (const auto& c : g.candidates) add(c);
    } else {
        add(g.candidates[static_cast<std::size_t>(*item.gold_index)]);
    }
    return reasoning.empty() ? std::string(kDefaultShotReasoning) : reasoning;
}

Shot mc_shot(const QuestionGroup& g, const TaskformOptions& opts) {
    const MultiChoiceItem item = to_multi_choice(g, opts);
    nlohmann::ordered_json answer = {
        {"correct_answer", item.choices[static_cast<std::size_t>(*item.gold_index)]},
        {"reasoning", shot_reasoning(g, item)},
    };
    return {render_mc_block(item), answer.dump()};
}

}  // namespace

std::string_view to_string(TaskMode mode) {
    return mode == TaskMode::binary ? "binary" : "multi_choice";
}

TaskMode parse_task_mode(std::string_view name) {
    if (name == "binary") return TaskMode::binary;
    if (name == "multi_choice" || name == "multi-choice" || name == "mc") return TaskMode::multi_choice;
    throw ConfigError("unknown mode \"" + std::string(name) + "\"");
}

std::string_view system_instruction(TaskMode mode) {
    return mode == TaskMode::binary ? kBinaryInstruction : kMultiChoiceInstruction;
}

std::vector<Shot> select_shots(std::span<const QuestionGroup> train_groups, TaskMode mode,
                               std::uint64_t seed, const TaskformOptions& opts) {
    std::mt19937_64 rng(seed);
    std::vector<Shot> shots;

    if (mode == TaskMode::binary) {
        std::vector<const QuestionGroup*> with_pos;
        std::vector<const QuestionGroup*> with_neg;
        for (const auto& g : train_groups) {
            bool pos = false;
            bool neg = false;
            for (const auto& c : g.candidates) {
                pos |= c.label == 1;
                neg |= c.label == 0;
            }
            if (pos) with_pos.push_back(&g);
            if (neg) with_neg.push_back(&g);
        }
        if (with_pos.empty()) throw InsufficientShots("label 1");
        if (with_neg.empty()) throw InsufficientShots("label 0");

        const QuestionGroup& pg = *with_pos[uniform_index(rng, with_pos.size())];
        const QuestionGroup& ng = *with_neg[uniform_index(rng, with_neg.size())];
        const CandidateRecord* positive = nullptr;
        for (const auto& c : pg.candidates) {
            if (c.label == 1) {
                positive = &c;
                break;
            }
        }
        std::vector<const CandidateRecord*> negatives;
        for (const auto& c : ng.candidates) {
            if (c.label == 0) negatives.push_back(&c);
        }
        const CandidateRecord& negative = *negatives[uniform_index(rng, negatives.size())];
        shots.push_back({render_binary_block(*positive, opts), "1"});
        shots.push_back({render_binary_block(negative, opts), "0"});
        return shots;
    }

    std::vector<const QuestionGroup*> answered;
    std::vector<const QuestionGroup*> nota;
    for (const auto& g : train_groups) {
        if (g.candidates.empty() || !well_defined_gold(g)) continue;
        bool any_positive = false;
        for (const auto& c : g.candidates) any_positive |= c.label == 1;
        (any_positive ? answered : nota).push_back(&g);
    }
    if (answered.empty()) throw InsufficientShots("answer");
    if (nota.empty()) throw InsufficientShots("NOTA");

    const QuestionGroup& ag = *answered[uniform_index(rng, answered.size())];
    const QuestionGroup& ng = *nota[uniform_index(rng, nota.size())];
    shots.push_back(mc_shot(ag, opts));
    shots.push_back(mc_shot(ng, opts));
    return shots;
}

PromptBundle build_prompt(const QueryBlock& target, std::span<const Shot> shots, TaskMode mode,
                          std::vector<std::string> choices, std::string_view instruction_override) {
    PromptBundle bundle;
    bundle.system_instruction =
        std::string(instruction_override.empty() ? system_instruction(mode) : instruction_override);
    bundle.shots.assign(shots.begin(), shots.end());
    bundle.query = target;
    bundle.mode = mode;
    bundle.choices = std::move(choices);
    bundle.estimated_tokens = estimate_tokens(bundle);
    return bundle;
}

namespace {

std::size_t fixed_chars(const PromptBundle& b) {
    std::size_t n = text::code_point_count(b.system_instruction);
    for (const auto& s : b.shots) n += text::code_point_count(s.query) + text::code_point_count(s.answer);
    QueryBlock without_context = b.query;
    without_context.context.clear();
    return n + text::code_point_count(without_context.render());
}

std::int64_t tokens_for(std::size_t chars) { return static_cast<std::int64_t>((chars + 3) / 4); }

}  // namespace

std::int64_t estimate_tokens(const PromptBundle& bundle) {
    return tokens_for(fixed_chars(bundle) + text::code_point_count(bundle.query.context));
}

PromptBundle fit_to_budget(PromptBundle bundle, std::int64_t max_tokens) {
    if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
    bundle.estimated_tokens = estimate_tokens(bundle);
    if (bundle.estimated_tokens <= max_tokens) return bundle;

    const std::size_t budget = static_cast<std::size_t>(max_tokens) * 4;
    const std::size_t fixed = fixed_chars(bundle);
    if (fixed > budget) {
        throw BudgetUnsatisfiable("prompt needs " + std::to_string(tokens_for(fixed)) +
                                  " tokens without context; budget is " +
                                  std::to_string(max_tokens));
    }
    const std::size_t room = budget - fixed;
    const std::size_t marker = text::code_point_count(kTruncationMarker);
    if (room >= marker) {
        std::string cut(text::code_point_prefix(bundle.query.context, room - marker));
        cut += kTruncationMarker;
        bundle.query.context = std::move(cut);
    } else {
        bundle.query.context.clear();
    }
    bundle.estimated_tokens = estimate_tokens(bundle);
    return bundle;
}

std::vector<ChatMessage> to_messages(const PromptBundle& bundle) {
    std::vector<ChatMessage> msgs;
    msgs.reserve(2 + bundle.shots.size() * 2);
    msgs.push_back({"system", bundle.system_instruction});
    for (const auto& s : bundle.shots) {
        msgs.push_back({"user", s.query});
        msgs.push_back({"assistant", s.answer});
    }
    msgs.push_back({"user", bundle.query_text()});
    return msgs;
}

nlohmann::json to_json(const PromptBundle& bundle) {
    nlohmann::json shots = nlohmann::json::array();
    for (const auto& s : bundle.shots) shots.push_back({{"query", s.query}, {"answer", s.answer}});
    return {
        {"mode", to_string(bundle.mode)},
        {"system_instruction", bundle.system_instruction},
        {"shots", std::move(shots)},
        {"query", bundle.query_text()},
        {"choices", bundle.choices},
        {"estimated_tokens", bundle.estimated_tokens},
    };
}

std::string render_transcript(const PromptBundle& bundle, std::string_view title) {
    std::string out = "=== ";
    out += title;
    out += " (";
    out += to_string(bundle.mode);
    out += ", ~" + std::to_string(bundle.estimated_tokens) + " tokens) ===\n";
    for (const auto& m : to_messages(bundle)) {
        out += "--- " + m.role + " ---\n";
        out += m.content;
        out += '\n';
    }
    out += '\n';
    return out;
}

}  // namespace lmh
