#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace lmh {

enum class ParseStatus { ok, recovered, unparseable };

std::string_view to_string(ParseStatus status);

struct McParse {
    std::optional<int> index;
    ParseStatus status = ParseStatus::unparseable;
    std::optional<std::string> answer;     // raw "correct_answer" value
    std::optional<std::string> reasoning;
};

struct BinaryParse {
    std::optional<int> label;
    ParseStatus status = ParseStatus::unparseable;
};

/// First balanced {...} in `raw` that parses as a JSON object, tolerating
/// surrounding prose, code fences and trailing commas.
std::optional<nlohmann::json> extract_first_object(std::string_view raw);

/// Decodes a multiple-choice answer. Matching order: exact choice text,
/// normalized text, leading "index:" pattern, unique containment. Only an
/// exact match on a bare JSON object reports `ok`.
McParse parse_mc_response(std::string_view raw, std::span<const std::string> choices);

/// Accepts "0"/"1" (ok) or a 0/1 followed only by punctuation (recovered).
BinaryParse parse_binary_response(std::string_view raw);

}  // namespace lmh
