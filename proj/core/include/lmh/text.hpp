#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace lmh::text {

std::string_view trim(std::string_view s);

/// Number of Unicode code points in a UTF-8 string. Stray continuation
/// bytes are not counted.
std::size_t code_point_count(std::string_view utf8);

/// Longest prefix of `utf8` holding at most `max_code_points` code points.
std::string_view code_point_prefix(std::string_view utf8, std::size_t max_code_points);

/// Trim and collapse every run of Unicode whitespace into one ASCII space.
std::string collapse_whitespace(std::string_view utf8);

/// NFKC normalization combined with full Unicode case folding.
std::string nfkc_casefold(std::string_view utf8);

}  // namespace lmh::text
