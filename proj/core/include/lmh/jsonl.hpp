#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lmh::jsonl {

/// Calls `fn(value, line_no)` for each non-blank line; line_no is 1-based.
/// Throws MalformedLine for lines that are not valid JSON.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(const nlohmann::json&, std::size_t)>& fn);

/// Writes one compact JSON document per line, replacing `path` atomically.
void write_lines(const std::filesystem::path& path, const std::vector<nlohmann::json>& docs);

/// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace lmh::jsonl
