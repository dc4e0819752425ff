#include "lmh/response_parser.hpp"

#include <cctype>
#include <regex>

#include "lmh/corpus.hpp"
#include "lmh/text.hpp"

namespace lmh {

using nlohmann::json;

namespace {

// Index one past the '}' closing the object opened at `start`, or npos.
std::size_t balanced_end(std::string_view s, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

std::string repair(std::string s) {
    static const std::regex trailing_comma(R"(,\s*([}\]]))");
    s = std::regex_replace(s, trailing_comma, "$1");
    // Typographic double quotes are a common copy/paste artifact.
    for (std::string_view smart : {"\xE2\x80\x9C", "\xE2\x80\x9D"}) {
        for (auto pos = s.find(smart); pos != std::string::npos; pos = s.find(smart, pos)) {
            s.replace(pos, smart.size(), "\"");
        }
    }
    return s;
}

std::optional<json> parse_object(std::string_view candidate) {
    json v = json::parse(candidate.begin(), candidate.end(), nullptr, false);
    if (v.is_discarded()) {
        const std::string fixed = repair(std::string(candidate));
        v = json::parse(fixed, nullptr, false);
    }
    if (v.is_discarded() || !v.is_object()) return std::nullopt;
    return v;
}

std::string compact_key(std::string_view k) {
    std::string out;
    for (char c : k) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

const json* find_key(const json& obj, std::string_view wanted) {
    if (auto it = obj.find(std::string(wanted)); it != obj.end()) return &*it;
    const std::string target = compact_key(wanted);
    for (const auto& [k, v] : obj.items()) {
        if (compact_key(k) == target) return &v;
    }
    return nullptr;
}

std::optional<std::string> as_answer(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    return std::nullopt;
}

// Last resort for objects that fail to parse, e.g. truncated output.
std::optional<std::string> scan_answer_field(std::string_view raw) {
    static const std::regex field(R"rx("correct_answer"\s*:\s*("(?:[^"\\]|\\.)*"))rx");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(raw.begin(), raw.end(), m, field)) return std::nullopt;
    json v = json::parse(m[1].first, m[1].second, nullptr, false);
    if (v.is_discarded() || !v.is_string()) return std::nullopt;
    return v.get<std::string>();
}

bool is_quote_byte(char c) { return c == '"' || c == '\'' || c == '`' || c == '*'; }

std::string strip_decoration(std::string_view s) {
    for (;;) {
        std::string_view before = s;
        s = text::trim(s);
        while (!s.empty() && is_quote_byte(s.front())) s.remove_prefix(1);
        while (!s.empty() && is_quote_byte(s.back())) s.remove_suffix(1);
        for (std::string_view q : {"\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99"}) {
            if (s.starts_with(q)) s.remove_prefix(q.size());
            if (s.ends_with(q)) s.remove_suffix(q.size());
        }
        while (!s.empty() && s.back() == '.') s.remove_suffix(1);
        if (s == before) break;
    }
    return std::string(s);
}

std::string match_key(std::string_view s) {
    return normalize_question(strip_decoration(s), Normalization::full).value;
}

std::optional<int> leading_index(std::string_view answer, std::size_t n) {
    static const std::regex pattern(R"(^\s*[\(\[]?(\d{1,4})(?:[\)\]]|\s*[:.\-]|\s*$))");
    const std::string s = strip_decoration(answer);
    std::smatch m;
    if (!std::regex_search(s, m, pattern)) return std::nullopt;
    const int idx = std::stoi(m[1].str());
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) return std::nullopt;
    return idx;
}

}  // namespace

std::string_view to_string(ParseStatus status) {
    switch (status) {
        case ParseStatus::ok: return "ok";
        case ParseStatus::recovered: return "recovered";
        case ParseStatus::unparseable: return "unparseable";
    }
    return "?";
}

std::optional<json> extract_first_object(std::string_view raw) {
    for (std::size_t start = raw.find('{'); start != std::string_view::npos;
         start = raw.find('{', start + 1)) {
        const std::size_t end = balanced_end(raw, start);
        if (end == std::string_view::npos) continue;
        if (auto obj = parse_object(raw.substr(start, end - start))) return obj;
    }
    return std::nullopt;
}

McParse parse_mc_response(std::string_view raw, std::span<const std::string> choices) {
    McParse out;
    bool bare = false;
    std::optional<json> obj;
    {
        const std::string_view t = text::trim(raw);
        json v = json::parse(t.begin(), t.end(), nullptr, false);
        if (!v.is_discarded() && v.is_object()) {
            obj = std::move(v);
            bare = true;
        } else {
            obj = extract_first_object(raw);
        }
    }

    bool answer_is_string = false;
    if (obj) {
        if (const json* a = find_key(*obj, "correct_answer")) {
            out.answer = as_answer(*a);
            answer_is_string = a->is_string();
        }
        if (const json* r = find_key(*obj, "reasoning"); r != nullptr && r->is_string()) {
            out.reasoning = r->get<std::string>();
        }
    }
    if (!out.answer) {
        bare = false;
        out.answer = scan_answer_field(raw);
        answer_is_string = out.answer.has_value();
    }
    if (!out.answer || choices.empty()) return out;

    const std::string& answer = *out.answer;
    const bool exact_ok = bare && answer_is_string && obj->contains("correct_answer");

    for (std::size_t i = 0; i < choices.size(); ++i) {
        if (choices[i] == answer) {
            out.index = static_cast<int>(i);
            out.status = exact_ok ? ParseStatus::ok : ParseStatus::recovered;
            return out;
        }
    }

    const std::string wanted = match_key(answer);
    std::vector<std::string> keys;
    keys.reserve(choices.size());
    for (const auto& c : choices) keys.push_back(match_key(c));
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (!wanted.empty() && keys[i] == wanted) {
            out.index = static_cast<int>(i);
            out.status = ParseStatus::recovered;
            return out;
        }
    }

    if (auto idx = leading_index(answer, choices.size())) {
        out.index = *idx;
        out.status = ParseStatus::recovered;
        return out;
    }

    if (!wanted.empty()) {
        std::optional<int> hit;
        int hits = 0;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i].empty()) continue;
            if (keys[i].find(wanted) != std::string::npos || wanted.find(keys[i]) != std::string::npos) {
                hit = static_cast<int>(i);
                ++hits;
            }
        }
        if (hits == 1) {
            out.index = hit;
            out.status = ParseStatus::recovered;
        }
    }
    return out;
}

BinaryParse parse_binary_response(std::string_view raw) {
    std::string_view t = raw;
    for (;;) {
        std::string_view before = t;
        t = text::trim(t);
        while (!t.empty() && (t.front() == '"' || t.front() == '\'' || t.front() == '`')) t.remove_prefix(1);
        while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == '`')) t.remove_suffix(1);
        if (t == before) break;
    }
    BinaryParse out;
    if (t == "0" || t == "1") {
        out.label = t == "1" ? 1 : 0;
        out.status = ParseStatus::ok;
        return out;
    }
    if (!t.empty() && (t.front() == '0' || t.front() == '1')) {
        bool punct_only = true;
        for (char c : t.substr(1)) punct_only &= std::ispunct(static_cast<unsigned char>(c)) != 0;
        if (punct_only) {
            out.label = t.front() == '1' ? 1 : 0;
            out.status = ParseStatus::recovered;
        }
    }
    return out;
}

}  // namespace lmh
