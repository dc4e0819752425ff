#include "lmh/corpus.hpp"

#include <unordered_map>
#include <unordered_set>

#include "lmh/error.hpp"
#include "lmh/jsonl.hpp"
#include "lmh/text.hpp"

namespace lmh {

namespace {

using nlohmann::json;

constexpr std::string_view kQuestion = "question";
constexpr std::string_view kAnswerKeys[] = {"answer", "candidate"};
constexpr std::string_view kExplanationKeys[] = {"explanation", "introduction"};
constexpr std::string_view kIdKeys[] = {"idx", "id"};
constexpr std::string_view kLabel = "label";
constexpr std::string_view kAnalysis = "analysis";

const json* find_field(const json& doc, std::string_view name) {
    auto it = doc.find(std::string(name));
    if (it == doc.end() || it->is_null()) return nullptr;
    return &*it;
}

// First present key among `names`; records which key was consumed.
const json* find_any(const json& doc, std::span<const std::string_view> names,
                     std::unordered_set<std::string>& consumed) {
    for (auto name : names) {
        if (const json* v = find_field(doc, name)) {
            consumed.emplace(name);
            return v;
        }
    }
    return nullptr;
}

std::string text_field(const json& v, std::string_view name, std::size_t line_no) {
    if (!v.is_string()) {
        throw MalformedLine(line_no, "field \"" + std::string(name) + "\" is not a string");
    }
    return v.get<std::string>();
}

}  // namespace

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "?";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "validation" || name == "val" || name == "dev") return Split::validation;
    if (name == "test") return Split::test;
    throw ConfigError("unknown split \"" + std::string(name) + "\"");
}

std::string_view to_string(Normalization level) {
    switch (level) {
        case Normalization::exact: return "exact";
        case Normalization::whitespace: return "whitespace";
        case Normalization::full: return "full";
    }
    return "?";
}

Normalization parse_normalization(std::string_view name) {
    if (name == "exact") return Normalization::exact;
    if (name == "whitespace") return Normalization::whitespace;
    if (name == "full") return Normalization::full;
    throw ConfigError("unknown normalization \"" + std::string(name) + "\"");
}

QuestionKey normalize_question(std::string_view question, Normalization level) {
    switch (level) {
        case Normalization::exact:
            return {std::string(question)};
        case Normalization::whitespace:
            return {text::collapse_whitespace(question)};
        case Normalization::full:
            // NFKC can turn compatibility spaces into U+0020, so fold first.
            return {text::collapse_whitespace(text::nfkc_casefold(question))};
    }
    return {std::string(question)};
}

CandidateRecord parse_record(const json& doc, Split split, std::size_t line_index) {
    const std::size_t line_no = line_index + 1;
    if (!doc.is_object()) throw MalformedLine(line_no, "record is not a JSON object");

    std::unordered_set<std::string> consumed;
    CandidateRecord rec;
    rec.split = split;

    const json* q = find_field(doc, kQuestion);
    consumed.emplace(kQuestion);
    if (q == nullptr) throw MissingField("question", line_no);
    rec.question = text_field(*q, kQuestion, line_no);
    if (text::trim(rec.question).empty()) throw MissingField("question", line_no);

    const json* c = find_any(doc, kAnswerKeys, consumed);
    if (c == nullptr) throw MissingField("answer", line_no);
    rec.candidate = text_field(*c, "answer", line_no);
    if (text::trim(rec.candidate).empty()) throw MissingField("answer", line_no);

    if (const json* e = find_any(doc, kExplanationKeys, consumed)) {
        rec.explanation = text_field(*e, "explanation", line_no);
    }

    if (const json* a = find_field(doc, kAnalysis)) {
        rec.analysis = text_field(*a, kAnalysis, line_no);
    }
    consumed.emplace(kAnalysis);

    consumed.emplace(kLabel);
    if (const json* l = find_field(doc, kLabel)) {
        if (l->is_number_integer()) {
            const auto v = l->get<std::int64_t>();
            if (v != 0 && v != 1) throw BadLabel(line_no);
            rec.label = static_cast<int>(v);
        } else if (l->is_string() && (*l == "0" || *l == "1")) {
            rec.label = l->get<std::string>() == "1" ? 1 : 0;
        } else {
            throw BadLabel(line_no);
        }
    } else if (split != Split::test) {
        throw MissingField("label", line_no);
    }

    if (const json* id = find_any(doc, kIdKeys, consumed)) {
        if (id->is_string()) {
            rec.record_id = id->get<std::string>();
        } else if (id->is_number_integer()) {
            rec.record_id = std::to_string(id->get<std::int64_t>());
        } else {
            throw MalformedLine(line_no, "id field is neither a string nor an integer");
        }
    } else {
        rec.record_id = std::to_string(line_index);
    }

    for (const auto& [k, v] : doc.items()) {
        if (!consumed.contains(k)) rec.extra[k] = v;
    }
    return rec;
}

json to_json(const CandidateRecord& record) {
    json doc = record.extra.is_object() ? record.extra : json::object();
    doc["idx"] = record.record_id;
    doc["question"] = record.question;
    doc["explanation"] = record.explanation;
    doc["answer"] = record.candidate;
    if (record.label) doc["label"] = *record.label;
    if (record.analysis) doc["analysis"] = *record.analysis;
    return doc;
}

std::vector<CandidateRecord> load_split(const std::filesystem::path& path, Split split) {
    std::vector<CandidateRecord> records;
    std::unordered_set<std::string> ids;
    jsonl::for_each_line(path, [&](const json& doc, std::size_t line_no) {
        CandidateRecord rec = parse_record(doc, split, line_no - 1);
        if (!ids.insert(rec.record_id).second) throw DuplicateRecordId(rec.record_id);
        records.push_back(std::move(rec));
    });
    return records;
}

void write_split(const std::filesystem::path& path, std::span<const CandidateRecord> records) {
    std::vector<json> docs;
    docs.reserve(records.size());
    for (const auto& r : records) docs.push_back(to_json(r));
    jsonl::write_lines(path, docs);
}

std::vector<QuestionGroup> group_by_question(std::span<const CandidateRecord> records,
                                             Normalization level) {
    std::vector<QuestionGroup> groups;
    if (records.empty()) return groups;
    std::unordered_map<QuestionKey, std::size_t> slot;
    const Split split = records.front().split;
    for (const auto& rec : records) {
        if (rec.split != split) throw Error("group_by_question: records span several splits");
        QuestionKey key = normalize_question(rec.question, level);
        auto [it, inserted] = slot.try_emplace(key, groups.size());
        if (inserted) {
            QuestionGroup g;
            g.key = std::move(key);
            g.question = rec.question;
            g.split = split;
            groups.push_back(std::move(g));
        }
        QuestionGroup& g = groups[it->second];
        if (g.explanation.empty() && !text::trim(rec.explanation).empty()) g.explanation = rec.explanation;
        g.candidates.push_back(rec);
    }
    return groups;
}

}  // namespace lmh
