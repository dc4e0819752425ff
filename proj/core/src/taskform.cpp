#include "lmh/taskform.hpp"

#include "lmh/error.hpp"
#include "lmh/jsonl.hpp"
#include "lmh/text.hpp"

namespace lmh {

using nlohmann::json;

namespace {

std::string with_analysis(std::string context, const std::vector<std::string>& analyses) {
    std::string joined;
    for (const auto& a : analyses) {
        if (text::trim(a).empty()) continue;
        if (!joined.empty()) joined += '\n';
        joined += a;
    }
    if (joined.empty()) return context;
    if (!context.empty()) context += "\n\n";
    context += "Analysis:\n";
    context += joined;
    return context;
}

}  // namespace

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::model: return "model";
        case Provenance::rule_adjusted: return "rule_adjusted";
        case Provenance::parse_fallback: return "parse_fallback";
    }
    return "?";
}

Provenance parse_provenance(std::string_view name) {
    if (name == "model") return Provenance::model;
    if (name == "rule_adjusted") return Provenance::rule_adjusted;
    if (name == "parse_fallback") return Provenance::parse_fallback;
    throw Error("unknown provenance \"" + std::string(name) + "\"");
}

std::string QueryBlock::render() const {
    std::string out;
    out.reserve(question.size() + context.size() + choices_body.size() + 40);
    out += "Question:\n";
    out += question;
    out += "\n\nContext:\n";
    out += context;
    out += "\n\n";
    out += choices_heading;
    out += ":\n";
    out += choices_body;
    return out;
}

MultiChoiceItem to_multi_choice(const QuestionGroup& group, const TaskformOptions& opts) {
    if (group.candidates.empty()) throw Error("to_multi_choice: empty question group");

    MultiChoiceItem item;
    item.key = group.key;
    item.question = group.question;
    item.context = group.explanation;

    int positives = 0;
    int positive_at = -1;
    bool all_labeled = true;
    std::vector<std::string> analyses;
    for (std::size_t i = 0; i < group.candidates.size(); ++i) {
        const auto& c = group.candidates[i];
        item.choices.push_back(c.candidate);
        item.source_record_ids.push_back(c.record_id);
        if (c.analysis) analyses.push_back(*c.analysis);
        if (!c.label) {
            all_labeled = false;
        } else if (*c.label == 1) {
            ++positives;
            positive_at = static_cast<int>(i);
        }
    }
    if (positives > 1) throw MultipleCorrect(group.key.value);

    item.choices.emplace_back(kNoneOfTheAbove);
    item.nota_index = static_cast<int>(item.choices.size()) - 1;
    if (all_labeled) item.gold_index = positives == 1 ? positive_at : item.nota_index;
    if (opts.append_analysis) item.context = with_analysis(std::move(item.context), analyses);
    return item;
}

std::vector<BinaryPrediction> from_choice(const MultiChoiceItem& item, const ChoicePrediction& pred,
                                          Provenance provenance) {
    if (pred.chosen_index < 0 || pred.chosen_index > item.nota_index) {
        throw IndexOutOfRange("choice " + std::to_string(pred.chosen_index) + " outside [0, " +
                              std::to_string(item.nota_index) + "]");
    }
    std::vector<BinaryPrediction> out;
    out.reserve(item.source_record_ids.size());
    for (std::size_t i = 0; i < item.source_record_ids.size(); ++i) {
        out.push_back({item.source_record_ids[i], item.key,
                       static_cast<int>(i) == pred.chosen_index ? 1 : 0, provenance});
    }
    return out;
}

QueryBlock binary_block(const CandidateRecord& record, const TaskformOptions& opts) {
    std::string context = record.explanation;
    if (opts.append_analysis && record.analysis) {
        context = with_analysis(std::move(context), {*record.analysis});
    }
    return {record.question, std::move(context), "Choice", record.candidate};
}

QueryBlock mc_block(const MultiChoiceItem& item) {
    std::string body = "{";
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
        if (i > 0) body += ", \n";
        body += std::to_string(i);
        body += ": ";
        body += item.choices[i];
    }
    body += "}";
    return {item.question, item.context, "Choices", std::move(body)};
}

std::string render_binary_block(const CandidateRecord& record, const TaskformOptions& opts) {
    return binary_block(record, opts).render();
}

std::string render_mc_block(const MultiChoiceItem& item) { return mc_block(item).render(); }

json to_json(const MultiChoiceItem& item) {
    json doc = {
        {"key", item.key.value},
        {"question", item.question},
        {"context", item.context},
        {"choices", item.choices},
        {"nota_index", item.nota_index},
        {"source_record_ids", item.source_record_ids},
    };
    if (item.gold_index) doc["gold_index"] = *item.gold_index;
    return doc;
}

MultiChoiceItem multi_choice_from_json(const json& doc) {
    MultiChoiceItem item;
    try {
        item.key.value = doc.at("key").get<std::string>();
        item.question = doc.at("question").get<std::string>();
        item.context = doc.value("context", std::string());
        item.choices = doc.at("choices").get<std::vector<std::string>>();
        item.nota_index = doc.at("nota_index").get<int>();
        item.source_record_ids = doc.at("source_record_ids").get<std::vector<std::string>>();
        if (auto it = doc.find("gold_index"); it != doc.end() && !it->is_null()) {
            item.gold_index = it->get<int>();
        }
    } catch (const json::exception& e) {
        throw Error(std::string("multi-choice item: ") + e.what());
    }
    if (item.choices.empty() || item.nota_index != static_cast<int>(item.choices.size()) - 1 ||
        item.choices.back() != kNoneOfTheAbove) {
        throw Error("multi-choice item: \"None of the Above\" must be the last choice");
    }
    if (item.source_record_ids.size() != static_cast<std::size_t>(item.nota_index)) {
        throw Error("multi-choice item: source_record_ids do not align with choices");
    }
    if (item.gold_index && (*item.gold_index < 0 || *item.gold_index > item.nota_index)) {
        throw Error("multi-choice item: gold_index out of range");
    }
    return item;
}

json to_json(const BinaryPrediction& pred) {
    return {
        {"record_id", pred.record_id},
        {"key", pred.key.value},
        {"predicted_label", pred.predicted_label},
        {"provenance", to_string(pred.provenance)},
    };
}

BinaryPrediction binary_prediction_from_json(const json& doc) {
    BinaryPrediction p;
    try {
        p.record_id = doc.at("record_id").get<std::string>();
        p.key.value = doc.value("key", std::string());
        p.predicted_label = doc.at("predicted_label").get<int>();
        p.provenance = parse_provenance(doc.value("provenance", std::string("model")));
    } catch (const json::exception& e) {
        throw Error(std::string("prediction: ") + e.what());
    }
    if (p.predicted_label != 0 && p.predicted_label != 1) {
        throw Error("prediction: predicted_label outside {0,1}");
    }
    return p;
}

std::vector<MultiChoiceItem> load_multi_choice(const std::filesystem::path& path) {
    std::vector<MultiChoiceItem> items;
    jsonl::for_each_line(path, [&](const json& doc, std::size_t line_no) {
        try {
            items.push_back(multi_choice_from_json(doc));
        } catch (const Error& e) {
            throw MalformedLine(line_no, e.what());
        }
    });
    return items;
}

void write_multi_choice(const std::filesystem::path& path, std::span<const MultiChoiceItem> items) {
    std::vector<json> docs;
    docs.reserve(items.size());
    for (const auto& i : items) docs.push_back(to_json(i));
    jsonl::write_lines(path, docs);
}

std::vector<BinaryPrediction> load_predictions(const std::filesystem::path& path) {
    std::vector<BinaryPrediction> preds;
    jsonl::for_each_line(path, [&](const json& doc, std::size_t line_no) {
        try {
            preds.push_back(binary_prediction_from_json(doc));
        } catch (const Error& e) {
            throw MalformedLine(line_no, e.what());
        }
    });
    return preds;
}

void write_predictions(const std::filesystem::path& path, std::span<const BinaryPrediction> preds) {
    std::vector<json> docs;
    docs.reserve(preds.size());
    for (const auto& p : preds) docs.push_back(to_json(p));
    jsonl::write_lines(path, docs);
}

}  // namespace lmh
