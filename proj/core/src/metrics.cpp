#include "lmh/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "lmh/error.hpp"

namespace lmh {

namespace {

__extension__ typedef unsigned __int128 u128;

// num/den as a percentage, rounded half-up to hundredths with exact integer arithmetic.
Percent percent(u128 num, u128 den) {
    if (den == 0) return {};
    const u128 hundredths = (num * 20000 + den) / (den * 2);
    return {static_cast<std::int64_t>(hundredths),
            100.0 * static_cast<double>(num) / static_cast<double>(den)};
}

}  // namespace

PairedCounts confusion(std::span<const BinaryPrediction> preds, std::span<const CandidateRecord> gold) {
    std::unordered_map<std::string_view, const CandidateRecord*> by_id;
    for (const auto& g : gold) {
        if (!by_id.emplace(g.record_id, &g).second) throw DuplicateRecordId(g.record_id);
    }
    PairedCounts out;
    std::unordered_set<std::string_view> seen;
    for (const auto& p : preds) {
        if (!seen.insert(p.record_id).second) throw DuplicateRecordId(p.record_id);
        auto it = by_id.find(p.record_id);
        if (it == by_id.end()) {
            ++out.n_skipped;
            continue;
        }
        const CandidateRecord& g = *it->second;
        if (!g.label) throw UnlabeledGold(g.record_id);
        auto& c = out.counts;
        if (p.predicted_label == 1) {
            (*g.label == 1 ? c.tp : c.fp) += 1;
        } else {
            (*g.label == 1 ? c.fn : c.tn) += 1;
        }
    }
    for (const auto& g : gold) {
        if (!seen.contains(g.record_id)) ++out.n_skipped;
    }
    return out;
}

std::string Percent::str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(hundredths / 100),
                  static_cast<long long>(hundredths % 100));
    return buf;
}

MetricsReport score(const ConfusionCounts& c, std::size_t n_skipped) {
    const u128 n = c.total();
    if (n == 0) throw EmptyScoreSet();
    MetricsReport r;
    r.counts = c;
    r.n_scored = c.total();
    r.n_skipped = n_skipped;
    r.accuracy = percent(c.tp + c.tn, n);

    const u128 pos_num = 2 * static_cast<u128>(c.tp);
    const u128 pos_den = pos_num + c.fp + c.fn;
    const u128 neg_num = 2 * static_cast<u128>(c.tn);
    const u128 neg_den = neg_num + c.fp + c.fn;
    r.f1_positive = percent(pos_num, pos_den);

    // mean of the two class F1 scores; an undefined class F1 counts as 0
    if (pos_den == 0 && neg_den == 0) {
        r.macro_f1 = {};
    } else if (pos_den == 0) {
        r.macro_f1 = percent(neg_num, 2 * neg_den);
    } else if (neg_den == 0) {
        r.macro_f1 = percent(pos_num, 2 * pos_den);
    } else {
        r.macro_f1 = percent(pos_num * neg_den + neg_num * pos_den, 2 * pos_den * neg_den);
    }
    return r;
}

std::string_view to_string(F1Variant v) { return v == F1Variant::positive ? "positive" : "macro"; }

F1Variant parse_f1_variant(std::string_view name) {
    if (name == "positive") return F1Variant::positive;
    if (name == "macro") return F1Variant::macro;
    throw ConfigError("unknown F1 variant \"" + std::string(name) + "\"");
}

nlohmann::json to_json(const MetricsReport& r) {
    return {
        {"accuracy_pct", r.accuracy.value()},
        {"f1_positive_pct", r.f1_positive.value()},
        {"macro_f1_pct", r.macro_f1.value()},
        {"accuracy_raw", r.accuracy.raw},
        {"f1_positive_raw", r.f1_positive.raw},
        {"macro_f1_raw", r.macro_f1.raw},
        {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}}},
        {"n_scored", r.n_scored},
        {"n_skipped", r.n_skipped},
    };
}

MetricsReport metrics_report_from_json(const nlohmann::json& doc) {
    auto pct = [&](const char* rounded, const char* raw) {
        return Percent{std::llround(doc.at(rounded).get<double>() * 100.0), doc.at(raw).get<double>()};
    };
    MetricsReport r;
    try {
        r.accuracy = pct("accuracy_pct", "accuracy_raw");
        r.f1_positive = pct("f1_positive_pct", "f1_positive_raw");
        r.macro_f1 = pct("macro_f1_pct", "macro_f1_raw");
        const auto& c = doc.at("counts");
        r.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                    c.at("fn").get<std::size_t>(), c.at("tn").get<std::size_t>()};
        r.n_scored = doc.at("n_scored").get<std::size_t>();
        r.n_skipped = doc.at("n_skipped").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("metrics report: ") + e.what());
    }
    return r;
}

RenderedReport render_report(const MetricsReport& report, const RunMetadata& meta) {
    const Percent& f1 = meta.headline == F1Variant::macro ? report.macro_f1 : report.f1_positive;
    RenderedReport out;
    out.table = "Model | F1 Score | Accuracy\n";
    out.table += meta.label + " | " + f1.str() + " | " + report.accuracy.str() + "\n";
    out.document = {
        {"model", meta.label},
        {"headline", {{"f1_variant", to_string(meta.headline)},
                      {"f1_score", f1.value()},
                      {"accuracy", report.accuracy.value()}}},
        {"metrics", to_json(report)},
        {"config_digest", meta.config_digest},
        {"provenance", meta.provenance},
    };
    return out;
}

}  // namespace lmh
