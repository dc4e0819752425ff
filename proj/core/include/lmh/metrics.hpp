#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lmh/corpus.hpp"
#include "lmh/taskform.hpp"

namespace lmh {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct PairedCounts {
    ConfusionCounts counts;
    /// Predictions without a gold record plus gold records without a prediction.
    std::size_t n_skipped = 0;
};

/// Pairs predictions with gold records by record id.
PairedCounts confusion(std::span<const BinaryPrediction> preds,
                       std::span<const CandidateRecord> gold);

/// A percentage held both exactly-rounded (hundredths, half-up) and unrounded.
struct Percent {
    std::int64_t hundredths = 0;
    double raw = 0.0;

    double value() const { return static_cast<double>(hundredths) / 100.0; }
    std::string str() const;  // always two decimals

    friend bool operator==(const Percent&, const Percent&) = default;
};

struct MetricsReport {
    Percent accuracy;
    Percent f1_positive;
    Percent macro_f1;
    ConfusionCounts counts;
    std::size_t n_scored = 0;
    std::size_t n_skipped = 0;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport score(const ConfusionCounts& counts, std::size_t n_skipped = 0);

enum class F1Variant { positive, macro };

std::string_view to_string(F1Variant v);
F1Variant parse_f1_variant(std::string_view name);

struct RunMetadata {
    std::string label = "model";  // row name, e.g. the model name
    std::string config_digest;
    F1Variant headline = F1Variant::positive;
    std::map<std::string, std::size_t> provenance;  // counts per provenance tag
};

struct RenderedReport {
    std::string table;
    nlohmann::json document;
};

/// "Model | F1 Score | Accuracy" table plus a machine-readable document.
RenderedReport render_report(const MetricsReport& report, const RunMetadata& meta);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& doc);

}  // namespace lmh
