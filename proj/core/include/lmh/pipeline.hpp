#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmh/corpus.hpp"
#include "lmh/metrics.hpp"
#include "lmh/prompting.hpp"
#include "lmh/provider.hpp"
#include "lmh/rules.hpp"
#include "lmh/taskform.hpp"

namespace lmh {

struct RunPaths {
    std::filesystem::path train;
    std::filesystem::path validation;
    std::filesystem::path test;
    std::filesystem::path cache_dir;
    std::filesystem::path output_dir = "out";
};

struct RunConfig {
    RunPaths paths;
    TaskMode mode = TaskMode::multi_choice;
    ProviderConfig provider;
    bool rules_enabled = true;
    std::uint64_t shots_seed = 0;
    std::int64_t max_tokens = 16'000;
    F1Variant f1_variant_for_headline = F1Variant::positive;
    Normalization normalization = Normalization::full;
    bool append_analysis = false;
    std::filesystem::path system_instruction_file;
    /// Row label in the report table; defaults to the model name.
    std::string report_label;
    Split target_split = Split::test;

    std::filesystem::path split_path(Split split) const;
    TaskformOptions taskform_options() const { return {append_analysis}; }
};

/// Reads a JSON config. Relative paths resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& doc,
                               const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& cfg);

/// SHA-256 over the canonical JSON form of the config.
std::string config_digest(const RunConfig& cfg);

/// File names written under the output directory.
namespace outputs {
inline constexpr const char* kItems = "items.jsonl";
inline constexpr const char* kPredictions = "predictions.jsonl";
inline constexpr const char* kPredictManifest = "predict_manifest.json";
inline constexpr const char* kTranscript = "prompts.txt";
inline constexpr const char* kAdjusted = "predictions.rules.jsonl";
inline constexpr const char* kRuleReport = "rule_report.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kSubmission = "submission.txt";
inline constexpr const char* kLock = ".lmh.lock";
}  // namespace outputs

/// Exclusive claim on an output directory, released on destruction.
class OutputDirLock {
public:
    explicit OutputDirLock(const std::filesystem::path& output_dir);
    ~OutputDirLock();
    OutputDirLock(const OutputDirLock&) = delete;
    OutputDirLock& operator=(const OutputDirLock&) = delete;

private:
    std::filesystem::path path_;
};

/// Hooks for tests and embedding; the defaults build the configured backend.
struct PredictHooks {
    std::function<std::unique_ptr<Backend>()> backend_factory;
    Provider::Sleeper sleeper;
};

struct ConvertResult {
    std::filesystem::path output;
    std::size_t items = 0;
};

struct PredictResult {
    std::filesystem::path predictions;
    std::filesystem::path manifest_path;
    nlohmann::json manifest;
    std::vector<BinaryPrediction> preds;
};

struct RulesResult {
    std::filesystem::path adjusted;
    std::filesystem::path report_path;
    RuleReport report;
    std::vector<BinaryPrediction> preds;
};

struct EvaluateResult {
    std::filesystem::path table_path;
    std::filesystem::path json_path;
    MetricsReport report;
    RenderedReport rendered;
};

struct RunResult {
    ConvertResult convert;
    PredictResult predict;
    std::optional<RulesResult> rules;
    EvaluateResult evaluate;
    std::filesystem::path submission;
};

ConvertResult cmd_convert(const RunConfig& cfg,
                          std::optional<std::filesystem::path> input = std::nullopt,
                          std::optional<std::filesystem::path> output = std::nullopt);

/// In multiple-choice mode `items` names a converted file; when unset the
/// target split is converted in memory.
PredictResult cmd_predict(const RunConfig& cfg,
                          std::optional<std::filesystem::path> items = std::nullopt,
                          const PredictHooks& hooks = {});

RulesResult cmd_apply_rules(const RunConfig& cfg,
                            std::optional<std::filesystem::path> predictions = std::nullopt);

EvaluateResult cmd_evaluate(const RunConfig& cfg,
                            std::optional<std::filesystem::path> predictions = std::nullopt,
                            std::optional<std::filesystem::path> gold = std::nullopt);

RunResult cmd_run(const RunConfig& cfg, const PredictHooks& hooks = {});

/// One 0/1 line per record of `corpus`, in corpus order.
std::string render_submission(std::span<const BinaryPrediction> preds,
                              std::span<const CandidateRecord> corpus);

}  // namespace lmh
