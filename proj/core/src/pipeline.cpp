#include "lmh/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "lmh/digest.hpp"
#include "lmh/error.hpp"
#include "lmh/jsonl.hpp"

namespace lmh {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// config

fs::path RunConfig::split_path(Split split) const {
    switch (split) {
        case Split::train: return paths.train;
        case Split::validation: return paths.validation;
        case Split::test: return paths.test;
    }
    return {};
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

}  // namespace

RunConfig run_config_from_json(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig cfg;
    try {
        if (auto it = doc.find("paths"); it != doc.end()) {
            const json& p = *it;
            cfg.paths.train = resolve(base_dir, p.value("train", std::string()));
            cfg.paths.validation = resolve(base_dir, p.value("validation", std::string()));
            cfg.paths.test = resolve(base_dir, p.value("test", std::string()));
            cfg.paths.cache_dir = resolve(base_dir, p.value("cache_dir", std::string()));
            cfg.paths.output_dir = resolve(base_dir, p.value("output_dir", std::string("out")));
        }
        if (doc.contains("mode")) cfg.mode = parse_task_mode(doc["mode"].get<std::string>());
        if (doc.contains("provider")) {
            cfg.provider = provider_config_from_json(doc["provider"]);
            cfg.provider.scripted_path = resolve(base_dir, cfg.provider.scripted_path.string());
        }
        cfg.rules_enabled = doc.value("rules_enabled", cfg.rules_enabled);
        cfg.shots_seed = doc.value("shots_seed", cfg.shots_seed);
        cfg.max_tokens = doc.value("max_tokens", cfg.max_tokens);
        if (doc.contains("f1_variant_for_headline")) {
            cfg.f1_variant_for_headline = parse_f1_variant(doc["f1_variant_for_headline"].get<std::string>());
        }
        if (doc.contains("normalization")) {
            cfg.normalization = parse_normalization(doc["normalization"].get<std::string>());
        }
        cfg.append_analysis = doc.value("append_analysis", cfg.append_analysis);
        cfg.system_instruction_file =
            resolve(base_dir, doc.value("system_instruction_file", std::string()));
        cfg.report_label = doc.value("report_label", std::string());
        if (doc.contains("target_split")) cfg.target_split = parse_split(doc["target_split"].get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.max_tokens <= 0) throw ConfigError("max_tokens must be positive");
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    const json doc = json::parse(jsonl::read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
    return run_config_from_json(doc, path.parent_path());
}

json to_json(const RunConfig& cfg) {
    return {
        {"paths",
         {{"train", cfg.paths.train.string()},
          {"validation", cfg.paths.validation.string()},
          {"test", cfg.paths.test.string()},
          {"cache_dir", cfg.paths.cache_dir.string()},
          {"output_dir", cfg.paths.output_dir.string()}}},
        {"mode", to_string(cfg.mode)},
        {"provider", to_json(cfg.provider)},
        {"rules_enabled", cfg.rules_enabled},
        {"shots_seed", cfg.shots_seed},
        {"max_tokens", cfg.max_tokens},
        {"f1_variant_for_headline", to_string(cfg.f1_variant_for_headline)},
        {"normalization", to_string(cfg.normalization)},
        {"append_analysis", cfg.append_analysis},
        {"system_instruction_file", cfg.system_instruction_file.string()},
        {"report_label", cfg.report_label},
        {"target_split", to_string(cfg.target_split)},
    };
}

std::string config_digest(const RunConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

// ---------------------------------------------------------------------------
// lock

OutputDirLock::OutputDirLock(const fs::path& output_dir) : path_(output_dir / outputs::kLock) {
    fs::create_directories(output_dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST) {
            throw Error("output directory " + output_dir.string() +
                        " is in use by another run (remove " + path_.string() + " if stale)");
        }
        throw Error("cannot create lock " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

OutputDirLock::~OutputDirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

// ---------------------------------------------------------------------------
// helpers

namespace {

std::vector<CandidateRecord> load_configured(const RunConfig& cfg, Split split) {
    const fs::path p = cfg.split_path(split);
    if (p.empty()) throw ConfigError("paths." + std::string(to_string(split)) + " is not set");
    try {
        return load_split(p, split);
    } catch (const Error& e) {
        throw Error(p.string() + ": " + e.what());
    }
}

std::vector<MultiChoiceItem> convert_records(std::span<const CandidateRecord> records,
                                             const RunConfig& cfg, const fs::path& source) {
    std::vector<MultiChoiceItem> items;
    for (const auto& g : group_by_question(records, cfg.normalization)) {
        try {
            items.push_back(to_multi_choice(g, cfg.taskform_options()));
        } catch (const Error& e) {
            throw Error(source.string() + ": " + e.what());
        }
    }
    return items;
}

std::string instruction_override(const RunConfig& cfg) {
    if (cfg.system_instruction_file.empty()) return {};
    return jsonl::read_file(cfg.system_instruction_file);
}

// One prompt target: a multiple-choice item or a single binary record.
struct Unit {
    std::string title;
    PromptBundle bundle;
    RequestContext context;
    const MultiChoiceItem* item = nullptr;
    const CandidateRecord* record = nullptr;
};

struct Outcome {
    std::optional<ModelResponse> response;
    std::string error;
};

// Runs fn(i) for i in [0, n) on up to `parallelism` threads. The first
// exception thrown by fn stops further work and is rethrown here.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
    if (parallelism <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr first;
    std::mutex mu;
    {
        std::vector<std::jthread> workers;
        const auto count = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
        for (std::size_t w = 0; w < count; ++w) {
            workers.emplace_back([&] {
                while (!stop.load()) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(mu);
                        if (!first) first = std::current_exception();
                        stop = true;
                    }
                }
            });
        }
    }
    if (first) std::rethrow_exception(first);
}

std::map<std::string, std::size_t> provenance_counts(std::span<const BinaryPrediction> preds) {
    std::map<std::string, std::size_t> counts{
        {"model", 0}, {"rule_adjusted", 0}, {"parse_fallback", 0}};
    for (const auto& p : preds) ++counts[std::string(to_string(p.provenance))];
    return counts;
}

}  // namespace

// ---------------------------------------------------------------------------
// commands

ConvertResult cmd_convert(const RunConfig& cfg, std::optional<fs::path> input,
                          std::optional<fs::path> output) {
    const fs::path in = input ? *input : cfg.split_path(cfg.target_split);
    if (in.empty()) throw ConfigError("no input split configured for convert");
    std::vector<CandidateRecord> records;
    try {
        records = load_split(in, cfg.target_split);
    } catch (const Error& e) {
        throw Error(in.string() + ": " + e.what());
    }
    const auto items = convert_records(records, cfg, in);
    ConvertResult result;
    result.output = output ? *output : cfg.paths.output_dir / outputs::kItems;
    result.items = items.size();
    write_multi_choice(result.output, items);
    return result;
}

PredictResult cmd_predict(const RunConfig& cfg, std::optional<fs::path> items_path,
                          const PredictHooks& hooks) {
    cfg.provider.validate();
    const auto train = load_configured(cfg, Split::train);
    const auto train_groups = group_by_question(train, cfg.normalization);
    const auto shots = select_shots(train_groups, cfg.mode, cfg.shots_seed, cfg.taskform_options());
    const std::string instruction = instruction_override(cfg);

    std::vector<MultiChoiceItem> items;
    std::vector<CandidateRecord> records;
    std::vector<Unit> units;
    auto finish_bundle = [&](const QueryBlock& block, std::vector<std::string> choices,
                             const std::string& title) {
        try {
            return fit_to_budget(build_prompt(block, shots, cfg.mode, std::move(choices), instruction),
                                 cfg.max_tokens);
        } catch (const BudgetUnsatisfiable& e) {
            throw BudgetUnsatisfiable(title + ": " + e.what());
        }
    };

    if (cfg.mode == TaskMode::multi_choice) {
        if (items_path) {
            items = load_multi_choice(*items_path);
        } else {
            records = load_configured(cfg, cfg.target_split);
            items = convert_records(records, cfg, cfg.split_path(cfg.target_split));
        }
        units.reserve(items.size());
        for (const auto& item : items) {
            Unit u;
            u.title = item.key.value;
            u.item = &item;
            u.bundle = finish_bundle(mc_block(item), item.choices, u.title);
            u.context.key = item.key;
            if (item.gold_index) {
                u.context.expected_answer = item.choices[static_cast<std::size_t>(*item.gold_index)];
            }
            units.push_back(std::move(u));
        }
    } else {
        records = load_configured(cfg, cfg.target_split);
        units.reserve(records.size());
        for (const auto& rec : records) {
            Unit u;
            u.title = rec.record_id;
            u.record = &rec;
            u.bundle = finish_bundle(binary_block(rec, cfg.taskform_options()), {}, u.title);
            u.context.key = normalize_question(rec.question, cfg.normalization);
            u.context.record_id = rec.record_id;
            if (rec.label) u.context.expected_answer = std::to_string(*rec.label);
            units.push_back(std::move(u));
        }
    }

    std::string transcript;
    for (const auto& u : units) transcript += render_transcript(u.bundle, u.title);
    jsonl::write_file_atomic(cfg.paths.output_dir / outputs::kTranscript, transcript);

    auto backend = hooks.backend_factory ? hooks.backend_factory()
                                         : make_backend(cfg.provider, cfg.mode, cfg.normalization);
    std::optional<fs::path> cache_dir;
    if (!cfg.paths.cache_dir.empty()) cache_dir = cfg.paths.cache_dir;
    Provider provider(cfg.provider, std::move(backend), cache_dir, hooks.sleeper);

    const auto runs = static_cast<std::size_t>(cfg.provider.runs);
    std::vector<Outcome> outcomes(units.size() * runs);
    parallel_for(outcomes.size(), cfg.provider.parallelism, [&](std::size_t job) {
        const Unit& u = units[job / runs];
        const int run_id = static_cast<int>(job % runs);
        try {
            outcomes[job].response = provider.complete(u.bundle, run_id, u.context);
        } catch (const AuthFailure&) {
            throw;
        } catch (const Error& e) {
            outcomes[job].error = e.what();
        }
    });

    std::map<std::string, std::size_t> status_counts{{"ok", 0}, {"recovered", 0}, {"unparseable", 0}};
    json failures = json::array();
    std::size_t failed_units = 0;
    std::vector<BinaryPrediction> preds;

    for (std::size_t ui = 0; ui < units.size(); ++ui) {
        const Unit& u = units[ui];
        const int fallback = u.item ? u.item->nota_index : 0;
        std::vector<ChoicePrediction> votes;
        std::vector<bool> decoded;
        std::size_t errors = 0;
        for (std::size_t r = 0; r < runs; ++r) {
            const Outcome& o = outcomes[ui * runs + r];
            ChoicePrediction vote{u.context.key, fallback, std::nullopt, static_cast<int>(r)};
            bool ok = false;
            if (o.response) {
                ++status_counts[std::string(to_string(o.response->parse_status))];
                if (o.response->parsed_index) {
                    vote.chosen_index = *o.response->parsed_index;
                    vote.reasoning = o.response->parsed_reasoning;
                    ok = true;
                }
            } else {
                ++errors;
                failures.push_back({{"unit", u.title}, {"run_id", r}, {"error", o.error}});
            }
            votes.push_back(std::move(vote));
            decoded.push_back(ok);
        }
        if (errors == runs) ++failed_units;

        const ChoicePrediction winner = aggregate_runs(votes);
        bool model_backed = false;
        for (std::size_t r = 0; r < runs; ++r) {
            model_backed |= decoded[r] && votes[r].chosen_index == winner.chosen_index;
        }
        const Provenance prov = model_backed ? Provenance::model : Provenance::parse_fallback;

        if (u.item) {
            for (auto& p : from_choice(*u.item, winner, prov)) preds.push_back(std::move(p));
        } else {
            preds.push_back({u.record->record_id, u.context.key, winner.chosen_index, prov});
        }
    }

    PredictResult result;
    result.predictions = cfg.paths.output_dir / outputs::kPredictions;
    result.manifest_path = cfg.paths.output_dir / outputs::kPredictManifest;
    write_predictions(result.predictions, preds);

    const std::size_t completions = units.size() * runs;
    const std::size_t hits = provider.cache_hits();
    result.manifest = {
        {"config_digest", config_digest(cfg)},
        {"mode", to_string(cfg.mode)},
        {"backend", to_string(cfg.provider.backend)},
        {"model", cfg.provider.model_name},
        {"runs", cfg.provider.runs},
        {"units", units.size()},
        {"completions", completions},
        {"backend_calls", provider.backend_calls()},
        {"cache_hits", hits},
        {"cache_hit_rate", completions == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(completions)},
        {"parse_status", status_counts},
        {"failed_completions", failures.size()},
        {"failed_units", failed_units},
        {"failures", std::move(failures)},
        {"provenance", provenance_counts(preds)},
        {"predictions", preds.size()},
    };
    jsonl::write_file_atomic(result.manifest_path, result.manifest.dump(2) + "\n");
    result.preds = std::move(preds);
    return result;
}

RulesResult cmd_apply_rules(const RunConfig& cfg, std::optional<fs::path> predictions) {
    const fs::path in = predictions ? *predictions : cfg.paths.output_dir / outputs::kPredictions;
    auto labeled = load_configured(cfg, Split::train);
    const auto val = load_configured(cfg, Split::validation);
    labeled.insert(labeled.end(), val.begin(), val.end());
    const LabelIndex index = build_label_index(labeled, cfg.normalization);

    const auto before = load_predictions(in);
    RulesResult result;
    result.preds = apply_rules(before, index);
    result.report = rule_report(before, result.preds);
    result.adjusted = cfg.paths.output_dir / outputs::kAdjusted;
    result.report_path = cfg.paths.output_dir / outputs::kRuleReport;
    write_predictions(result.adjusted, result.preds);
    jsonl::write_file_atomic(result.report_path, to_json(result.report).dump(2) + "\n");
    return result;
}

EvaluateResult cmd_evaluate(const RunConfig& cfg, std::optional<fs::path> predictions,
                            std::optional<fs::path> gold) {
    const fs::path pred_path =
        predictions ? *predictions
                    : cfg.paths.output_dir /
                          (cfg.rules_enabled ? outputs::kAdjusted : outputs::kPredictions);
    const fs::path gold_path = gold ? *gold : cfg.split_path(cfg.target_split);
    if (gold_path.empty()) throw ConfigError("no gold split configured for evaluate");

    const auto preds = load_predictions(pred_path);
    std::vector<CandidateRecord> gold_records;
    try {
        gold_records = load_split(gold_path, Split::test);
    } catch (const Error& e) {
        throw Error(gold_path.string() + ": " + e.what());
    }
    const PairedCounts paired = confusion(preds, gold_records);

    EvaluateResult result;
    result.report = score(paired.counts, paired.n_skipped);
    RunMetadata meta;
    meta.label = cfg.report_label.empty() ? cfg.provider.model_name : cfg.report_label;
    meta.config_digest = config_digest(cfg);
    meta.headline = cfg.f1_variant_for_headline;
    meta.provenance = provenance_counts(preds);
    result.rendered = render_report(result.report, meta);
    result.table_path = cfg.paths.output_dir / outputs::kReportText;
    result.json_path = cfg.paths.output_dir / outputs::kReportJson;
    jsonl::write_file_atomic(result.table_path, result.rendered.table);
    jsonl::write_file_atomic(result.json_path, result.rendered.document.dump(2) + "\n");
    return result;
}

std::string render_submission(std::span<const BinaryPrediction> preds,
                              std::span<const CandidateRecord> corpus) {
    std::unordered_map<std::string_view, int> labels;
    for (const auto& p : preds) labels.emplace(p.record_id, p.predicted_label);
    std::string out;
    out.reserve(corpus.size() * 2);
    for (const auto& r : corpus) {
        auto it = labels.find(r.record_id);
        if (it == labels.end()) throw Error("no prediction for record \"" + r.record_id + "\"");
        out += it->second == 1 ? "1\n" : "0\n";
    }
    return out;
}

RunResult cmd_run(const RunConfig& cfg, const PredictHooks& hooks) {
    RunResult result;
    result.convert = cmd_convert(cfg);
    std::optional<fs::path> items;
    if (cfg.mode == TaskMode::multi_choice) items = result.convert.output;
    result.predict = cmd_predict(cfg, items, hooks);

    fs::path final_preds = result.predict.predictions;
    const std::vector<BinaryPrediction>* preds = &result.predict.preds;
    if (cfg.rules_enabled) {
        result.rules = cmd_apply_rules(cfg, result.predict.predictions);
        final_preds = result.rules->adjusted;
        preds = &result.rules->preds;
    }
    result.evaluate = cmd_evaluate(cfg, final_preds);

    const auto corpus = load_configured(cfg, cfg.target_split);
    result.submission = cfg.paths.output_dir / outputs::kSubmission;
    jsonl::write_file_atomic(result.submission, render_submission(*preds, corpus));
    return result;
}

}  // namespace lmh
