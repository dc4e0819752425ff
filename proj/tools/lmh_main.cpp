// lmh: few-shot answer validation pipeline for legal multiple-choice data.
//
//   lmh convert     --config run.json [--input f] [--output f]
//   lmh predict     --config run.json [--items f]
//   lmh apply-rules --config run.json [--predictions f]
//   lmh evaluate    --config run.json [--predictions f] [--gold f]
//   lmh run         --config run.json

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "lmh/error.hpp"
#include "lmh/pipeline.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string mode;
    std::string backend;
    std::optional<int> runs;
    bool no_rules = false;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string train;
    std::string validation;
    std::string test;
    std::string cache;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON run configuration");
    cmd->add_option("--mode", o.mode, "binary | multi_choice");
    cmd->add_option("--backend", o.backend, "http_chat | mock_oracle | mock_fixed | mock_scripted");
    cmd->add_option("--runs", o.runs, "independent prediction passes (majority vote)");
    cmd->add_flag("--no-rules", o.no_rules, "skip the train/validation label rules");
    cmd->add_option("--seed", o.seed, "few-shot selection seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--train", o.train, "train split (JSON lines)");
    cmd->add_option("--validation", o.validation, "validation split (JSON lines)");
    cmd->add_option("--test", o.test, "test split (JSON lines)");
    cmd->add_option("--cache", o.cache, "response cache directory");
}

lmh::RunConfig resolve_config(const Overrides& o) {
    lmh::RunConfig cfg = o.config.empty() ? lmh::RunConfig{} : lmh::load_run_config(o.config);
    if (!o.mode.empty()) cfg.mode = lmh::parse_task_mode(o.mode);
    if (!o.backend.empty()) cfg.provider.backend = lmh::parse_backend_kind(o.backend);
    if (o.runs) cfg.provider.runs = *o.runs;
    if (o.no_rules) cfg.rules_enabled = false;
    if (o.seed) cfg.shots_seed = *o.seed;
    if (!o.out.empty()) cfg.paths.output_dir = o.out;
    if (!o.train.empty()) cfg.paths.train = o.train;
    if (!o.validation.empty()) cfg.paths.validation = o.validation;
    if (!o.test.empty()) cfg.paths.test = o.test;
    if (!o.cache.empty()) cfg.paths.cache_dir = o.cache;
    cfg.provider.validate();
    return cfg;
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Few-shot legal answer validation pipeline"};
    app.require_subcommand(1);

    Overrides o;
    std::string input, output, items, predictions, gold;

    auto* convert = app.add_subcommand("convert", "binary split -> multiple-choice items");
    add_common(convert, o);
    convert->add_option("--input", input, "binary-format split to convert");
    convert->add_option("--output", output, "multiple-choice JSON-lines output");

    auto* predict = app.add_subcommand("predict", "prompt the model and write predictions");
    add_common(predict, o);
    predict->add_option("--items", items, "converted multiple-choice items");

    auto* rules = app.add_subcommand("apply-rules", "apply train/validation label rules");
    add_common(rules, o);
    rules->add_option("--predictions", predictions, "predictions to adjust");

    auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold labels");
    add_common(evaluate, o);
    evaluate->add_option("--predictions", predictions, "predictions to score");
    evaluate->add_option("--gold", gold, "labeled split");

    auto* run = app.add_subcommand("run", "convert, predict, apply rules, evaluate");
    add_common(run, o);

    CLI11_PARSE(app, argc, argv);

    try {
        const lmh::RunConfig cfg = resolve_config(o);
        lmh::OutputDirLock lock(cfg.paths.output_dir);

        if (convert->parsed()) {
            const auto r = lmh::cmd_convert(cfg, opt_path(input), opt_path(output));
            std::cout << "wrote " << r.items << " items to " << r.output.string() << "\n";
        } else if (predict->parsed()) {
            const auto r = lmh::cmd_predict(cfg, opt_path(items));
            std::cout << "wrote " << r.preds.size() << " predictions to " << r.predictions.string()
                      << " (backend calls " << r.manifest["backend_calls"] << ", cache hits "
                      << r.manifest["cache_hits"] << ")\n";
        } else if (rules->parsed()) {
            const auto r = lmh::cmd_apply_rules(cfg, opt_path(predictions));
            std::cout << "flips 0->1: " << r.report.flips_0_to_1 << ", 1->0: " << r.report.flips_1_to_0
                      << ", untouched: " << r.report.untouched << "\n"
                      << "wrote " << r.adjusted.string() << "\n";
        } else if (evaluate->parsed()) {
            const auto r = lmh::cmd_evaluate(cfg, opt_path(predictions), opt_path(gold));
            std::cout << r.rendered.table;
        } else if (run->parsed()) {
            const auto r = lmh::cmd_run(cfg);
            std::cout << r.evaluate.rendered.table << "submission: " << r.submission.string() << "\n";
        }
    } catch (const lmh::Error& e) {
        std::cerr << "lmh: error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "lmh: unexpected failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
