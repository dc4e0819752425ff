#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "lmh/corpus.hpp"
#include "lmh/metrics.hpp"
#include "lmh/prompting.hpp"
#include "lmh/response_parser.hpp"
#include "lmh/rules.hpp"
#include "lmh/taskform.hpp"

namespace {

using namespace lmh;

std::vector<CandidateRecord> corpus(int questions, int candidates, Split split) {
    std::vector<CandidateRecord> out;
    for (int q = 0; q < questions; ++q) {
        for (int c = 0; c < candidates; ++c) {
            CandidateRecord r;
            r.record_id = std::to_string(q) + "-" + std::to_string(c);
            r.question = "Under which rule is question " + std::to_string(q) + " resolved?";
            r.explanation = "Background for question " + std::to_string(q) + ".";
            r.candidate = "Candidate " + std::to_string(c);
            r.label = (c == q % (candidates + 1)) ? 1 : 0;
            r.analysis = "Analysis " + std::to_string(c);
            r.split = split;
            out.push_back(std::move(r));
        }
    }
    return out;
}

void BM_NormalizeQuestion(benchmark::State& state) {
    const std::string q = "  Which   RULE governs the ﬁling deadline for a Reply Brief?  ";
    for (auto _ : state) benchmark::DoNotOptimize(normalize_question(q));
}
BENCHMARK(BM_NormalizeQuestion);

void BM_ParseMcResponse(benchmark::State& state) {
    const std::vector<std::string> choices = {"Rule 12(b)(6) motion", "Summary judgment", "None of the Above"};
    const std::string raw =
        "Here is my answer:\n```json\n{\"correct_answer\": \"Summary judgment\", \"reasoning\": \"No dispute.\"}\n```";
    for (auto _ : state) benchmark::DoNotOptimize(parse_mc_response(raw, choices));
}
BENCHMARK(BM_ParseMcResponse);

void BM_Score(benchmark::State& state) {
    const auto gold = corpus(static_cast<int>(state.range(0)), 4, Split::test);
    std::vector<BinaryPrediction> preds;
    std::mt19937_64 rng(1);
    for (const auto& r : gold) preds.push_back({r.record_id, {r.question}, static_cast<int>(rng() % 2), Provenance::model});
    for (auto _ : state) {
        const auto paired = confusion(preds, gold);
        benchmark::DoNotOptimize(score(paired.counts, paired.n_skipped));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(preds.size()));
}
BENCHMARK(BM_Score)->Arg(100)->Arg(1000);

void BM_ApplyRules(benchmark::State& state) {
    const auto labeled = corpus(static_cast<int>(state.range(0)), 4, Split::train);
    const auto index = build_label_index(labeled);
    std::vector<BinaryPrediction> preds;
    for (const auto& r : labeled) preds.push_back({r.record_id, normalize_question(r.question), 0, Provenance::model});
    for (auto _ : state) benchmark::DoNotOptimize(apply_rules(preds, index));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(preds.size()));
}
BENCHMARK(BM_ApplyRules)->Arg(100)->Arg(1000);

void BM_BuildPrompt(benchmark::State& state) {
    const auto groups = group_by_question(corpus(20, 4, Split::train));
    const auto shots = select_shots(groups, TaskMode::multi_choice, 0);
    const auto item = to_multi_choice(groups.front());
    for (auto _ : state) {
        auto bundle = build_prompt(mc_block(item), shots, TaskMode::multi_choice, item.choices);
        benchmark::DoNotOptimize(fit_to_budget(std::move(bundle), 16000));
    }
}
BENCHMARK(BM_BuildPrompt);

}  // namespace

BENCHMARK_MAIN();
