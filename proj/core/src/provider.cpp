#include "lmh/provider.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <thread>
#include <unordered_map>

#include "lmh/digest.hpp"
#include "lmh/jsonl.hpp"

namespace lmh {

using nlohmann::json;

std::unique_ptr<Backend> make_http_backend(const ProviderConfig& cfg);

std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::http_chat: return "http_chat";
        case BackendKind::mock_oracle: return "mock_oracle";
        case BackendKind::mock_fixed: return "mock_fixed";
        case BackendKind::mock_scripted: return "mock_scripted";
    }
    return "?";
}

BackendKind parse_backend_kind(std::string_view name) {
    if (name == "http_chat" || name == "http") return BackendKind::http_chat;
    if (name == "mock_oracle") return BackendKind::mock_oracle;
    if (name == "mock_fixed") return BackendKind::mock_fixed;
    if (name == "mock_scripted") return BackendKind::mock_scripted;
    throw ConfigError("unknown backend \"" + std::string(name) + "\"");
}

void ProviderConfig::validate() const {
    if (runs < 1) throw ConfigError("provider.runs must be >= 1");
    if (parallelism < 1) throw ConfigError("provider.parallelism must be >= 1");
    if (temperature < 0.0) throw ConfigError("provider.temperature must be >= 0");
    if (max_retries < 0) throw ConfigError("provider.max_retries must be >= 0");
    if (backoff_base.count() < 0 || timeout.count() <= 0) {
        throw ConfigError("provider durations must be positive");
    }
    if (model_name.empty()) throw ConfigError("provider.model_name is empty");
    if (backend == BackendKind::http_chat && endpoint.empty()) {
        throw ConfigError("provider.endpoint is required for http_chat");
    }
    if (backend == BackendKind::mock_scripted && scripted_path.empty()) {
        throw ConfigError("provider.scripted_path is required for mock_scripted");
    }
}

json to_json(const ProviderConfig& cfg) {
    json doc = {
        {"backend", to_string(cfg.backend)},
        {"model_name", cfg.model_name},
        {"temperature", cfg.temperature},
        {"max_retries", cfg.max_retries},
        {"backoff_base_ms", cfg.backoff_base.count()},
        {"timeout_ms", cfg.timeout.count()},
        {"parallelism", cfg.parallelism},
        {"runs", cfg.runs},
        {"seed", cfg.seed},
        {"endpoint", cfg.endpoint},
        {"scripted_path", cfg.scripted_path.string()},
    };
    if (cfg.fixed_response) doc["fixed_response"] = *cfg.fixed_response;
    return doc;
}

ProviderConfig provider_config_from_json(const json& doc, ProviderConfig cfg) {
    if (!doc.is_object()) throw ConfigError("provider config must be an object");
    try {
        if (doc.contains("backend")) cfg.backend = parse_backend_kind(doc["backend"].get<std::string>());
        if (doc.contains("model_name")) cfg.model_name = doc["model_name"].get<std::string>();
        if (doc.contains("temperature")) cfg.temperature = doc["temperature"].get<double>();
        if (doc.contains("max_retries")) cfg.max_retries = doc["max_retries"].get<int>();
        if (doc.contains("backoff_base_ms")) {
            cfg.backoff_base = std::chrono::milliseconds(doc["backoff_base_ms"].get<std::int64_t>());
        }
        if (doc.contains("timeout_ms")) {
            cfg.timeout = std::chrono::milliseconds(doc["timeout_ms"].get<std::int64_t>());
        }
        if (doc.contains("parallelism")) cfg.parallelism = doc["parallelism"].get<int>();
        if (doc.contains("runs")) cfg.runs = doc["runs"].get<int>();
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("endpoint")) cfg.endpoint = doc["endpoint"].get<std::string>();
        if (doc.contains("scripted_path")) cfg.scripted_path = doc["scripted_path"].get<std::string>();
        if (doc.contains("fixed_response") && !doc["fixed_response"].is_null()) {
            cfg.fixed_response = doc["fixed_response"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("provider config: ") + e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// mock backends

namespace {

std::string mc_answer(std::string_view choice, std::string_view reasoning) {
    nlohmann::ordered_json doc = {{"correct_answer", choice}, {"reasoning", reasoning}};
    return doc.dump();
}

class OracleBackend final : public Backend {
public:
    explicit OracleBackend(TaskMode mode) : mode_(mode) {}

    std::string send(const CompletionRequest& req) override {
        if (!req.context.expected_answer) {
            throw ProviderRejection(400, "mock_oracle has no gold answer for \"" +
                                             req.context.key.value + "\"");
        }
        if (mode_ == TaskMode::binary) return *req.context.expected_answer;
        return mc_answer(*req.context.expected_answer, "oracle");
    }

private:
    TaskMode mode_;
};

class FixedBackend final : public Backend {
public:
    FixedBackend(TaskMode mode, std::optional<std::string> fixed)
        : response_(fixed ? *fixed
                          : mode == TaskMode::binary ? std::string("0")
                                                     : mc_answer(kNoneOfTheAbove, "fixed")) {}

    std::string send(const CompletionRequest&) override { return response_; }

private:
    std::string response_;
};

// Lines: {"key" | "question", "run_id", optional "record_id", "response"}.
class ScriptedBackend final : public Backend {
public:
    ScriptedBackend(const std::filesystem::path& path, Normalization level) {
        jsonl::for_each_line(path, [&](const json& doc, std::size_t line_no) {
            try {
                std::string key;
                if (doc.contains("key")) {
                    key = doc.at("key").get<std::string>();
                } else {
                    key = normalize_question(doc.at("question").get<std::string>(), level).value;
                }
                const int run = doc.value("run_id", 0);
                const std::string record = doc.value("record_id", std::string());
                responses_[slot(key, run, record)] = doc.at("response").get<std::string>();
            } catch (const json::exception& e) {
                throw MalformedLine(line_no, std::string("scripted response: ") + e.what());
            }
        });
    }

    std::string send(const CompletionRequest& req) override {
        const auto& key = req.context.key.value;
        if (!req.context.record_id.empty()) {
            if (auto it = responses_.find(slot(key, req.run_id, req.context.record_id));
                it != responses_.end()) {
                return it->second;
            }
        }
        if (auto it = responses_.find(slot(key, req.run_id, {})); it != responses_.end()) {
            return it->second;
        }
        throw ProviderRejection(404, "no scripted response for \"" + key + "\" run " +
                                         std::to_string(req.run_id));
    }

private:
    static std::string slot(std::string_view key, int run, std::string_view record) {
        std::string s(key);
        s += '\x1f';
        s += std::to_string(run);
        s += '\x1f';
        s += record;
        return s;
    }

    std::unordered_map<std::string, std::string> responses_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const ProviderConfig& cfg, TaskMode mode, Normalization level) {
    switch (cfg.backend) {
        case BackendKind::http_chat: return make_http_backend(cfg);
        case BackendKind::mock_oracle: return std::make_unique<OracleBackend>(mode);
        case BackendKind::mock_fixed: return std::make_unique<FixedBackend>(mode, cfg.fixed_response);
        case BackendKind::mock_scripted:
            return std::make_unique<ScriptedBackend>(cfg.scripted_path, level);
    }
    throw ConfigError("unsupported backend");
}

// ---------------------------------------------------------------------------
// cache

CacheKey CacheKey::of(std::string_view model_name, double temperature, const PromptBundle& bundle,
                      int run_id) {
    const json doc = {
        {"model", model_name},
        {"temperature", temperature},
        {"bundle", to_json(bundle)},
        {"run_id", run_id},
    };
    return {sha256_hex(doc.dump())};
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<std::string> ResponseCache::get(const CacheKey& key) const {
    const auto path = dir_ / (key.digest + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
        const json doc = json::parse(jsonl::read_file(path));
        return doc.at("raw").get<std::string>();
    } catch (const std::exception&) {
        return std::nullopt;  // unreadable entries count as misses
    }
}

void ResponseCache::put(const CacheKey& key, std::string_view raw, const json& request_meta) const {
    const json doc = {{"digest", key.digest}, {"raw", raw}, {"request", request_meta}};
    jsonl::write_file_atomic(dir_ / (key.digest + ".json"), doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// provider

ModelResponse decode_response(std::string raw, const PromptBundle& bundle) {
    ModelResponse r;
    if (bundle.mode == TaskMode::binary) {
        const BinaryParse p = parse_binary_response(raw);
        r.parse_status = p.status;
        if (p.label) {
            r.parsed_index = p.label;
            r.parsed_answer = std::to_string(*p.label);
        }
    } else {
        const McParse p = parse_mc_response(raw, bundle.choices);
        r.parse_status = p.index ? p.status : ParseStatus::unparseable;
        r.parsed_reasoning = p.reasoning;
        if (p.index) {
            r.parsed_index = p.index;
            r.parsed_answer = bundle.choices[static_cast<std::size_t>(*p.index)];
        }
    }
    r.raw = std::move(raw);
    return r;
}

Provider::Provider(ProviderConfig cfg, std::unique_ptr<Backend> backend,
                   std::optional<std::filesystem::path> cache_dir, Sleeper sleeper)
    : cfg_(std::move(cfg)), backend_(std::move(backend)), sleeper_(std::move(sleeper)) {
    cfg_.validate();
    if (!backend_) throw ConfigError("provider needs a backend");
    if (cache_dir && !cache_dir->empty()) cache_.emplace(*cache_dir);
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds Provider::backoff_delay(const CacheKey& key, int attempt) const {
    const std::uint64_t salt = std::stoull(key.digest.substr(0, 16), nullptr, 16);
    std::mt19937_64 rng(cfg_.seed ^ salt ^ static_cast<std::uint64_t>(attempt));
    const double jitter = 0.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0.5, 1.5)
    const double base = static_cast<double>(cfg_.backoff_base.count()) * static_cast<double>(1ULL << std::min(attempt, 20));
    return std::chrono::milliseconds(static_cast<std::int64_t>(base * jitter));
}

ModelResponse Provider::complete(const PromptBundle& bundle, int run_id, const RequestContext& ctx) {
    const auto started = std::chrono::steady_clock::now();
    const CacheKey key = CacheKey::of(cfg_.model_name, cfg_.temperature, bundle, run_id);

    if (cache_) {
        if (auto raw = cache_->get(key)) {
            ++cache_hits_;
            ModelResponse r = decode_response(std::move(*raw), bundle);
            r.from_cache = true;
            return r;
        }
    }
    ++cache_misses_;

    const CompletionRequest request{bundle, cfg_, ctx, run_id};
    std::string raw;
    for (int attempt = 0;; ++attempt) {
        try {
            ++backend_calls_;
            raw = backend_->send(request);
            break;
        } catch (const TransientFailure& e) {
            if (attempt >= cfg_.max_retries) {
                throw TransientExhausted("gave up after " + std::to_string(attempt + 1) +
                                         " attempts: " + e.what());
            }
            sleeper_(backoff_delay(key, attempt));
        }
    }

    if (cache_) {
        cache_->put(key, raw,
                    {{"model", cfg_.model_name},
                     {"temperature", cfg_.temperature},
                     {"run_id", run_id},
                     {"key", ctx.key.value},
                     {"record_id", ctx.record_id}});
    }
    ModelResponse r = decode_response(std::move(raw), bundle);
    r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    return r;
}

// ---------------------------------------------------------------------------
// aggregation

int majority_vote(std::span<const int> votes) {
    if (votes.empty()) throw Error("majority_vote: no votes");
    std::map<int, std::size_t> tally;
    for (int v : votes) ++tally[v];
    int best = tally.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [value, count] : tally) {
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

ChoicePrediction aggregate_runs(std::span<const ChoicePrediction> preds) {
    if (preds.empty()) throw Error("aggregate_runs: no predictions");
    std::vector<int> votes;
    votes.reserve(preds.size());
    for (const auto& p : preds) {
        if (p.key != preds.front().key) throw Error("aggregate_runs: predictions span several items");
        votes.push_back(p.chosen_index);
    }
    const int winner = majority_vote(votes);
    const ChoicePrediction* pick = nullptr;
    for (const auto& p : preds) {
        if (p.chosen_index != winner) continue;
        if (pick == nullptr || std::tie(p.run_id, p.reasoning) < std::tie(pick->run_id, pick->reasoning)) {
            pick = &p;
        }
    }
    return *pick;
}

}  // namespace lmh
