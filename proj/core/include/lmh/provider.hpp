#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmh/corpus.hpp"
#include "lmh/error.hpp"
#include "lmh/prompting.hpp"
#include "lmh/response_parser.hpp"
#include "lmh/taskform.hpp"

namespace lmh {

enum class BackendKind { http_chat, mock_oracle, mock_fixed, mock_scripted };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);

inline constexpr std::string_view kApiKeyEnv = "LMH_API_KEY";

struct ProviderConfig {
    BackendKind backend = BackendKind::http_chat;
    std::string model_name = "gpt-4";
    double temperature = 0.0;
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds timeout{60'000};
    int parallelism = 1;
    int runs = 3;
    std::uint64_t seed = 0;
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::filesystem::path scripted_path;
    /// Raw text returned by mock_fixed; a per-mode "negative" answer when unset.
    std::optional<std::string> fixed_response;

    /// Throws ConfigError when an invariant does not hold.
    void validate() const;
};

nlohmann::json to_json(const ProviderConfig& cfg);
ProviderConfig provider_config_from_json(const nlohmann::json& doc, ProviderConfig base = {});

/// Retryable backend failure (connection error, 429, 5xx).
class TransientFailure : public Error {
public:
    using Error::Error;
};

/// What a backend needs besides the prompt.
struct RequestContext {
    QuestionKey key;
    std::string record_id;
    /// Gold answer text; consulted only by the mock_oracle backend.
    std::optional<std::string> expected_answer;
};

struct CompletionRequest {
    const PromptBundle& bundle;
    const ProviderConfig& config;
    const RequestContext& context;
    int run_id;
};

/// A chat-completion endpoint. Implementations must be safe to call from
/// several threads and signal failures with TransientFailure, AuthFailure
/// or ProviderRejection.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string send(const CompletionRequest& request) = 0;
};

std::unique_ptr<Backend> make_backend(const ProviderConfig& cfg, TaskMode mode,
                                      Normalization level = Normalization::full);

/// JSON body of an OpenAI-style chat-completions request.
nlohmann::json chat_request_body(const PromptBundle& bundle, const ProviderConfig& cfg);

/// Extracts choices[0].message.content from a chat-completions response.
std::string chat_response_content(std::string_view body);

struct CacheKey {
    std::string digest;

    static CacheKey of(std::string_view model_name, double temperature, const PromptBundle& bundle,
                       int run_id);

    friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

/// Content-addressed response store: one "<digest>.json" file per key.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const CacheKey& key) const;
    void put(const CacheKey& key, std::string_view raw, const nlohmann::json& request_meta) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

struct ModelResponse {
    std::string raw;
    std::optional<std::string> parsed_answer;
    std::optional<int> parsed_index;  // choice index, or the label in binary mode
    std::optional<std::string> parsed_reasoning;
    ParseStatus parse_status = ParseStatus::unparseable;
    std::chrono::milliseconds latency{0};
    bool from_cache = false;
};

/// Decodes `raw` according to the bundle's mode.
ModelResponse decode_response(std::string raw, const PromptBundle& bundle);

class Provider {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Provider(ProviderConfig cfg, std::unique_ptr<Backend> backend,
             std::optional<std::filesystem::path> cache_dir = std::nullopt, Sleeper sleeper = {});

    /// Cache first; on a miss the backend is tried up to 1 + max_retries
    /// times with jittered exponential backoff between transient failures.
    ModelResponse complete(const PromptBundle& bundle, int run_id, const RequestContext& ctx = {});

    const ProviderConfig& config() const { return cfg_; }
    std::size_t backend_calls() const { return backend_calls_.load(); }
    std::size_t cache_hits() const { return cache_hits_.load(); }
    std::size_t cache_misses() const { return cache_misses_.load(); }

private:
    std::chrono::milliseconds backoff_delay(const CacheKey& key, int attempt) const;

    ProviderConfig cfg_;
    std::unique_ptr<Backend> backend_;
    std::optional<ResponseCache> cache_;
    Sleeper sleeper_;
    std::atomic<std::size_t> backend_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
    std::atomic<std::size_t> cache_misses_{0};
};

/// Majority vote; ties go to the smallest value.
int majority_vote(std::span<const int> votes);

/// Majority vote over chosen_index. The result carries the reasoning and
/// run_id of the lowest-numbered winning run, so input order is irrelevant.
ChoicePrediction aggregate_runs(std::span<const ChoicePrediction> preds);

}  // namespace lmh
