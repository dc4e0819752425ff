#include <httplib.h>

#include <cstdlib>
#include <regex>

#include "lmh/provider.hpp"

namespace lmh {

using nlohmann::json;

json chat_request_body(const PromptBundle& bundle, const ProviderConfig& cfg) {
    json messages = json::array();
    for (const auto& m : to_messages(bundle)) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    return {{"model", cfg.model_name}, {"temperature", cfg.temperature}, {"messages", std::move(messages)}};
}

std::string chat_response_content(std::string_view body) {
    const json doc = json::parse(body.begin(), body.end(), nullptr, false);
    if (doc.is_discarded()) throw ProviderRejection(200, "response body is not JSON");
    try {
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderRejection(200, std::string("unexpected response shape: ") + e.what());
    }
}

namespace {

bool retryable(int status) {
    return status == 408 || status == 409 || status == 425 || status == 429 || status >= 500;
}

class HttpChatBackend final : public Backend {
public:
    explicit HttpChatBackend(const ProviderConfig& cfg) {
        static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
        std::smatch m;
        if (!std::regex_match(cfg.endpoint, m, url)) {
            throw ConfigError("provider.endpoint is not an http(s) URL: " + cfg.endpoint);
        }
        origin_ = m[1].str();
        path_ = m[2].matched ? m[2].str() : "/";
        if (const char* key = std::getenv(std::string(kApiKeyEnv).c_str())) api_key_ = key;
    }

    std::string send(const CompletionRequest& req) override {
        // One client per call: httplib clients are not shareable across threads.
        httplib::Client client(origin_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(req.config.timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(req.config.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

        const std::string body = chat_request_body(req.bundle, req.config).dump();
        auto res = client.Post(path_, body, "application/json");
        if (!res) throw TransientFailure("HTTP error: " + httplib::to_string(res.error()));
        if (res->status >= 200 && res->status < 300) return chat_response_content(res->body);
        if (res->status == 401 || res->status == 403) {
            throw AuthFailure("endpoint refused credentials (status " + std::to_string(res->status) +
                              "); check " + std::string(kApiKeyEnv));
        }
        if (retryable(res->status)) {
            throw TransientFailure("status " + std::to_string(res->status));
        }
        throw ProviderRejection(res->status, res->body.substr(0, 512));
    }

private:
    std::string origin_;
    std::string path_;
    std::string api_key_;
};

}  // namespace

std::unique_ptr<Backend> make_http_backend(const ProviderConfig& cfg) {
    return std::make_unique<HttpChatBackend>(cfg);
}

}  // namespace lmh
