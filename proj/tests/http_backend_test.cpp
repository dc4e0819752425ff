#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "lmh/provider.hpp"

namespace lmh {
namespace {

using nlohmann::json;

json completion_body(const std::string& content) {
    return {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

// Local chat-completions endpoint that replays a list of status codes.
class FakeEndpoint {
public:
    explicit FakeEndpoint(std::vector<int> statuses) : statuses_(std::move(statuses)) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(mu_);
            bodies_.push_back(req.body);
            auth_.push_back(req.get_header_value("Authorization"));
            const std::size_t i = std::min(hits_++, statuses_.size() - 1);
            res.status = statuses_[i];
            res.set_content(res.status == 200 ? completion_body(R"({"correct_answer": "A"})").dump()
                                              : std::string("{\"error\": \"nope\"}"),
                            "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeEndpoint() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
    std::size_t hits() {
        std::lock_guard lock(mu_);
        return hits_;
    }
    std::vector<std::string> bodies() {
        std::lock_guard lock(mu_);
        return bodies_;
    }
    std::vector<std::string> auth() {
        std::lock_guard lock(mu_);
        return auth_;
    }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::mutex mu_;
    std::vector<int> statuses_;
    std::size_t hits_ = 0;
    std::vector<std::string> bodies_;
    std::vector<std::string> auth_;
};

PromptBundle bundle() {
    const std::vector<Shot> shots = {{"shot query", "shot answer"}};
    return build_prompt({"Q?", "ctx", "Choices", "{0: A, \n1: None of the Above}"}, shots,
                        TaskMode::multi_choice, {"A", "None of the Above"});
}

ProviderConfig http_config(const std::string& url) {
    ProviderConfig cfg;
    cfg.endpoint = url;
    cfg.model_name = "test-model";
    cfg.backoff_base = std::chrono::milliseconds(1);
    cfg.timeout = std::chrono::milliseconds(5000);
    cfg.max_retries = 2;
    return cfg;
}

TEST(HttpBackend, SendsChatRequestAndParsesContent) {
    FakeEndpoint ep({200});
    ::setenv("LMH_API_KEY", "sk-test", 1);
    const auto cfg = http_config(ep.url());
    Provider p(cfg, make_backend(cfg, TaskMode::multi_choice), std::nullopt, [](auto) {});
    ::unsetenv("LMH_API_KEY");

    const auto r = p.complete(bundle(), 0);
    EXPECT_EQ(r.parsed_index, 0);
    ASSERT_EQ(ep.bodies().size(), 1u);
    const json sent = json::parse(ep.bodies()[0]);
    EXPECT_EQ(sent.at("model"), "test-model");
    EXPECT_EQ(sent.at("temperature"), 0.0);
    const auto& msgs = sent.at("messages");
    ASSERT_EQ(msgs.size(), 4u);
    EXPECT_EQ(msgs[0].at("role"), "system");
    EXPECT_EQ(msgs[1].at("role"), "user");
    EXPECT_EQ(msgs[1].at("content"), "shot query");
    EXPECT_EQ(msgs[2].at("role"), "assistant");
    EXPECT_EQ(msgs[2].at("content"), "shot answer");
    EXPECT_EQ(msgs[3].at("role"), "user");
    EXPECT_EQ(msgs[3].at("content"), bundle().query.render());
    EXPECT_EQ(ep.auth()[0], "Bearer sk-test");
}

TEST(HttpBackend, RetriesServerErrorsThenSucceeds) {
    FakeEndpoint ep({500, 429, 200});
    const auto cfg = http_config(ep.url());
    Provider p(cfg, make_backend(cfg, TaskMode::multi_choice), std::nullopt, [](auto) {});
    EXPECT_EQ(p.complete(bundle(), 0).parsed_index, 0);
    EXPECT_EQ(ep.hits(), 3u);
}

TEST(HttpBackend, StatusMapping) {
    {
        FakeEndpoint ep({401});
        const auto cfg = http_config(ep.url());
        Provider p(cfg, make_backend(cfg, TaskMode::multi_choice), std::nullopt, [](auto) {});
        EXPECT_THROW(p.complete(bundle(), 0), AuthFailure);
        EXPECT_EQ(ep.hits(), 1u);
    }
    {
        FakeEndpoint ep({400});
        const auto cfg = http_config(ep.url());
        Provider p(cfg, make_backend(cfg, TaskMode::multi_choice), std::nullopt, [](auto) {});
        EXPECT_THROW(p.complete(bundle(), 0), ProviderRejection);
        EXPECT_EQ(ep.hits(), 1u);
    }
    {
        FakeEndpoint ep({503});
        const auto cfg = http_config(ep.url());
        Provider p(cfg, make_backend(cfg, TaskMode::multi_choice), std::nullopt, [](auto) {});
        EXPECT_THROW(p.complete(bundle(), 0), TransientExhausted);
        EXPECT_EQ(ep.hits(), 3u);
    }
}

TEST(HttpBackend, BadEndpointIsConfigError) {
    auto cfg = http_config("ftp://example.com/x");
    EXPECT_THROW(make_backend(cfg, TaskMode::multi_choice), ConfigError);
}

TEST(HttpBackend, ResponseContentShape) {
    EXPECT_EQ(chat_response_content(completion_body("hi").dump()), "hi");
    EXPECT_THROW(chat_response_content("not json"), ProviderRejection);
    EXPECT_THROW(chat_response_content(R"({"choices": []})"), ProviderRejection);
}

}  // namespace
}  // namespace lmh
