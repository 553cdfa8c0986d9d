#include <gtest/gtest.h>

#include <cstdlib>

#include "lensreview/error.hpp"
#include "lensreview/gateway.hpp"
#include "lensreview/hash.hpp"
#include "test_support.hpp"

using namespace lensreview;
using testing_support::LocalServer;
using testing_support::TempDir;

namespace {

PromptText prompt(const std::string& body, Condition c = Condition::disposition) {
    return PromptText{c, body, sha256_hex(body), 3};
}

const PrKey kPr{"acme/app", 12};

ModelConfig config(std::string provider, std::string model) {
    ModelConfig c;
    c.provider_id = std::move(provider);
    c.model_id = std::move(model);
    return c;
}

// Fails with a transport error a fixed number of times, then answers.
class FlakyProvider : public Provider {
public:
    FlakyProvider(int failures, bool timed_out, int* calls) : failures_(failures), timed_out_(timed_out), calls_(calls) {}
    ProviderReply complete(const PromptText&, const ModelConfig&) override {
        if ((*calls_)++ < failures_) throw TransportError("connection reset", timed_out_);
        return ProviderReply{"ok", false, 0.5};
    }

private:
    int failures_;
    bool timed_out_;
    int* calls_;
};

ProviderRegistry flaky(int failures, bool timed_out, int* calls) {
    ProviderRegistry reg;
    reg.register_provider("flaky", [=](const ModelConfig&) -> std::unique_ptr<Provider> {
        return std::make_unique<FlakyProvider>(failures, timed_out, calls);
    });
    return reg;
}

}  // namespace

TEST(MockProvider, LooksUpByDigest) {
    auto p = prompt("hello");
    auto mock = MockProvider::from_script(
        {{"responses", {{p.digest, "scripted"}}}, {"default", "fallback"}, {"truncated", {p.digest}}});
    auto cfg = config("mock", "m");
    auto r = mock->complete(p, cfg);
    EXPECT_EQ(r.text, "scripted");
    EXPECT_TRUE(r.truncated);
    auto other = mock->complete(prompt("other"), cfg);
    EXPECT_EQ(other.text, "fallback");
    EXPECT_FALSE(other.truncated);
    EXPECT_EQ(mock->calls(), 2u);

    MockProvider bare({});
    EXPECT_THROW(bare.complete(p, cfg), ProviderError);
}

TEST(MockProvider, ScriptFileErrors) {
    TempDir dir;
    testing_support::spit(dir / "bad.json", "not json");
    EXPECT_THROW(MockProvider::from_script_file(dir / "bad.json"), ProviderError);
}

TEST(ProviderToken, VariableName) {
    EXPECT_EQ(provider_token_variable("openai"), "LENSREVIEW_PROVIDER_TOKEN_OPENAI");
    EXPECT_EQ(provider_token_variable("my-lab.v2"), "LENSREVIEW_PROVIDER_TOKEN_MY_LAB_V2");
}

TEST(ProviderRegistryTest, UnknownProvider) {
    auto reg = ProviderRegistry::with_defaults();
    EXPECT_TRUE(reg.has("mock"));
    EXPECT_TRUE(reg.has("openai"));
    EXPECT_TRUE(reg.has("anthropic"));
    EXPECT_THROW(reg.resolve(config("nobody", "m")), ProviderError);
}

TEST(RunStoreTest, SequencesAndLatest) {
    TempDir dir;
    RunStore store(dir.path());
    RunRecord r;
    r.config = config("mock", "m");
    r.prompt_digest = "d";
    r.pr = kPr;
    r.response_text = "first";
    auto a = store.append(r);
    r.response_text = "second";
    auto b = store.append(r);
    auto key = RunStore::request_key(kPr, Condition::disposition, "m", "d");
    EXPECT_EQ(key.size(), 16u);
    EXPECT_EQ(a.request_id, key + "-1");
    EXPECT_EQ(b.request_id, key + "-2");

    auto latest = store.find_latest(kPr, Condition::disposition, "m", "d");
    ASSERT_TRUE(latest);
    EXPECT_EQ(latest->response_text, "second");
    EXPECT_FALSE(store.find_latest(kPr, Condition::generic, "m", "d"));
    EXPECT_EQ(store.load(a.request_id).response_text, "first");
    EXPECT_EQ(store.all().size(), 2u);

    EXPECT_THROW(store.load(""), UnknownRun);
    EXPECT_THROW(store.load("../x"), UnknownRun);
    EXPECT_THROW(store.load("deadbeef-9"), UnknownRun);
}

TEST(RunStoreTest, KeyDependsOnEveryComponent) {
    auto base = RunStore::request_key(kPr, Condition::disposition, "m", "d");
    EXPECT_NE(base, RunStore::request_key(PrKey{"acme/app", 13}, Condition::disposition, "m", "d"));
    EXPECT_NE(base, RunStore::request_key(kPr, Condition::generic, "m", "d"));
    EXPECT_NE(base, RunStore::request_key(kPr, Condition::disposition, "n", "d"));
    EXPECT_NE(base, RunStore::request_key(kPr, Condition::disposition, "m", "e"));
}

TEST(GatewayTest, SubmitPersistsAndReplaysByteExact) {
    TempDir dir;
    RunStore store(dir.path());
    auto p = prompt("review this");
    std::string text = "  ### LENS 1\n\xce\xbb tab\there  \n";
    ProviderRegistry reg;
    reg.register_provider("mock", [&](const ModelConfig&) -> std::unique_ptr<Provider> {
        return std::make_unique<MockProvider>(std::map<std::string, std::string>{{p.digest, text}});
    });
    Gateway gw(store, reg);
    auto cfg = config("mock", "m");
    cfg.temperature = 0.0;
    auto r = gw.submit(p, cfg, kPr);
    EXPECT_EQ(r.text, text);
    EXPECT_EQ(r.prompt_digest, p.digest);

    auto rec = store.load(r.request_id);
    EXPECT_EQ(rec.attempts, 1);
    EXPECT_EQ(rec.message_channel, "user");
    ASSERT_TRUE(rec.effective_temperature);
    EXPECT_EQ(*rec.effective_temperature, 0.0);
    EXPECT_EQ(rec.config, cfg);

    EXPECT_EQ(gw.replay(r.request_id).text, text);
    auto latest = gw.replay_latest(kPr, Condition::disposition, "m", p.digest);
    ASSERT_TRUE(latest);
    EXPECT_EQ(latest->request_id, r.request_id);
    EXPECT_THROW(gw.replay("missing-1"), UnknownRun);
}

TEST(GatewayTest, RetriesTransportErrorsTwice) {
    TempDir dir;
    RunStore store(dir.path());
    int calls = 0;
    Gateway gw(store, flaky(2, true, &calls));
    auto r = gw.submit(prompt("x"), config("flaky", "m"), kPr);
    EXPECT_EQ(calls, 3);
    EXPECT_EQ(store.load(r.request_id).attempts, 3);
    EXPECT_EQ(*store.load(r.request_id).effective_temperature, 0.5);
}

TEST(GatewayTest, ExhaustedRetriesRaiseTimeoutOrProviderError) {
    TempDir dir;
    RunStore store(dir.path());
    int calls = 0;
    Gateway timing_out(store, flaky(3, true, &calls));
    EXPECT_THROW(timing_out.submit(prompt("x"), config("flaky", "m"), kPr), Timeout);
    EXPECT_EQ(calls, 3);

    calls = 0;
    Gateway refused(store, flaky(3, false, &calls));
    EXPECT_THROW(refused.submit(prompt("x"), config("flaky", "m"), kPr), ProviderError);
    EXPECT_EQ(calls, 3);
    EXPECT_TRUE(store.all().empty());
}

TEST(HttpProviders, OpenAIChatWireFormat) {
    LocalServer srv;
    json seen;
    std::string auth;
    srv.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"message":{"content":"done"},"finish_reason":"length"}]})", "application/json");
    });
    srv.start();
    OpenAIChatProvider p(make_http_client(srv.url()), "tok");
    auto cfg = config("openai", "gpt-x");
    cfg.temperature = 0.2;
    cfg.max_output_tokens = 100;
    auto r = p.complete(prompt("body"), cfg);
    EXPECT_EQ(r.text, "done");
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(auth, "Bearer tok");
    EXPECT_EQ(seen["model"], "gpt-x");
    EXPECT_EQ(seen["messages"][0]["role"], "user");
    EXPECT_EQ(seen["messages"][0]["content"], "body");
    EXPECT_EQ(seen["max_completion_tokens"], 100);
}

TEST(HttpProviders, AnthropicMessagesWireFormat) {
    LocalServer srv;
    json seen;
    std::string key, version;
    srv.server().Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        key = req.get_header_value("x-api-key");
        version = req.get_header_value("anthropic-version");
        res.set_content(
            R"({"content":[{"type":"text","text":"a"},{"type":"tool_use"},{"type":"text","text":"b"}],"stop_reason":"end_turn"})",
            "application/json");
    });
    srv.start();
    AnthropicProvider p(make_http_client(srv.url()), "k");
    auto r = p.complete(prompt("body"), config("anthropic", "claude-x"));
    EXPECT_EQ(r.text, "ab");
    EXPECT_FALSE(r.truncated);
    EXPECT_EQ(key, "k");
    EXPECT_EQ(version, "2023-06-01");
    EXPECT_EQ(seen["max_tokens"], AnthropicProvider::kDefaultMaxTokens);
    EXPECT_FALSE(seen.contains("temperature"));
}

TEST(HttpProviders, StatusMapping) {
    LocalServer srv;
    int status = 401;
    srv.server().Post("/v1/messages", [&](const httplib::Request&, httplib::Response& res) {
        res.status = status;
        res.set_content(status == 200 ? "garbage" : "{}", "application/json");
    });
    srv.start();
    AnthropicProvider p(make_http_client(srv.url()), "");
    auto cfg = config("anthropic", "m");
    EXPECT_THROW(p.complete(prompt("x"), cfg), ProviderError);
    status = 400;
    EXPECT_THROW(p.complete(prompt("x"), cfg), ProviderError);
    status = 503;
    EXPECT_THROW(p.complete(prompt("x"), cfg), TransportError);
    status = 200;
    EXPECT_THROW(p.complete(prompt("x"), cfg), ProviderError);
}

TEST(HttpProviders, RegistryReadsTokenAndEndpoint) {
    LocalServer srv;
    std::string auth;
    srv.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices":[{"message":{"content":"x"},"finish_reason":"stop"}]})", "application/json");
    });
    srv.start();
    ::setenv("LENSREVIEW_PROVIDER_TOKEN_OPENAI", "from-env", 1);
    auto cfg = config("openai", "m");
    cfg.endpoint = srv.url();
    auto p = ProviderRegistry::with_defaults().resolve(cfg);
    EXPECT_FALSE(p->complete(prompt("x"), cfg).truncated);
    EXPECT_EQ(auth, "Bearer from-env");
    ::unsetenv("LENSREVIEW_PROVIDER_TOKEN_OPENAI");
}
