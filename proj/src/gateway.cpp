// Copyright 2026 The lensreview Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lensreview/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "lensreview/error.hpp"
#include "lensreview/hash.hpp"

namespace lensreview {

namespace {

std::string utc_now() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_reply(const HttpResponse& r, const char* provider) {
    if (r.status == 401 || r.status == 403) {
        throw ProviderError(std::string(provider) + ": authentication failed (HTTP " + std::to_string(r.status) + ")");
    }
    if (r.status == 429 || r.status >= 500) {
        throw TransportError(std::string(provider) + ": HTTP " + std::to_string(r.status), false);
    }
    if (r.status < 200 || r.status >= 300) {
        throw ProviderError(std::string(provider) + ": HTTP " + std::to_string(r.status) + ": " + r.body);
    }
    auto j = json::parse(r.body, nullptr, false);
    if (j.is_discarded()) throw ProviderError(std::string(provider) + ": response is not JSON");
    return j;
}

std::string token_for(const std::string& provider_id) {
    const char* v = std::getenv(provider_token_variable(provider_id).c_str());
    return v ? v : "";
}

}  // namespace

void to_json(json& j, const ModelConfig& c) {
    j = json{{"provider_id", c.provider_id}, {"model_id", c.model_id}};
    if (c.temperature) j["temperature"] = *c.temperature;
    if (c.max_output_tokens) j["max_output_tokens"] = *c.max_output_tokens;
    if (c.endpoint) j["endpoint"] = *c.endpoint;
    if (c.script) j["script"] = *c.script;
}

void from_json(const json& j, ModelConfig& c) {
    c = ModelConfig{};
    c.provider_id = j.at("provider_id").get<std::string>();
    c.model_id = j.at("model_id").get<std::string>();
    if (j.contains("temperature") && !j["temperature"].is_null()) c.temperature = j["temperature"].get<double>();
    if (j.contains("max_output_tokens") && !j["max_output_tokens"].is_null()) {
        c.max_output_tokens = j["max_output_tokens"].get<std::uint32_t>();
    }
    if (j.contains("endpoint") && !j["endpoint"].is_null()) c.endpoint = j["endpoint"].get<std::string>();
    if (j.contains("script") && !j["script"].is_null()) c.script = j["script"].get<std::string>();
}

// -- providers --------------------------------------------------------------

MockProvider::MockProvider(std::map<std::string, std::string> by_digest, std::optional<std::string> fallback,
                           std::vector<std::string> truncated_digests)
    : by_digest_(std::move(by_digest)), fallback_(std::move(fallback)), truncated_(std::move(truncated_digests)) {}

std::unique_ptr<MockProvider> MockProvider::from_script(const json& script) {
    std::map<std::string, std::string> responses;
    if (script.contains("responses")) responses = script["responses"].get<std::map<std::string, std::string>>();
    std::optional<std::string> fallback;
    if (script.contains("default") && script["default"].is_string()) fallback = script["default"].get<std::string>();
    std::vector<std::string> truncated;
    if (script.contains("truncated")) truncated = script["truncated"].get<std::vector<std::string>>();
    return std::make_unique<MockProvider>(std::move(responses), std::move(fallback), std::move(truncated));
}

std::unique_ptr<MockProvider> MockProvider::from_script_file(const std::filesystem::path& path) {
    auto j = json::parse(read_text(path), nullptr, false);
    if (j.is_discarded()) throw ProviderError("mock script " + path.string() + " is not valid JSON");
    return from_script(j);
}

ProviderReply MockProvider::complete(const PromptText& prompt, const ModelConfig&) {
    ++calls_;
    ProviderReply reply;
    auto it = by_digest_.find(prompt.digest);
    if (it != by_digest_.end()) {
        reply.text = it->second;
    } else if (fallback_) {
        reply.text = *fallback_;
    } else {
        throw ProviderError("mock: no scripted response for prompt " + prompt.digest);
    }
    reply.truncated = std::find(truncated_.begin(), truncated_.end(), prompt.digest) != truncated_.end();
    return reply;
}

OpenAIChatProvider::OpenAIChatProvider(std::unique_ptr<HttpClient> http, std::string token)
    : http_(std::move(http)), token_(std::move(token)) {}

ProviderReply OpenAIChatProvider::complete(const PromptText& prompt, const ModelConfig& config) {
    json req = {{"model", config.model_id}, {"messages", json::array({{{"role", "user"}, {"content", prompt.body}}})}};
    if (config.temperature) req["temperature"] = *config.temperature;
    if (config.max_output_tokens) req["max_completion_tokens"] = *config.max_output_tokens;
    HttpHeaders headers;
    if (!token_.empty()) headers.emplace_back("Authorization", "Bearer " + token_);
    auto j = parse_reply(http_->post("/v1/chat/completions", req.dump(), "application/json", headers), "openai");
    try {
        const auto& choice = j.at("choices").at(0);
        ProviderReply reply;
        const auto& content = choice.at("message").at("content");
        reply.text = content.is_string() ? content.get<std::string>() : "";
        reply.truncated = choice.value("finish_reason", std::string()) == "length";
        return reply;
    } catch (const json::exception& e) {
        throw ProviderError(std::string("openai: unexpected response shape: ") + e.what());
    }
}

AnthropicProvider::AnthropicProvider(std::unique_ptr<HttpClient> http, std::string token)
    : http_(std::move(http)), token_(std::move(token)) {}

ProviderReply AnthropicProvider::complete(const PromptText& prompt, const ModelConfig& config) {
    json req = {{"model", config.model_id},
                {"max_tokens", config.max_output_tokens.value_or(kDefaultMaxTokens)},
                {"messages", json::array({{{"role", "user"}, {"content", prompt.body}}})}};
    if (config.temperature) req["temperature"] = *config.temperature;
    HttpHeaders headers = {{"anthropic-version", "2023-06-01"}};
    if (!token_.empty()) headers.emplace_back("x-api-key", token_);
    auto j = parse_reply(http_->post("/v1/messages", req.dump(), "application/json", headers), "anthropic");
    try {
        ProviderReply reply;
        for (const auto& block : j.at("content")) {
            if (block.value("type", std::string()) == "text") reply.text += block.at("text").get<std::string>();
        }
        reply.truncated = j.value("stop_reason", std::string()) == "max_tokens";
        return reply;
    } catch (const json::exception& e) {
        throw ProviderError(std::string("anthropic: unexpected response shape: ") + e.what());
    }
}

std::string provider_token_variable(const std::string& provider_id) {
    std::string suffix = provider_id;
    for (auto& ch : suffix) {
        ch = std::isalnum(static_cast<unsigned char>(ch)) ? static_cast<char>(std::toupper(static_cast<unsigned char>(ch)))
                                                          : '_';
    }
    return "LENSREVIEW_PROVIDER_TOKEN_" + suffix;
}

ProviderRegistry ProviderRegistry::with_defaults() {
    ProviderRegistry reg;
    reg.register_provider("mock", [](const ModelConfig& c) -> std::unique_ptr<Provider> {
        if (c.script) return MockProvider::from_script_file(*c.script);
        return std::make_unique<MockProvider>(std::map<std::string, std::string>{});
    });
    reg.register_provider("openai", [](const ModelConfig& c) -> std::unique_ptr<Provider> {
        return std::make_unique<OpenAIChatProvider>(make_http_client(c.endpoint.value_or("https://api.openai.com")),
                                                    token_for(c.provider_id));
    });
    reg.register_provider("anthropic", [](const ModelConfig& c) -> std::unique_ptr<Provider> {
        return std::make_unique<AnthropicProvider>(make_http_client(c.endpoint.value_or("https://api.anthropic.com")),
                                                   token_for(c.provider_id));
    });
    return reg;
}

void ProviderRegistry::register_provider(const std::string& id, Factory factory) {
    factories_[id] = std::move(factory);
}

std::unique_ptr<Provider> ProviderRegistry::resolve(const ModelConfig& config) const {
    auto it = factories_.find(config.provider_id);
    if (it == factories_.end()) throw ProviderError("unknown provider '" + config.provider_id + "'");
    return it->second(config);
}

// -- run store --------------------------------------------------------------

void to_json(json& j, const RunRecord& r) {
    j = json{{"request_id", r.request_id},
             {"timestamp", r.timestamp},
             {"config", r.config},
             {"prompt_digest", r.prompt_digest},
             {"condition", to_string(r.condition)},
             {"pr", {{"repo", r.pr.repo}, {"number", r.pr.number}}},
             {"response_text", r.response_text},
             {"latency_ms", r.latency_ms},
             {"truncated", r.truncated},
             {"message_channel", r.message_channel},
             {"effective_temperature", r.effective_temperature ? json(*r.effective_temperature) : json(nullptr)},
             {"attempts", r.attempts}};
}

void from_json(const json& j, RunRecord& r) {
    r.request_id = j.at("request_id").get<std::string>();
    r.timestamp = j.value("timestamp", std::string());
    r.config = j.at("config").get<ModelConfig>();
    r.prompt_digest = j.at("prompt_digest").get<std::string>();
    auto cond = condition_from_string(j.at("condition").get<std::string>());
    if (!cond) throw Error("run record " + r.request_id + ": bad condition");
    r.condition = *cond;
    r.pr.repo = j.at("pr").at("repo").get<std::string>();
    r.pr.number = j.at("pr").at("number").get<std::uint32_t>();
    r.response_text = j.at("response_text").get<std::string>();
    r.latency_ms = j.value("latency_ms", std::uint64_t{0});
    r.truncated = j.value("truncated", false);
    r.message_channel = j.value("message_channel", std::string("user"));
    if (j.contains("effective_temperature") && !j["effective_temperature"].is_null()) {
        r.effective_temperature = j["effective_temperature"].get<double>();
    }
    r.attempts = j.value("attempts", 1);
}

RunStore::RunStore(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

std::string RunStore::request_key(const PrKey& pr, Condition condition, const std::string& model_id,
                                  const std::string& prompt_digest) {
    auto material = std::string(to_string(condition)) + "|" + pr.repo + "|" + std::to_string(pr.number) + "|" +
                    model_id + "|" + prompt_digest;
    return sha256_hex(material).substr(0, 16);
}

RunRecord RunStore::append(RunRecord record) {
    std::lock_guard lock(mu_);
    auto key = request_key(record.pr, record.condition, record.config.model_id, record.prompt_digest);
    int seq = 1;
    while (std::filesystem::exists(dir_ / (key + "-" + std::to_string(seq) + ".json"))) ++seq;
    record.request_id = key + "-" + std::to_string(seq);
    auto final_path = dir_ / (record.request_id + ".json");
    auto tmp_path = dir_ / (record.request_id + ".json.tmp");
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("run store: cannot write " + tmp_path.string());
        out << json(record).dump(2) << '\n';
    }
    std::filesystem::rename(tmp_path, final_path);
    return record;
}

RunRecord RunStore::load(const std::string& request_id) const {
    auto path = dir_ / (request_id + ".json");
    if (request_id.empty() || request_id.find('/') != std::string::npos || !std::filesystem::exists(path)) {
        throw UnknownRun("unknown run '" + request_id + "'");
    }
    auto j = json::parse(read_text(path), nullptr, false);
    if (j.is_discarded()) throw Error("run store: corrupt record " + path.string());
    return j.get<RunRecord>();
}

std::optional<RunRecord> RunStore::find_latest(const PrKey& pr, Condition condition, const std::string& model_id,
                                               const std::string& prompt_digest) const {
    auto key = request_key(pr, condition, model_id, prompt_digest);
    int seq = 0;
    while (std::filesystem::exists(dir_ / (key + "-" + std::to_string(seq + 1) + ".json"))) ++seq;
    if (seq == 0) return std::nullopt;
    return load(key + "-" + std::to_string(seq));
}

std::vector<RunRecord> RunStore::all() const {
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
        if (e.path().extension() == ".json") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<RunRecord> out;
    for (const auto& p : paths) out.push_back(load(p.stem().string()));
    return out;
}

// -- gateway ----------------------------------------------------------------

Gateway::Gateway(RunStore& store, ProviderRegistry providers) : store_(store), providers_(std::move(providers)) {}

RawResponse Gateway::submit(const PromptText& prompt, const ModelConfig& config, const PrKey& pr) {
    auto provider = providers_.resolve(config);
    ProviderReply reply;
    int attempts = 0;
    auto start = std::chrono::steady_clock::now();
    for (;;) {
        ++attempts;
        try {
            reply = provider->complete(prompt, config);
            break;
        } catch (const TransportError& e) {
            if (attempts > kMaxTransportRetries) {
                if (e.timed_out()) throw Timeout(std::string("provider timed out: ") + e.what());
                throw ProviderError(std::string("provider unreachable: ") + e.what());
            }
        }
    }
    auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

    RunRecord rec;
    rec.timestamp = utc_now();
    rec.config = config;
    rec.prompt_digest = prompt.digest;
    rec.condition = prompt.condition;
    rec.pr = pr;
    rec.response_text = reply.text;
    rec.latency_ms = static_cast<std::uint64_t>(latency.count());
    rec.truncated = reply.truncated;
    rec.effective_temperature = reply.effective_temperature ? reply.effective_temperature : config.temperature;
    rec.attempts = attempts;
    rec = store_.append(std::move(rec));

    return RawResponse{rec.response_text, config.model_id, rec.prompt_digest, rec.latency_ms, rec.request_id,
                       rec.truncated};
}

RawResponse Gateway::replay(const std::string& run_id) const {
    auto rec = store_.load(run_id);
    return RawResponse{rec.response_text, rec.config.model_id, rec.prompt_digest, rec.latency_ms, rec.request_id,
                       rec.truncated};
}

std::optional<RawResponse> Gateway::replay_latest(const PrKey& pr, Condition condition, const std::string& model_id,
                                                  const std::string& prompt_digest) const {
    auto rec = store_.find_latest(pr, condition, model_id, prompt_digest);
    if (!rec) return std::nullopt;
    return RawResponse{rec->response_text, rec->config.model_id, rec->prompt_digest, rec->latency_ms,
                       rec->request_id, rec->truncated};
}

}  // namespace lensreview
