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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lensreview/finding.hpp"
#include "lensreview/http.hpp"
#include "lensreview/prompt.hpp"

namespace lensreview {

struct ModelConfig {
    std::string provider_id;
    std::string model_id;
    std::optional<double> temperature;  // unset = provider default
    std::optional<std::uint32_t> max_output_tokens;
    std::optional<std::string> endpoint;  // base URL override for HTTP providers
    std::optional<std::string> script;    // mock provider script file

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void to_json(json& j, const ModelConfig& c);
void from_json(const json& j, ModelConfig& c);

struct RawResponse {
    std::string text;
    std::string model_id;
    std::string prompt_digest;
    std::uint64_t latency_ms = 0;
    std::string request_id;
    bool truncated = false;
};

struct ProviderReply {
    std::string text;
    bool truncated = false;
    std::optional<double> effective_temperature;
};

/// One provider wire format. Throw TransportError for retryable failures and
/// ProviderError for everything else.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderReply complete(const PromptText& prompt, const ModelConfig& config) = 0;
};

/// Deterministic provider: the reply is looked up by prompt digest.
class MockProvider final : public Provider {
public:
    MockProvider(std::map<std::string, std::string> by_digest, std::optional<std::string> fallback = std::nullopt,
                 std::vector<std::string> truncated_digests = {});

    /// {"responses": {digest: text}, "default": text, "truncated": [digest]}
    static std::unique_ptr<MockProvider> from_script(const json& script);
    static std::unique_ptr<MockProvider> from_script_file(const std::filesystem::path& path);

    ProviderReply complete(const PromptText& prompt, const ModelConfig& config) override;

    std::size_t calls() const { return calls_; }

private:
    std::map<std::string, std::string> by_digest_;
    std::optional<std::string> fallback_;
    std::vector<std::string> truncated_;
    std::size_t calls_ = 0;
};

/// Chat-completions style endpoint ("POST /v1/chat/completions").
class OpenAIChatProvider final : public Provider {
public:
    OpenAIChatProvider(std::unique_ptr<HttpClient> http, std::string token);
    ProviderReply complete(const PromptText& prompt, const ModelConfig& config) override;

private:
    std::unique_ptr<HttpClient> http_;
    std::string token_;
};

/// Messages style endpoint ("POST /v1/messages").
class AnthropicProvider final : public Provider {
public:
    static constexpr std::uint32_t kDefaultMaxTokens = 8192;
    AnthropicProvider(std::unique_ptr<HttpClient> http, std::string token);
    ProviderReply complete(const PromptText& prompt, const ModelConfig& config) override;

private:
    std::unique_ptr<HttpClient> http_;
    std::string token_;
};

/// "$LENSREVIEW_PROVIDER_TOKEN_<ID>", ID uppercased with non-alphanumerics as '_'.
std::string provider_token_variable(const std::string& provider_id);

class ProviderRegistry {
public:
    using Factory = std::function<std::unique_ptr<Provider>(const ModelConfig&)>;

    /// "mock", "openai" and "anthropic".
    static ProviderRegistry with_defaults();

    void register_provider(const std::string& id, Factory factory);
    bool has(const std::string& id) const { return factories_.count(id) != 0; }

    /// Throws ProviderError for an unregistered provider id.
    std::unique_ptr<Provider> resolve(const ModelConfig& config) const;

private:
    std::map<std::string, Factory> factories_;
};

struct RunRecord {
    std::string request_id;
    std::string timestamp;
    ModelConfig config;
    std::string prompt_digest;
    Condition condition = Condition::disposition;
    PrKey pr;
    std::string response_text;
    std::uint64_t latency_ms = 0;
    bool truncated = false;
    std::string message_channel = "user";
    std::optional<double> effective_temperature;
    int attempts = 1;
};

void to_json(json& j, const RunRecord& r);
void from_json(const json& j, RunRecord& r);

/// Append-only directory of run records, one JSON file per request id.
class RunStore {
public:
    explicit RunStore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    /// Allocates the next "<key>-<seq>" id for this request and writes the record.
    RunRecord append(RunRecord record);
    RunRecord load(const std::string& request_id) const;
    std::optional<RunRecord> find_latest(const PrKey& pr, Condition condition, const std::string& model_id,
                                         const std::string& prompt_digest) const;
    std::vector<RunRecord> all() const;

    static std::string request_key(const PrKey& pr, Condition condition, const std::string& model_id,
                                   const std::string& prompt_digest);

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

class Gateway {
public:
    static constexpr int kMaxTransportRetries = 2;

    Gateway(RunStore& store, ProviderRegistry providers);

    /// Sole network egress point. Persists the run record before returning.
    /// Throws ProviderError, or Timeout once transport retries are exhausted.
    RawResponse submit(const PromptText& prompt, const ModelConfig& config, const PrKey& pr);

    /// Stored response, byte-exact. Throws UnknownRun.
    RawResponse replay(const std::string& run_id) const;
    std::optional<RawResponse> replay_latest(const PrKey& pr, Condition condition, const std::string& model_id,
                                             const std::string& prompt_digest) const;

private:
    RunStore& store_;
    ProviderRegistry providers_;
};

}  // namespace lensreview
